//! `ader-bc`: single runs, convergence tables and boundary-treatment
//! comparisons for the bundled test cases.

mod config;

use ader_bc_core::harness::{self, comparison_csv, convergence_csv, ConvergenceRow};
use ader_bc_core::{CaseId, Error, Result, RunConfig};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ader-bc", version, about = "ADER finite volume runs with reverse-problem boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one case and write the cell averages as CSV.
    Run(Settings),
    /// Error norms and observed orders over a mesh sequence.
    Converge(Settings),
    /// Convergence tables for reverse, ILW and extrapolated boundaries side by side.
    CompareBc(Settings),
}

#[derive(Args, Debug, Default)]
struct Settings {
    /// linear-advection, linear-system, space-dependent, euler-smooth or blast.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    cells: Option<usize>,
    /// Comma-separated cell counts, e.g. 8,16,32,64,128.
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tout: Option<f64>,
    /// prescribed, auto, wall, ilw, periodic or extrapolate.
    #[arg(long)]
    bc_left: Option<String>,
    #[arg(long)]
    bc_right: Option<String>,
    /// Space-march steps of the reverse problem.
    #[arg(long)]
    rev_n: Option<usize>,
    /// The reverse time grid has 2 M̄ − 1 cells.
    #[arg(long)]
    rev_mbar: Option<usize>,
    /// Reverse time window as a multiple of the interior step.
    #[arg(long)]
    rev_l: Option<f64>,
    /// Boundary history used for unprescribed fields: trace or linear.
    #[arg(long)]
    history: Option<String>,
    /// Write data here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` lines or a JSON object; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

const DEFAULT_MESHES: [usize; 5] = [8, 16, 32, 64, 128];

/// The resolved configuration and the CLI-only settings.
struct Resolved {
    run: RunConfig,
    meshes: Option<Vec<usize>>,
    out: Option<PathBuf>,
}

impl Settings {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut push = |k: &'static str, val: Option<String>| {
            if let Some(val) = val {
                v.push((k, val));
            }
        };
        push("order", self.order.map(|x| x.to_string()));
        push("cells", self.cells.map(|x| x.to_string()));
        push("cfl", self.cfl.map(|x| x.to_string()));
        push("tout", self.tout.map(|x| x.to_string()));
        push("bc-left", self.bc_left.clone());
        push("bc-right", self.bc_right.clone());
        push("rev-n", self.rev_n.map(|x| x.to_string()));
        push("rev-mbar", self.rev_mbar.map(|x| x.to_string()));
        push("rev-l", self.rev_l.map(|x| x.to_string()));
        push("history", self.history.clone());
        v
    }

    fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                config::parse_settings(&text)?
            }
            None => Vec::new(),
        };
        // The case fixes the reverse defaults, so it is applied first.
        let case = match &self.case {
            Some(c) => c.clone(),
            None => file
                .iter()
                .find(|(k, _)| k == "case")
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Config("no case given (use --case or a `case` config key)".into()))?,
        };
        let mut run = RunConfig::new(case.parse::<CaseId>()?);
        let mut meshes = None;
        let mut out = None;
        for (k, v) in &file {
            match k.replace('_', "-").as_str() {
                "case" => {}
                "meshes" => meshes = Some(parse_meshes(v)?),
                "out" => out = Some(PathBuf::from(v)),
                _ => run.set(k, v)?,
            }
        }
        for (k, v) in self.flag_pairs() {
            run.set(k, &v)?;
        }
        if let Some(m) = &self.meshes {
            meshes = Some(m.clone());
        }
        if let Some(o) = &self.out {
            out = Some(o.clone());
        }
        run.validate()?;
        Ok(Resolved { run, meshes, out })
    }
}

fn parse_meshes(v: &str) -> Result<Vec<usize>> {
    v.split(',')
        .map(|m| {
            m.trim()
                .parse()
                .map_err(|_| Error::Config(format!("`meshes` expects comma-separated integers, got `{v}`")))
        })
        .collect()
}

impl Resolved {
    /// The requested meshes, or the default sequence without the levels
    /// too coarse for the order.
    fn meshes(&self) -> Vec<usize> {
        match &self.meshes {
            Some(m) => m.clone(),
            None => DEFAULT_MESHES.iter().copied().filter(|&m| m >= 2 * self.run.order).collect(),
        }
    }

    fn emit(&self, data: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, data)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{data}");
                Ok(())
            }
        }
    }
}

fn print_rows(label: &str, rows: &[ConvergenceRow]) {
    eprintln!("{label}");
    for r in rows {
        eprintln!(
            "  {:5}  Linf {:.3e} ({:5.2})  L1 {:.3e} ({:5.2})  L2 {:.3e} ({:5.2})  {:.3} s",
            r.mesh, r.linf_err, r.linf_ord, r.l1_err, r.l1_ord, r.l2_err, r.l2_ord, r.cpu
        );
    }
}

fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Run(s) => {
            let r = s.resolve()?;
            let out = harness::run_case(&r.run)?;
            let d = &out.solution.diagnostics;
            if let Some(check) = d.stability {
                eprintln!(
                    "reverse eta = {:.4}, c^2 = {:.4}: {}",
                    check.eta,
                    check.c_squared,
                    if check.ok() { "ok" } else { "may be unstable" }
                );
            }
            eprintln!("{} steps to t = {:.6} in {:.3} s", d.steps, out.solution.field.t, out.cpu);
            if d.lowered_cells > 0 || d.wall_fallbacks > 0 {
                eprintln!(
                    "first-order cell updates: {}, mirrored wall ghost sets: {}",
                    d.lowered_cells, d.wall_fallbacks
                );
            }
            if let Some(n) = out.norms {
                eprintln!("errors: Linf {:.3e}  L1 {:.3e}  L2 {:.3e}", n.linf, n.l1, n.l2);
            }
            r.emit(&out.csv())
        }
        Command::Converge(s) => {
            let r = s.resolve()?;
            let rows = harness::convergence_run(&r.run, &r.meshes())?;
            print_rows(&format!("{} order {}", r.run.case, r.run.order), &rows);
            r.emit(&convergence_csv(&rows))
        }
        Command::CompareBc(s) => {
            let r = s.resolve()?;
            let table = harness::compare_boundaries(&r.run, &r.meshes())?;
            for (name, rows) in &table {
                print_rows(&format!("{} order {} ({name})", r.run.case, r.run.order), rows);
            }
            r.emit(&comparison_csv(&table))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
