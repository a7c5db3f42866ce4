//! Run configuration, error norms, convergence tables and CSV output.

use crate::ader::CellField;
use crate::boundary::{BoundaryMode, HistoryKind};
use crate::error::{Error, Result};
use crate::models::{CaseId, CaseParams, TestCase};
use crate::quadrature::GaussLegendre;
use crate::reverse::ReverseConfig;
use crate::solver::{solve, Solution, SolverConfig};
use crate::state::StateVec;
use std::fmt::Write as _;
use std::time::Instant;

/// Header of every convergence table.
pub const CONVERGENCE_HEADER: &str = "mesh,linf_err,linf_ord,l1_err,l1_ord,l2_err,l2_ord,cpu";

/// A fully resolved run description. Unset optional fields take the case
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseId,
    pub params: CaseParams,
    pub order: usize,
    pub cells: usize,
    pub cfl: f64,
    pub t_out: Option<f64>,
    pub left: Option<BoundaryMode>,
    pub right: Option<BoundaryMode>,
    pub reverse: Option<ReverseConfig>,
    pub history: HistoryKind,
}

impl RunConfig {
    pub fn new(case: CaseId) -> Self {
        Self {
            case,
            params: CaseParams::default(),
            order: 3,
            cells: 64,
            cfl: 0.9,
            t_out: None,
            left: None,
            right: None,
            reverse: None,
            history: HistoryKind::default(),
        }
    }

    pub fn test_case(&self) -> TestCase {
        TestCase::new(self.case, self.params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=5).contains(&self.order) {
            return Err(Error::Config(format!("order {} outside 2..=5", self.order)));
        }
        if self.cells < 2 * self.order {
            return Err(Error::Config(format!(
                "{} cells is too few for order {} (need at least {})",
                self.cells,
                self.order,
                2 * self.order
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("CFL number {} outside (0, 1]", self.cfl)));
        }
        if let Some(t) = self.t_out {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("output time {t} must be positive")));
            }
        }
        if let Some(r) = self.reverse {
            r.validate()?;
        }
        Ok(())
    }

    /// The solver settings for `cells` cells.
    pub fn solver_config(&self) -> SolverConfig {
        let case = self.test_case();
        let mut cfg = SolverConfig::for_case(&case, self.order);
        cfg.cfl = self.cfl;
        cfg.history = self.history;
        if let Some(t) = self.t_out {
            cfg.t_out = t;
        }
        if let Some(m) = self.left {
            cfg.left = m;
        }
        if let Some(m) = self.right {
            cfg.right = m;
        }
        if let Some(r) = self.reverse {
            cfg.reverse = r;
        }
        cfg
    }

    /// Applies one `key = value` setting. Keys match the long CLI flags
    /// without dashes (`bc-left` and `bc_left` are both accepted).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("`{key}` expects a non-negative integer, got `{v}`")))
        };
        let mut reverse = self.reverse.unwrap_or_else(|| self.test_case().default_reverse());
        match key.as_str() {
            "case" => self.case = value.parse()?,
            "order" => self.order = int(value)?,
            "cells" => self.cells = int(value)?,
            "cfl" => self.cfl = num(value)?,
            "tout" | "t-out" => self.t_out = Some(num(value)?),
            "bc-left" => self.left = Some(value.parse()?),
            "bc-right" => self.right = Some(value.parse()?),
            "rev-n" => {
                reverse.n = int(value)?;
                self.reverse = Some(reverse);
            }
            "rev-mbar" => {
                reverse.mbar = int(value)?;
                self.reverse = Some(reverse);
            }
            "rev-l" => {
                reverse.l = num(value)?;
                self.reverse = Some(reverse);
            }
            "history" => self.history = value.parse()?,
            "lambda" => self.params.lambda = num(value)?,
            "gamma" => self.params.gamma = num(value)?,
            "k" => self.params.k = num(value)?,
            _ => return Err(Error::Config(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }
}

/// Discrete error norms, averaged over components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Cell averages of `exact(·, t)` by 3-point Gauss.
pub fn exact_averages(
    field: &CellField,
    t: f64,
    exact: impl Fn(f64, f64) -> Result<StateVec>,
) -> Result<Vec<StateVec>> {
    let rule = GaussLegendre::new(3);
    (0..field.cells())
        .map(|i| {
            let a = field.cell_left(i as i64);
            let mut acc = StateVec::zeros(field.dim());
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                acc = acc.axpy(*w, &exact(a + x * field.dx, t)?);
            }
            Ok(acc)
        })
        .collect()
}

/// `L∞`, `L1` and `L2` errors of `field` against `exact` at `t`.
pub fn error_norms(field: &CellField, t: f64, exact: impl Fn(f64, f64) -> Result<StateVec>) -> Result<ErrorNorms> {
    let reference = exact_averages(field, t, exact)?;
    Ok(norms_between(field, &reference))
}

/// Norms of `field.averages − reference`.
pub fn norms_between(field: &CellField, reference: &[StateVec]) -> ErrorNorms {
    let m = field.dim() as f64;
    let mut out = ErrorNorms::default();
    for (q, r) in field.averages.iter().zip(reference) {
        for e in (*q - *r).iter() {
            let e = e.abs();
            out.linf = out.linf.max(e);
            out.l1 += e;
            out.l2 += e * e;
        }
    }
    out.l1 *= field.dx / m;
    out.l2 = (out.l2 * field.dx / m).sqrt();
    out
}

/// One line of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub mesh: usize,
    pub linf_err: f64,
    pub linf_ord: f64,
    pub l1_err: f64,
    pub l1_ord: f64,
    pub l2_err: f64,
    pub l2_ord: f64,
    pub cpu: f64,
}

/// `log2(coarse / fine)`; meaningless ratios give `NaN`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Rows with orders from consecutive meshes. The first row has zero orders.
pub fn convergence_rows(results: &[(usize, ErrorNorms, f64)]) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(results.len());
    for (k, &(mesh, e, cpu)) in results.iter().enumerate() {
        let (lo, l1o, l2o) = match k {
            0 => (0.0, 0.0, 0.0),
            _ => {
                let p = results[k - 1].1;
                let ratio = (mesh as f64 / results[k - 1].0 as f64).log2();
                (
                    observed_order(p.linf, e.linf) / ratio,
                    observed_order(p.l1, e.l1) / ratio,
                    observed_order(p.l2, e.l2) / ratio,
                )
            }
        };
        rows.push(ConvergenceRow {
            mesh,
            linf_err: e.linf,
            linf_ord: lo,
            l1_err: e.l1,
            l1_ord: l1o,
            l2_err: e.l2,
            l2_ord: l2o,
            cpu,
        });
    }
    rows
}

fn row_fields(r: &ConvergenceRow) -> String {
    format!(
        "{:.6e},{:.2},{:.6e},{:.2},{:.6e},{:.2},{:.4}",
        r.linf_err, r.linf_ord, r.l1_err, r.l1_ord, r.l2_err, r.l2_ord, r.cpu
    )
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{}", r.mesh, row_fields(r));
    }
    s
}

/// Per-cell CSV `x,Q_1..Q_m[,exact_1..exact_m]` at the cell centres.
pub fn solution_csv(field: &CellField, exact: Option<&[StateVec]>) -> String {
    let m = field.dim();
    let mut s = String::from("x");
    for j in 1..=m {
        let _ = write!(s, ",Q_{j}");
    }
    if exact.is_some() {
        for j in 1..=m {
            let _ = write!(s, ",exact_{j}");
        }
    }
    s.push('\n');
    for (i, q) in field.averages.iter().enumerate() {
        let _ = write!(s, "{:.12e}", field.cell_center(i as i64));
        for v in q.iter() {
            let _ = write!(s, ",{v:.12e}");
        }
        if let Some(e) = exact {
            for v in e[i].iter() {
                let _ = write!(s, ",{v:.12e}");
            }
        }
        s.push('\n');
    }
    s
}

/// A finished single run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub solution: Solution,
    /// Exact cell averages at `t_out`, when the case has them.
    pub exact: Option<Vec<StateVec>>,
    pub norms: Option<ErrorNorms>,
    pub cpu: f64,
}

impl RunOutput {
    pub fn csv(&self) -> String {
        solution_csv(&self.solution.field, self.exact.as_deref())
    }
}

pub fn run_case(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let case = cfg.test_case();
    let scfg = cfg.solver_config();
    let start = Instant::now();
    let solution = solve(&case, cfg.cells, &scfg)?;
    let cpu = start.elapsed().as_secs_f64();
    let (exact, norms) = if case.has_exact() {
        let e = exact_averages(&solution.field, solution.field.t, |x, t| case.exact(x, t))?;
        let n = norms_between(&solution.field, &e);
        (Some(e), Some(n))
    } else {
        (None, None)
    };
    Ok(RunOutput {
        solution,
        exact,
        norms,
        cpu,
    })
}

/// Errors and CPU seconds for one solve per mesh.
fn mesh_results(cfg: &RunConfig, meshes: &[usize]) -> Result<Vec<(usize, ErrorNorms, f64)>> {
    let case = cfg.test_case();
    if !case.has_exact() {
        return Err(Error::Unsupported(format!("case `{}` has no exact solution", case.id)));
    }
    if meshes.is_empty() {
        return Err(Error::Config("no meshes given".into()));
    }
    meshes
        .iter()
        .map(|&cells| {
            let mut c = cfg.clone();
            c.cells = cells;
            let out = run_case(&c)?;
            Ok((cells, out.norms.expect("case has an exact solution"), out.cpu))
        })
        .collect()
}

pub fn convergence_run(cfg: &RunConfig, meshes: &[usize]) -> Result<Vec<ConvergenceRow>> {
    Ok(convergence_rows(&mesh_results(cfg, meshes)?))
}

/// Boundary treatments compared side by side.
pub const TREATMENTS: [(&str, Option<BoundaryMode>); 3] = [
    ("reverse", None),
    ("ilw", Some(BoundaryMode::Ilw)),
    ("extrapolation", Some(BoundaryMode::Extrapolate)),
];

/// Convergence rows per treatment: the configured reverse modes, inverse
/// Lax-Wendroff on both sides, and Lagrange extrapolation on both sides.
pub fn compare_boundaries(cfg: &RunConfig, meshes: &[usize]) -> Result<Vec<(&'static str, Vec<ConvergenceRow>)>> {
    TREATMENTS
        .iter()
        .map(|&(name, mode)| {
            let mut c = cfg.clone();
            if let Some(m) = mode {
                c.left = Some(m);
                c.right = Some(m);
            }
            Ok((name, convergence_run(&c, meshes)?))
        })
        .collect()
}

/// Wide CSV with one column group per treatment.
pub fn comparison_csv(table: &[(&str, Vec<ConvergenceRow>)]) -> String {
    let mut s = String::from("mesh");
    for (name, _) in table {
        for col in CONVERGENCE_HEADER.split(',').skip(1) {
            let _ = write!(s, ",{name}_{col}");
        }
    }
    s.push('\n');
    let n = table.first().map_or(0, |t| t.1.len());
    for k in 0..n {
        let _ = write!(s, "{}", table[0].1[k].mesh);
        for (_, rows) in table {
            let _ = write!(s, ",{}", row_fields(&rows[k]));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(values: &[f64]) -> CellField {
        CellField::new(0.0, 1.0, values.iter().map(|&v| StateVec::scalar(v)).collect())
    }

    #[test]
    fn exact_data_has_zero_error() {
        let case = TestCase::new(CaseId::LinearAdvection, CaseParams::default());
        let f = CellField::new(0.0, 1.0, vec![StateVec::zeros(1); 16]);
        let mut f2 = f.clone();
        f2.averages = exact_averages(&f, 0.3, |x, t| case.exact(x, t)).unwrap();
        let n = error_norms(&f2, 0.3, |x, t| case.exact(x, t)).unwrap();
        assert_eq!(n, ErrorNorms::default());
    }

    #[test]
    fn uniform_error_gives_equal_norms() {
        let f = field(&[0.25; 10]);
        let n = error_norms(&f, 0.0, |_, _| Ok(StateVec::scalar(0.0))).unwrap();
        assert!((n.linf - 0.25).abs() < 1e-15);
        assert!((n.l1 - 0.25).abs() < 1e-15);
        assert!((n.l2 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn orders_from_error_ratios() {
        let e = |v: f64| ErrorNorms {
            linf: v,
            l1: v,
            l2: v,
        };
        let rows = convergence_rows(&[(8, e(4e-2), 0.1), (16, e(1e-2), 0.2)]);
        assert_eq!(rows[0].l1_ord, 0.0);
        assert!((rows[1].l1_ord - 2.0).abs() < 1e-12);
        let single = convergence_rows(&[(8, e(1.0), 0.0)]);
        assert_eq!(single.len(), 1);
        assert_eq!((single[0].linf_ord, single[0].l2_ord), (0.0, 0.0));
    }

    #[test]
    fn csv_header_is_stable() {
        let rows = convergence_rows(&[(8, ErrorNorms::default(), 0.0)]);
        let csv = convergence_csv(&rows);
        assert_eq!(csv.lines().next().unwrap(), CONVERGENCE_HEADER);
        assert!(csv.lines().nth(1).unwrap().starts_with("8,"));
    }

    #[test]
    fn settings_parse_and_validate() {
        let mut c = RunConfig::new(CaseId::LinearAdvection);
        c.set("order", "5").unwrap();
        c.set("bc_left", "ilw").unwrap();
        c.set("rev-n", "40").unwrap();
        c.set("tout", "0.5").unwrap();
        c.set("history", "linear").unwrap();
        assert_eq!(c.solver_config().history, HistoryKind::Linear);
        assert_eq!(c.order, 5);
        assert_eq!(c.left, Some(BoundaryMode::Ilw));
        assert_eq!(c.reverse.unwrap().n, 40);
        assert_eq!(c.reverse.unwrap().mbar, 10);
        assert!(c.set("colour", "red").is_err());
        assert!(c.set("cfl", "fast").is_err());
        c.cells = 9;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.cells = 10;
        c.cfl = 1.5;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn solution_csv_layout() {
        let f = field(&[1.0, 2.0]);
        let csv = solution_csv(&f, Some(&[StateVec::scalar(1.0), StateVec::scalar(2.0)]));
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,Q_1,exact_1");
        assert!(lines.next().unwrap().starts_with("2.5"));
    }
}
