//! Time loop: boundary completion, ghost cells and ADER steps up to `t_out`.

use crate::ader::{compute_dt, AderScheme, CellField, FaceTreatment};
use crate::boundary::{
    characteristic_mask, complete_boundary_function, face_value, face_weights, solid_wall_adapter, BoundaryFunction,
    BoundaryMode, BoundaryTrace, History, HistoryBuffer, HistoryKind,
};
use crate::error::{Error, Result};
use crate::ilw::{ilw_ghost_averages, BoundaryDerivatives};
use crate::models::{CaseId, Euler, Side, TestCase};
use crate::quadrature::lagrange_weights;
use crate::reverse::{validate_config, ReverseConfig, ReverseSolver, StabilityCheck};
use crate::state::StateVec;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Everything a solve needs besides the case and the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub order: usize,
    pub cfl: f64,
    pub t_out: f64,
    pub left: BoundaryMode,
    pub right: BoundaryMode,
    pub reverse: ReverseConfig,
    pub history: HistoryKind,
}

impl SolverConfig {
    /// Reference settings of the case at the given order.
    pub fn for_case(case: &TestCase, order: usize) -> Self {
        let (left, right) = case.default_modes();
        Self {
            order,
            cfl: 0.9,
            t_out: case.default_t_out(),
            left,
            right,
            reverse: case.default_reverse(),
            history: HistoryKind::default(),
        }
    }

    pub fn mode(&self, side: Side) -> BoundaryMode {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn uses_reverse(&self) -> bool {
        self.left.uses_reverse() || self.right.uses_reverse()
    }
}

/// Counters and warnings gathered during a solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    pub stability: Option<StabilityCheck>,
    /// Ghost evaluations whose march had to be refined by the CFL guard.
    pub refined_marches: usize,
    /// Largest march step count used.
    pub max_march_n: usize,
    /// Wall ghost sets that fell back to mirrored interior cells.
    pub wall_fallbacks: usize,
    /// Wall states clamped to the admissibility floor.
    pub wall_clamps: usize,
    /// Cell updates that fell back to first order to stay admissible.
    pub lowered_cells: usize,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: CellField,
    pub diagnostics: Diagnostics,
}

/// Runs `case` on `cells` uniform cells to `cfg.t_out`. `observer` sees the
/// field after every accepted step.
pub fn solve_with(
    case: &TestCase,
    cells: usize,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&CellField),
) -> Result<Solution> {
    validate(case, cells, cfg)?;
    let model = case.model();
    let scheme = AderScheme::new(cfg.order)?;
    let ghosts = scheme.weno.ghosts();
    let (xl, xr) = case.domain();
    let mut field = CellField::new(xl, xr, case.initial_averages(cells));
    let mut diag = Diagnostics::default();
    if cfg.uses_reverse() {
        let check = validate_config(&cfg.reverse, cfg.cfl);
        if let Some(w) = check.warning() {
            diag.warn(w);
        }
        diag.stability = Some(check);
    }
    let clamps = Arc::new(AtomicUsize::new(0));
    let reverse = ReverseSolver::new(model, cfg.reverse);
    let mut history: [Option<HistoryBuffer>; 2] = [None, None];
    let mut traces: [Option<BoundaryTrace>; 2] = [None, None];
    let weights = face_weights(cfg.order + 1);
    let mut refine_warned = false;

    while field.t < cfg.t_out {
        let dt = compute_dt(model, &field, cfg.cfl, cfg.t_out)?;
        if !(dt > 0.0) {
            break;
        }
        // The reverse window follows the CFL step, not the clipped last step.
        let window_dt = compute_dt(model, &field, cfg.cfl, f64::INFINITY)?;
        let mut data: [Option<BoundaryFunction>; 2] = [None, None];
        for (k, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let mode = cfg.mode(side);
            if mode == BoundaryMode::Periodic {
                let n = field.cells();
                let g: Vec<StateVec> = (0..ghosts)
                    .map(|j| match side {
                        Side::Left => field.averages[(n - 1 - j % n) % n],
                        Side::Right => field.averages[j % n],
                    })
                    .collect();
                field.set_ghosts(side, g);
                continue;
            }
            if mode == BoundaryMode::Extrapolate {
                field.set_ghosts(side, extrapolated_ghosts(&field, side, ghosts, cfg.order));
                continue;
            }
            let buffer = *history[k].get_or_insert_with(|| seed(&field, side, dt));
            let g = match cfg.history {
                HistoryKind::Trace if mode != BoundaryMode::Wall => {
                    let trace = traces[k].get_or_insert_with(|| {
                        BoundaryTrace::new(cfg.order, TRACE_LEVELS, field.t, trace_value(&field, side, &weights), field.adjacent(side))
                    });
                    boundary_function(case, mode, side, &*trace, &buffer, Arc::clone(&clamps))?
                }
                _ => boundary_function(case, mode, side, &buffer, &buffer, Arc::clone(&clamps))?,
            };
            let ghost_values = match mode {
                BoundaryMode::Prescribed | BoundaryMode::Auto | BoundaryMode::Wall => {
                    let adj = field.adjacent(side);
                    let r = reverse.ghost_cell_averages(
                        side,
                        ghosts,
                        field.t,
                        field.boundary_x(side),
                        field.dx,
                        &g,
                        window_dt,
                        &adj,
                    );
                    match r {
                        Ok((values, report)) => {
                            diag.max_march_n = diag.max_march_n.max(report.n);
                            if report.refinements > 0 {
                                diag.refined_marches += 1;
                                if !refine_warned {
                                    refine_warned = true;
                                    diag.warn(format!(
                                        "reverse CFL guard raised N from {} to {} at the {side} boundary (t = {:.6e})",
                                        cfg.reverse.n, report.n, field.t
                                    ));
                                }
                            }
                            values
                        }
                        Err(e @ (Error::March(_) | Error::Domain { .. })) if mode == BoundaryMode::Wall => {
                            let msg = e.to_string();
                            if diag.wall_fallbacks == 0 {
                                diag.warn(format!(
                                    "{side} wall: reverse march unavailable ({msg}); using mirrored interior cells"
                                ));
                            }
                            diag.wall_fallbacks += 1;
                            mirror_ghosts(&field, side, ghosts)
                        }
                        Err(e) => return Err(e),
                    }
                }
                BoundaryMode::Ilw => {
                    let derivs = case.exact_time_derivatives(field.boundary_x(side), field.t, cfg.order.max(2))?;
                    ilw_ghost_averages(model, &BoundaryDerivatives::new(derivs)?, side, field.dx, ghosts, cfg.order)?
                }
                BoundaryMode::Extrapolate | BoundaryMode::Periodic => unreachable!("handled above"),
            };
            field.set_ghosts(side, ghost_values);
            data[k] = Some(g);
        }
        let face = |k: usize| match &data[k] {
            Some(g) => FaceTreatment::Data(g),
            None => FaceTreatment::Ghost,
        };
        let next = scheme.step_report(model, &field, face(0), face(1), dt)?;
        if next.lowered > 0 {
            if diag.lowered_cells == 0 {
                diag.warn(format!(
                    "positivity fallback: {} cells advanced at first order at t = {:.6e}",
                    next.lowered, field.t
                ));
            }
            diag.lowered_cells += next.lowered;
        }
        field.averages = next.averages;
        field.t = if field.t + dt >= cfg.t_out || cfg.t_out - (field.t + dt) < 1e-14 * cfg.t_out.max(1.0) {
            cfg.t_out
        } else {
            field.t + dt
        };
        for (k, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            if let Some(h) = history[k].as_mut() {
                h.advance(field.adjacent(side), field.t);
            }
            if let Some(h) = traces[k].as_mut() {
                h.push(field.t, trace_value(&field, side, &weights), field.adjacent(side));
            }
        }
        diag.steps += 1;
        observer(&field);
    }
    diag.wall_clamps = clamps.load(Ordering::Relaxed);
    if diag.wall_clamps > 0 {
        let n = diag.wall_clamps;
        diag.warn(format!("wall states clamped to the admissibility floor {n} times"));
    }
    if diag.wall_fallbacks > 0 {
        let n = diag.wall_fallbacks;
        diag.warn(format!("mirrored wall ghosts used {n} times"));
    }
    Ok(Solution {
        field,
        diagnostics: diag,
    })
}

pub fn solve(case: &TestCase, cells: usize, cfg: &SolverConfig) -> Result<Solution> {
    solve_with(case, cells, cfg, |_| {})
}

fn validate(case: &TestCase, cells: usize, cfg: &SolverConfig) -> Result<()> {
    if !(2..=5).contains(&cfg.order) {
        return Err(Error::Config(format!("order {} outside 2..=5", cfg.order)));
    }
    if cells < 2 * cfg.order {
        return Err(Error::Config(format!("{cells} cells is too few for order {} (need ≥ {})", cfg.order, 2 * cfg.order)));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::Config(format!("CFL number {} outside (0, 1]", cfg.cfl)));
    }
    if !(cfg.t_out > 0.0 && cfg.t_out.is_finite()) {
        return Err(Error::Config(format!("output time {} must be positive", cfg.t_out)));
    }
    if (cfg.left == BoundaryMode::Periodic) != (cfg.right == BoundaryMode::Periodic) {
        return Err(Error::Config("periodic mode must be used on both sides".into()));
    }
    for side in [Side::Left, Side::Right] {
        let mode = cfg.mode(side);
        if mode == BoundaryMode::Wall && !matches!(case.id, CaseId::EulerSmooth | CaseId::Blast) {
            return Err(Error::Config(format!("wall mode needs the Euler equations, not `{}`", case.id)));
        }
        if matches!(mode, BoundaryMode::Prescribed | BoundaryMode::Ilw) && !case.has_exact() {
            return Err(Error::Config(format!("case `{}` has no data for {mode} boundaries", case.id)));
        }
    }
    if cfg.uses_reverse() {
        cfg.reverse.validate()?;
    }
    Ok(())
}

/// History buffer seeded from the three cells nearest `side`.
fn seed(field: &CellField, side: Side, dt: f64) -> HistoryBuffer {
    let n = field.cells();
    let q = |j: usize| match side {
        Side::Left => field.averages[j],
        Side::Right => field.averages[n - 1 - j],
    };
    HistoryBuffer::seeded(q(0), q(1), q(2), field.t, dt)
}

/// Time levels kept by a boundary trace.
const TRACE_LEVELS: usize = 64;

/// Boundary point value recovered from the innermost averages.
fn trace_value(field: &CellField, side: Side, weights: &[f64]) -> StateVec {
    let n = field.cells();
    let inner: Vec<StateVec> = (0..weights.len())
        .map(|j| match side {
            Side::Left => field.averages[j],
            Side::Right => field.averages[n - 1 - j],
        })
        .collect();
    face_value(&inner, weights)
}

fn boundary_function<H: History>(
    case: &TestCase,
    mode: BoundaryMode,
    side: Side,
    history: &H,
    buffer: &HistoryBuffer,
    clamps: Arc<AtomicUsize>,
) -> Result<BoundaryFunction> {
    let model = case.model();
    let dim = model.dim();
    let data = || {
        let c = case.clone();
        BoundaryFunction::prescribed(side, dim, move |t| c.boundary_value(side, t).expect("case has exact data"))
    };
    match mode {
        BoundaryMode::Prescribed | BoundaryMode::Ilw => Ok(data()),
        BoundaryMode::Auto => {
            let mask = characteristic_mask(model, side, &history.adjacent())?;
            let g = (mask.iter().any(|&m| m) && case.has_exact()).then(data);
            complete_boundary_function(model, g.as_ref(), side, &mask, history)
        }
        BoundaryMode::Wall => Ok(solid_wall_adapter(Euler::new(case.params.gamma), buffer, side, clamps)),
        BoundaryMode::Periodic | BoundaryMode::Extrapolate => unreachable!("no boundary function for {mode}"),
    }
}

/// Interior cells reflected across the boundary with momentum negated.
fn mirror_ghosts(field: &CellField, side: Side, count: usize) -> Vec<StateVec> {
    let n = field.cells();
    (0..count)
        .map(|j| {
            let mut q = match side {
                Side::Left => field.averages[j.min(n - 1)],
                Side::Right => field.averages[n - 1 - j.min(n - 1)],
            };
            q[1] = -q[1];
            q
        })
        .collect()
}

/// Degree-`(order − 1)` extrapolation of the `order` averages nearest `side`.
fn extrapolated_ghosts(field: &CellField, side: Side, count: usize, order: usize) -> Vec<StateVec> {
    let n = field.cells();
    let nodes: Vec<f64> = (0..order).map(|j| j as f64).collect();
    let inner = |j: usize| match side {
        Side::Left => field.averages[j],
        Side::Right => field.averages[n - 1 - j],
    };
    (1..=count)
        .map(|j| {
            let w = lagrange_weights(&nodes, -(j as f64));
            let mut acc = StateVec::zeros(field.dim());
            for (i, wi) in w.iter().enumerate() {
                acc = acc.axpy(*wi, &inner(i));
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CaseParams;

    #[test]
    fn periodic_advection_conserves_mass() {
        let case = TestCase::new(CaseId::LinearAdvection, CaseParams::default());
        for order in 2..=5 {
            let mut cfg = SolverConfig::for_case(&case, order);
            cfg.left = BoundaryMode::Periodic;
            cfg.right = BoundaryMode::Periodic;
            cfg.t_out = 0.5;
            let initial: f64 = case.initial_averages(32).iter().map(|q| q[0]).sum();
            let mut worst = 0.0f64;
            solve_with(&case, 32, &cfg, |f| {
                let s: f64 = f.averages.iter().map(|q| q[0]).sum();
                worst = worst.max((s - initial).abs());
            })
            .unwrap();
            assert!(worst < 1e-12, "order {order}: drift {worst}");
        }
    }

    #[test]
    fn constant_state_is_preserved() {
        let case = TestCase::new(CaseId::LinearSystem, CaseParams::default());
        let cfg = SolverConfig::for_case(&case, 3);
        let field = CellField::new(0.0, 1.0, vec![StateVec::from_slice(&[0.5, -0.25]); 16]);
        let scheme = AderScheme::new(3).unwrap();
        let g = BoundaryFunction::constant(Side::Left, field.averages[0]);
        let reverse = ReverseSolver::new(case.model(), cfg.reverse);
        let mut f = field.clone();
        for side in [Side::Left, Side::Right] {
            let (gh, _) = reverse
                .ghost_cell_averages(side, 3, 0.0, f.boundary_x(side), f.dx, &g, 0.02, &f.averages[0])
                .unwrap();
            f.set_ghosts(side, gh);
        }
        let next = scheme
            .step(case.model(), &f, FaceTreatment::Data(&g), FaceTreatment::Data(&g), 0.02)
            .unwrap();
        for (a, b) in next.iter().zip(&field.averages) {
            assert!((*a - *b).norm_inf() < 1e-14);
        }
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        let case = TestCase::new(CaseId::LinearAdvection, CaseParams::default());
        let mut cfg = SolverConfig::for_case(&case, 3);
        assert!(matches!(solve(&case, 4, &cfg), Err(Error::Config(_))));
        cfg.left = BoundaryMode::Wall;
        assert!(matches!(solve(&case, 16, &cfg), Err(Error::Config(_))));
        cfg.left = BoundaryMode::Periodic;
        assert!(matches!(solve(&case, 16, &cfg), Err(Error::Config(_))));
        let blast = TestCase::new(CaseId::Blast, CaseParams::default());
        let mut cfg = SolverConfig::for_case(&blast, 2);
        cfg.left = BoundaryMode::Prescribed;
        assert!(matches!(solve(&blast, 16, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn extrapolation_is_exact_on_polynomial_averages() {
        let avgs: Vec<StateVec> = (0..8).map(|i| StateVec::scalar((i * i) as f64 - 2.0 * i as f64)).collect();
        let field = CellField::new(0.0, 1.0, avgs);
        let g = extrapolated_ghosts(&field, Side::Left, 2, 3);
        assert!((g[0][0] - 3.0).abs() < 1e-12);
        assert!((g[1][0] - 8.0).abs() < 1e-12);
    }
}
