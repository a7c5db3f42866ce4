//! One-step ADER finite volume scheme: reconstruction, local predictor,
//! Rusanov fluxes integrated in time and the conservative update.

mod predictor;

pub use predictor::{CellSlab, Predictor};

use crate::boundary::BoundaryFunction;
use crate::error::{Error, Result};
use crate::models::{flux_eval, Side, SystemModel};
use crate::quadrature::{lagrange_weights, GaussLegendre};
use crate::state::StateVec;
use crate::weno::{WenoReconstructor, MAX_ORDER};

/// Most time nodes a face trace carries.
pub const MAX_NODES: usize = MAX_ORDER;

/// Uniform grid with cell averages at one time level plus ghost cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub x_left: f64,
    pub x_right: f64,
    pub dx: f64,
    pub t: f64,
    pub averages: Vec<StateVec>,
    /// Left ghosts ordered outward: `ghosts_left[0]` touches the boundary.
    pub ghosts_left: Vec<StateVec>,
    /// Right ghosts ordered outward: `ghosts_right[0]` touches the boundary.
    pub ghosts_right: Vec<StateVec>,
}

impl CellField {
    pub fn new(x_left: f64, x_right: f64, averages: Vec<StateVec>) -> Self {
        let n = averages.len();
        assert!(n > 0 && x_right > x_left);
        Self {
            x_left,
            x_right,
            dx: (x_right - x_left) / n as f64,
            t: 0.0,
            averages,
            ghosts_left: Vec::new(),
            ghosts_right: Vec::new(),
        }
    }

    pub fn cells(&self) -> usize {
        self.averages.len()
    }

    pub fn dim(&self) -> usize {
        self.averages[0].len()
    }

    /// Left face of cell `i`; negative indices address ghost cells.
    pub fn cell_left(&self, i: i64) -> f64 {
        self.x_left + i as f64 * self.dx
    }

    pub fn cell_center(&self, i: i64) -> f64 {
        self.cell_left(i) + 0.5 * self.dx
    }

    pub fn boundary_x(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.x_left,
            Side::Right => self.x_right,
        }
    }

    /// Interior cell next to the boundary.
    pub fn adjacent(&self, side: Side) -> StateVec {
        match side {
            Side::Left => self.averages[0],
            Side::Right => self.averages[self.cells() - 1],
        }
    }

    pub fn set_ghosts(&mut self, side: Side, ghosts: Vec<StateVec>) {
        match side {
            Side::Left => self.ghosts_left = ghosts,
            Side::Right => self.ghosts_right = ghosts,
        }
    }

    /// Averages left to right including `g` ghosts on each side.
    pub fn padded(&self, g: usize) -> Vec<StateVec> {
        assert!(
            self.ghosts_left.len() >= g && self.ghosts_right.len() >= g,
            "ghost cells missing: need {g} per side"
        );
        let mut out = Vec::with_capacity(self.cells() + 2 * g);
        out.extend(self.ghosts_left[..g].iter().rev());
        out.extend_from_slice(&self.averages);
        out.extend_from_slice(&self.ghosts_right[..g]);
        out
    }
}

/// Predictor trace at one face of a cell, stored as values at the
/// Gauss-Legendre nodes in scaled time `τ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceTimePoly {
    /// `Left` for the trace at `ξ = 0`, `Right` for `ξ = 1`.
    pub side: Side,
    len: usize,
    values: [StateVec; MAX_NODES],
}

impl FaceTimePoly {
    pub fn from_nodal(values: &[StateVec], side: Side) -> Self {
        let mut v = [StateVec::zeros(values[0].len()); MAX_NODES];
        v[..values.len()].copy_from_slice(values);
        Self {
            side,
            len: values.len(),
            values: v,
        }
    }

    pub fn constant(q: StateVec, nodes: usize, side: Side) -> Self {
        Self::from_nodal(&vec![q; nodes], side)
    }

    pub fn nodal(&self) -> &[StateVec] {
        &self.values[..self.len]
    }

    /// Interpolated value at any `τ`.
    pub fn eval(&self, tau: f64) -> StateVec {
        let nodes = GaussLegendre::new(self.len).nodes;
        let w = lagrange_weights(&nodes, tau);
        let mut acc = StateVec::zeros(self.values[0].len());
        for (wi, v) in w.iter().zip(self.nodal()) {
            acc = acc.axpy(*wi, v);
        }
        acc
    }
}

/// Local Lax-Friedrichs flux.
pub fn rusanov(model: &dyn SystemModel, qa: &StateVec, qb: &StateVec) -> Result<StateVec> {
    let fa = flux_eval(model, qa)?;
    let fb = flux_eval(model, qb)?;
    let s = model.spectral_radius(qa).max(model.spectral_radius(qb));
    Ok((fa + fb) * 0.5 - (*qb - *qa) * (0.5 * s))
}

/// Time average of the Rusanov flux between two traces at one interface.
pub fn interface_flux(
    model: &dyn SystemModel,
    left: &FaceTimePoly,
    right: &FaceTimePoly,
    rule: &GaussLegendre,
) -> Result<StateVec> {
    let mut acc = StateVec::zeros(model.dim());
    for (b, w) in rule.weights.iter().enumerate() {
        acc = acc.axpy(*w, &rusanov(model, &left.nodal()[b], &right.nodal()[b])?);
    }
    Ok(acc)
}

/// Time average over `[t, t + Δt]` of the Rusanov flux between the boundary
/// data `G` and the interior trace.
pub fn boundary_flux(
    model: &dyn SystemModel,
    g: &BoundaryFunction,
    trace: &FaceTimePoly,
    side: Side,
    t: f64,
    dt: f64,
    rule: &GaussLegendre,
) -> Result<StateVec> {
    let mut acc = StateVec::zeros(model.dim());
    for (b, (tau, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let gv = g.eval(t + tau * dt);
        let q = &trace.nodal()[b];
        let f = match side {
            Side::Left => rusanov(model, &gv, q)?,
            Side::Right => rusanov(model, q, &gv)?,
        };
        acc = acc.axpy(*w, &f);
    }
    Ok(acc)
}

/// `Δt = c Δx / λ̄`, clipped so the last step lands on `t_out`.
pub fn compute_dt(model: &dyn SystemModel, field: &CellField, cfl: f64, t_out: f64) -> Result<f64> {
    let mut lambda = 0.0f64;
    for q in &field.averages {
        let s = model.spectral_radius(q);
        if !s.is_finite() {
            return Err(Error::domain("wave speed is not finite", q));
        }
        lambda = lambda.max(s);
    }
    if lambda <= 0.0 {
        return Err(Error::Config("all wave speeds vanish; the time step is undefined".into()));
    }
    let dt = cfl * field.dx / lambda;
    Ok(dt.min(t_out - field.t))
}

/// How the flux through a domain face is obtained.
#[derive(Clone, Copy)]
pub enum FaceTreatment<'a> {
    /// Rusanov flux against the predictor of the adjacent ghost cell.
    Ghost,
    /// Rusanov flux against boundary data, integrated in time.
    Data(&'a BoundaryFunction),
}

/// Scheme for one order `M`: reconstruction and predictor with cached tables.
#[derive(Debug, Clone)]
pub struct AderScheme {
    pub weno: WenoReconstructor,
    pub predictor: Predictor,
    source_rule: GaussLegendre,
}

impl AderScheme {
    pub fn new(order: usize) -> Result<Self> {
        Ok(Self {
            weno: WenoReconstructor::new(order)?,
            predictor: Predictor::new(order),
            source_rule: GaussLegendre::new(order),
        })
    }

    pub fn order(&self) -> usize {
        self.weno.order()
    }

    /// Conservative update over `[t, t + Δt]` given populated ghosts.
    pub fn step(
        &self,
        model: &dyn SystemModel,
        field: &CellField,
        left: FaceTreatment<'_>,
        right: FaceTreatment<'_>,
        dt: f64,
    ) -> Result<Vec<StateVec>> {
        self.step_report(model, field, left, right, dt).map(|s| s.averages)
    }

    /// [`AderScheme::step`] with the positivity fallback reported. A cell
    /// whose predictor, interface flux or update is inadmissible has its
    /// traces replaced by its average, which makes the fluxes through its
    /// faces first order; the set grows to the neighbours until the update
    /// is admissible or every cell is first order.
    pub fn step_report(
        &self,
        model: &dyn SystemModel,
        field: &CellField,
        left: FaceTreatment<'_>,
        right: FaceTreatment<'_>,
        dt: f64,
    ) -> Result<StepOutcome> {
        let n = field.cells();
        let g = self.weno.ghosts();
        let padded = field.padded(g);
        let rule = self.predictor.time_rule();
        let nodes = rule.len();
        // Traces for cells −1..=n, the outer two only with ghost treatment.
        let first = if matches!(left, FaceTreatment::Ghost) { g - 1 } else { g };
        let last = if matches!(right, FaceTreatment::Ghost) { g + n } else { g + n - 1 };
        let offset = first as i64 - g as i64;
        let mut traces = Vec::with_capacity(last - first + 1);
        let mut lowered = vec![false; last - first + 1];
        for (k, p) in (first..=last).enumerate() {
            let cell = p as i64 - g as i64;
            let poly = self.weno.reconstruct_cell(&padded, p);
            let slab = CellSlab {
                x_left: field.cell_left(cell),
                dx: field.dx,
                t: field.t,
                dt,
            };
            let tr = match self.predictor.predict(model, &poly, slab) {
                Ok(tr) if tr.0.nodal().iter().chain(tr.1.nodal()).all(|q| model.check_admissible(q).is_ok()) => tr,
                Ok(_) | Err(Error::Domain { .. }) => {
                    lowered[k] = true;
                    constant_traces(padded[p], nodes)
                }
                Err(e) => return Err(locate(e, cell, field.t)),
            };
            traces.push(tr);
        }
        let index = |cell: i64| (cell - offset) as usize;
        let face_flux = |j: i64, traces: &[(FaceTimePoly, FaceTimePoly)]| -> Result<StateVec> {
            let tr = |cell: i64| &traces[index(cell)];
            if j == 0 {
                if let FaceTreatment::Data(gl) = left {
                    return boundary_flux(model, gl, &tr(0).0, Side::Left, field.t, dt, rule);
                }
            } else if j == n as i64 {
                if let FaceTreatment::Data(gr) = right {
                    return boundary_flux(model, gr, &tr(j - 1).1, Side::Right, field.t, dt, rule);
                }
            }
            interface_flux(model, &tr(j - 1).1, &tr(j).0, rule)
        };
        let count = lowered.len();
        let has = |cell: i64| cell >= offset && index(cell) < count;
        let mut faces = vec![StateVec::zeros(model.dim()); n + 1];
        let mut pending: Vec<i64> = (0..=n as i64).collect();
        loop {
            // faces[j] is the flux through x_{j − 1/2}, j = 0..=n.
            for &j in &pending {
                faces[j as usize] = match face_flux(j, &traces) {
                    Ok(f) => f,
                    Err(Error::Domain { .. }) => {
                        for cell in [j - 1, j] {
                            if has(cell) && !lowered[index(cell)] {
                                lowered[index(cell)] = true;
                                traces[index(cell)] = constant_traces(padded[(cell + g as i64) as usize], nodes);
                            }
                        }
                        face_flux(j, &traces).map_err(|e| locate(e, j, field.t))?
                    }
                    Err(e) => return Err(locate(e, j, field.t)),
                };
            }
            let ratio = dt / field.dx;
            let mut out = Vec::with_capacity(n);
            let mut bad = Vec::new();
            let mut failure = None;
            for i in 0..n {
                let mut q = field.averages[i].axpy(-ratio, &(faces[i + 1] - faces[i]));
                if model.has_source() {
                    q = q.axpy(dt, &self.source_average(model, field, i, dt));
                }
                if !q.is_finite() {
                    return Err(Error::BlowUp { cell: i, time: field.t });
                }
                if let Err(e) = model.check_admissible(&q) {
                    bad.push(i as i64);
                    failure.get_or_insert_with(|| locate(e, i as i64, field.t));
                }
                out.push(q);
            }
            let Some(failure) = failure else {
                return Ok(StepOutcome {
                    averages: out,
                    lowered: lowered.iter().filter(|&&l| l).count(),
                });
            };
            // Lower the troubled cells and their neighbours, then redo the
            // fluxes that changed.
            let mut changed = Vec::new();
            for &i in &bad {
                for cell in i - 1..=i + 1 {
                    if has(cell) && !lowered[index(cell)] {
                        lowered[index(cell)] = true;
                        traces[index(cell)] = constant_traces(padded[(cell + g as i64) as usize], nodes);
                        changed.push(cell);
                    }
                }
            }
            if changed.is_empty() {
                return Err(failure);
            }
            pending = changed.iter().flat_map(|&c| [c, c + 1]).filter(|&j| (0..=n as i64).contains(&j)).collect();
            pending.sort_unstable();
            pending.dedup();
        }
    }

    /// Space-time average of the source over cell `i` and the step.
    fn source_average(&self, model: &dyn SystemModel, field: &CellField, i: usize, dt: f64) -> StateVec {
        let r = &self.source_rule;
        let xl = field.cell_left(i as i64);
        let mut acc = StateVec::zeros(model.dim());
        for (tau, wt) in r.nodes.iter().zip(&r.weights) {
            for (xi, wx) in r.nodes.iter().zip(&r.weights) {
                let s = crate::models::source_eval(model, xl + xi * field.dx, field.t + tau * dt);
                acc = acc.axpy(wt * wx, &s);
            }
        }
        acc
    }
}

/// Averages after a step and the number of cells that fell back to first
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub averages: Vec<StateVec>,
    pub lowered: usize,
}

fn constant_traces(q: StateVec, nodes: usize) -> (FaceTimePoly, FaceTimePoly) {
    (FaceTimePoly::constant(q, nodes, Side::Left), FaceTimePoly::constant(q, nodes, Side::Right))
}

fn locate(e: Error, cell: i64, time: f64) -> Error {
    match e {
        Error::Domain { reason, state } => Error::Domain {
            reason: format!("{reason} (cell {cell}, t = {time:.6e})"),
            state,
        },
        other => other,
    }
}
