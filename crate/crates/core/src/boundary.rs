//! Boundary-state functions `G(t)`: prescribed data completed with interior
//! history through a frozen characteristic decomposition.

use crate::error::{Error, Result};
use crate::models::{Euler, Side, SystemModel, ADMISSIBILITY_FLOOR};
use crate::quadrature::{lagrange_derivative_matrix, lagrange_weights};
use crate::state::StateVec;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// How a domain end is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// Every characteristic field comes from the prescribed data.
    Prescribed,
    /// Inflow fields prescribed, outflow fields from interior history.
    Auto,
    /// Reflecting wall built from the mirrored adjacent state.
    Wall,
    /// Inverse Lax-Wendroff ghost cells.
    Ilw,
    /// Wrap-around ghosts.
    Periodic,
    /// Polynomial extrapolation of the interior averages into the ghosts.
    Extrapolate,
}

impl BoundaryMode {
    pub const ALL: [BoundaryMode; 6] = [
        BoundaryMode::Prescribed,
        BoundaryMode::Auto,
        BoundaryMode::Wall,
        BoundaryMode::Ilw,
        BoundaryMode::Periodic,
        BoundaryMode::Extrapolate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Prescribed => "prescribed",
            BoundaryMode::Auto => "auto",
            BoundaryMode::Wall => "wall",
            BoundaryMode::Ilw => "ilw",
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Extrapolate => "extrapolate",
        }
    }

    /// Ghosts come from the reverse problem.
    pub fn uses_reverse(self) -> bool {
        matches!(self, BoundaryMode::Prescribed | BoundaryMode::Auto | BoundaryMode::Wall)
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundaryMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown boundary mode `{s}`")))
    }
}

type TimeFn = dyn Fn(f64) -> StateVec + Send + Sync;

/// `G(t)` for one side together with the mask of characteristic fields that
/// were prescribed.
#[derive(Clone)]
pub struct BoundaryFunction {
    pub side: Side,
    pub mask: Vec<bool>,
    values: Arc<TimeFn>,
}

impl BoundaryFunction {
    pub fn new(side: Side, mask: Vec<bool>, values: impl Fn(f64) -> StateVec + Send + Sync + 'static) -> Self {
        Self {
            side,
            mask,
            values: Arc::new(values),
        }
    }

    /// Fully prescribed data.
    pub fn prescribed(side: Side, dim: usize, values: impl Fn(f64) -> StateVec + Send + Sync + 'static) -> Self {
        Self::new(side, vec![true; dim], values)
    }

    pub fn constant(side: Side, q: StateVec) -> Self {
        Self::prescribed(side, q.len(), move |_| q)
    }

    pub fn eval(&self, t: f64) -> StateVec {
        (self.values)(t)
    }

    pub fn is_fully_prescribed(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("side", &self.side)
            .field("mask", &self.mask)
            .finish_non_exhaustive()
    }
}

/// Source of the unprescribed boundary components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HistoryKind {
    /// Linear interpolation of the adjacent average between two levels.
    Linear,
    /// Local high-order interpolation of recovered boundary point values.
    #[default]
    Trace,
}

impl HistoryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HistoryKind::Linear => "linear",
            HistoryKind::Trace => "trace",
        }
    }
}

impl fmt::Display for HistoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HistoryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(HistoryKind::Linear),
            "trace" => Ok(HistoryKind::Trace),
            other => Err(Error::Config(format!("unknown history `{other}` (expected linear or trace)"))),
        }
    }
}

/// Adjacent-cell averages at the last two time levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryBuffer {
    pub prev: StateVec,
    pub curr: StateVec,
    pub t_prev: f64,
    pub t_curr: f64,
}

/// Fictitious previous level `3 Q1 − 3 Q2 + Q3`, third-order in the cell index.
pub fn startup_seed(q1: &StateVec, q2: &StateVec, q3: &StateVec) -> StateVec {
    (*q1 * 3.0 - *q2 * 3.0) + *q3
}

impl HistoryBuffer {
    /// Buffer at `t0` whose previous level, one step `dt` earlier, is the
    /// startup extrapolation of the three cells nearest the boundary
    /// (`q1` adjacent).
    pub fn seeded(q1: StateVec, q2: StateVec, q3: StateVec, t0: f64, dt: f64) -> Self {
        Self {
            prev: startup_seed(&q1, &q2, &q3),
            curr: q1,
            t_prev: t0 - dt,
            t_curr: t0,
        }
    }

    pub fn dt(&self) -> f64 {
        self.t_curr - self.t_prev
    }

    /// Shifts in a new level after a completed step.
    pub fn advance(&mut self, q: StateVec, t: f64) {
        self.prev = self.curr;
        self.t_prev = self.t_curr;
        self.curr = q;
        self.t_curr = t;
    }

    pub fn eval(&self, t: f64) -> StateVec {
        history_interpolant(self, t)
    }
}

/// Linear interpolation, or extrapolation, of the buffer in time.
pub fn history_interpolant(buffer: &HistoryBuffer, t: f64) -> StateVec {
    let s = (t - buffer.t_prev) / buffer.dt();
    buffer.prev.axpy(s, &(buffer.curr - buffer.prev))
}

/// Interior data at the boundary as a function of time, plus the adjacent
/// average that freezes the characteristic decomposition.
pub trait History: Clone + Send + Sync + 'static {
    fn eval(&self, t: f64) -> StateVec;
    fn adjacent(&self) -> StateVec;
}

impl History for HistoryBuffer {
    fn eval(&self, t: f64) -> StateVec {
        history_interpolant(self, t)
    }

    fn adjacent(&self) -> StateVec {
        self.curr
    }
}

/// Weights `w` with `Σ w_i Q̄_i = q(x_b)` for every polynomial `q` of degree
/// below `cells`, where `Q̄_i` is the average over the `i`-th cell counted
/// from the boundary.
pub fn face_weights(cells: usize) -> Vec<f64> {
    // The point value is the derivative of the primitive, which is known at
    // the cell edges 0..=cells.
    let nodes: Vec<f64> = (0..=cells).map(|k| k as f64).collect();
    let d = lagrange_derivative_matrix(&nodes);
    (0..cells).map(|i| d[0][i + 1..].iter().sum()).collect()
}

/// Boundary point values recovered from the innermost averages.
pub fn face_value(innermost: &[StateVec], weights: &[f64]) -> StateVec {
    let mut acc = StateVec::zeros(innermost[0].len());
    for (q, w) in innermost.iter().zip(weights) {
        acc = acc.axpy(*w, q);
    }
    acc
}

/// Boundary point values at the most recent time levels, interpolated in
/// time with local Lagrange polynomials of degree `degree`. Before the
/// oldest level the oldest value is held; after the newest level the
/// newest polynomial is followed for one step and then held.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    degree: usize,
    capacity: usize,
    times: Vec<f64>,
    values: Vec<StateVec>,
    adjacent: StateVec,
}

impl BoundaryTrace {
    pub fn new(degree: usize, capacity: usize, t0: f64, face: StateVec, adjacent: StateVec) -> Self {
        Self {
            degree,
            capacity: capacity.max(degree + 1),
            times: vec![t0],
            values: vec![face],
            adjacent,
        }
    }

    pub fn levels(&self) -> usize {
        self.times.len()
    }

    pub fn push(&mut self, t: f64, face: StateVec, adjacent: StateVec) {
        if self.times.len() == self.capacity {
            self.times.remove(0);
            self.values.remove(0);
        }
        self.times.push(t);
        self.values.push(face);
        self.adjacent = adjacent;
    }

    fn window(&self, t: f64) -> usize {
        let k = (self.degree + 1).min(self.times.len());
        let nearest = self.times.partition_point(|&s| s < t);
        nearest.saturating_sub(k.div_ceil(2)).min(self.times.len() - k)
    }
}

impl History for BoundaryTrace {
    fn eval(&self, t: f64) -> StateVec {
        let n = self.times.len();
        let (first, last) = (self.times[0], self.times[n - 1]);
        if n == 1 || t <= first {
            return if t <= first { self.values[0] } else { self.values[n - 1] };
        }
        let horizon = last + (last - self.times[n - 2]);
        let t = t.min(horizon);
        let k = (self.degree + 1).min(n);
        let start = self.window(t);
        let w = lagrange_weights(&self.times[start..start + k], t);
        face_value(&self.values[start..start + k], &w)
    }

    fn adjacent(&self) -> StateVec {
        self.adjacent
    }
}

/// Characteristic inflow mask at the adjacent state: fields entering the
/// domain are prescribed.
pub fn characteristic_mask(model: &dyn SystemModel, side: Side, q_adj: &StateVec) -> Result<Vec<bool>> {
    let eig = model
        .eigensystem(q_adj)
        .map_err(|e| Error::Boundary(format!("{side} eigensystem failed: {e}")))?;
    Ok(eig
        .values
        .iter()
        .map(|&l| match side {
            Side::Left => l > 0.0,
            Side::Right => l < 0.0,
        })
        .collect())
}

/// Completes `prescribed` using the history buffer. `prescribed.mask` marks
/// the characteristic fields taken from the data; the rest come from the
/// history interpolant. `L` and `L⁻¹` are frozen at the latest adjacent
/// average.
pub fn complete_boundary_function<H: History>(
    model: &dyn SystemModel,
    prescribed: Option<&BoundaryFunction>,
    side: Side,
    mask: &[bool],
    buffer: &H,
) -> Result<BoundaryFunction> {
    if mask.len() != model.dim() {
        return Err(Error::Boundary(format!("{side} mask has {} entries, expected {}", mask.len(), model.dim())));
    }
    let any = mask.iter().any(|&m| m);
    let data = match (prescribed, any) {
        (Some(g), _) => Some(g.clone()),
        (None, false) => None,
        (None, true) => {
            return Err(Error::Boundary(format!("{side} boundary prescribes fields but has no data")));
        }
    };
    if mask.iter().all(|&m| m) {
        let g = data.expect("checked above");
        return Ok(BoundaryFunction {
            side,
            mask: mask.to_vec(),
            values: g.values,
        });
    }
    let history = buffer.clone();
    if !any {
        return Ok(BoundaryFunction::new(side, mask.to_vec(), move |t| history.eval(t)));
    }
    let eig = model
        .eigensystem(&buffer.adjacent())
        .map_err(|e| Error::Boundary(format!("{side} eigensystem at the adjacent state failed: {e}")))?;
    let g = data.expect("checked above");
    let mask_c = mask.to_vec();
    Ok(BoundaryFunction::new(side, mask.to_vec(), move |t| {
        let from_data = eig.left.mul_vec(&g.eval(t));
        let from_history = eig.left.mul_vec(&history.eval(t));
        let mut w = from_history;
        for (j, &m) in mask_c.iter().enumerate() {
            if m {
                w[j] = from_data[j];
            }
        }
        eig.right.mul_vec(&w)
    }))
}

/// Wall state from an interior primitive state `(ρ, u, p)`: velocity
/// negated, density and pressure clamped to the admissibility floor.
/// Returns the conserved state and whether clamping was needed.
pub fn wall_state(model: &Euler, w: &StateVec) -> (StateVec, bool) {
    let rho = w[0].max(ADMISSIBILITY_FLOOR);
    let p = w[2].max(ADMISSIBILITY_FLOOR);
    let clamped = rho != w[0] || p != w[2] || !w.is_finite();
    (model.conserved(&StateVec::from_slice(&[rho, -w[1], p])), clamped)
}

/// Solid-wall boundary function: primitive variables of the adjacent cell
/// interpolated in time, velocity mirrored. Clamp events are counted in
/// `clamps`.
pub fn solid_wall_adapter(model: Euler, buffer: &HistoryBuffer, side: Side, clamps: Arc<AtomicUsize>) -> BoundaryFunction {
    let (w_prev, w_curr) = (model.primitive(&buffer.prev), model.primitive(&buffer.curr));
    let primitive = HistoryBuffer {
        prev: w_prev,
        curr: w_curr,
        ..*buffer
    };
    BoundaryFunction::new(side, vec![false; 3], move |t| {
        let (q, clamped) = wall_state(&model, &primitive.eval(t));
        if clamped
            && clamps.fetch_add(1, Ordering::Relaxed) == 0 {
                log::warn!("{side} wall state clamped to the admissibility floor at t = {t:.6e}");
            }
        q
    })
}
