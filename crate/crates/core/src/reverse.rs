//! Exterior states from the reverse problem `∂_x U + ∂_t R(U) = 0`, marched
//! in space from the boundary with a second-order MUSCL-Hancock scheme on a
//! short local time grid.

use crate::boundary::BoundaryFunction;
use crate::error::{Error, Result};
use crate::models::{flux_eval, Side, SystemModel};
use crate::quadrature::GaussLegendre;
use crate::state::{Mat, StateVec};

/// Parameters of the local time grid and the space march.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverseConfig {
    /// Space-march steps to reach the target.
    pub n: usize,
    /// The grid has `2 M̄ − 1` cells.
    pub mbar: usize,
    /// Grid length as a multiple of the interior time step.
    pub l: f64,
    /// Upper bound for `n` when the reverse CFL guard refines the march.
    pub n_cap: usize,
}

impl ReverseConfig {
    pub const DEFAULT_N_CAP: usize = 1 << 14;

    pub fn new(n: usize, mbar: usize, l: f64) -> Self {
        Self {
            n,
            mbar,
            l,
            n_cap: Self::DEFAULT_N_CAP,
        }
    }

    pub fn cells(&self) -> usize {
        2 * self.mbar - 1
    }

    /// `η = M̄ / (N L)`.
    pub fn eta(&self) -> f64 {
        self.mbar as f64 / (self.n as f64 * self.l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Config("reverse march needs N ≥ 1".into()));
        }
        if self.mbar < 2 {
            return Err(Error::Config("reverse grid needs M̄ ≥ 2".into()));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::Config(format!("reverse window length L = {} must be positive", self.l)));
        }
        if self.n_cap < self.n {
            return Err(Error::Config("reverse N cap is below N".into()));
        }
        Ok(())
    }
}

/// Outcome of the `η ≤ c²` stability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCheck {
    pub eta: f64,
    pub c_squared: f64,
}

impl StabilityCheck {
    pub fn ok(&self) -> bool {
        self.eta <= self.c_squared
    }

    pub fn warning(&self) -> Option<String> {
        (!self.ok()).then(|| {
            format!(
                "reverse configuration may be unstable: eta = {:.4} exceeds c^2 = {:.4}",
                self.eta, self.c_squared
            )
        })
    }
}

/// Necessary stability condition for the reverse march given the interior
/// CFL number. Advisory only.
pub fn validate_config(cfg: &ReverseConfig, cfl: f64) -> StabilityCheck {
    StabilityCheck {
        eta: cfg.eta(),
        c_squared: cfl * cfl,
    }
}

/// `2 M̄ − 1` cells of width `δt = L Δt / (2 M̄ − 1)` centred on `t`, plus
/// `pad` cells of the same width on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeGrid {
    pub center: f64,
    pub dt: f64,
    pub mbar: usize,
    pub pad: usize,
    pub values: Vec<StateVec>,
}

impl LocalTimeGrid {
    pub fn new(center: f64, mbar: usize, l: f64, interior_dt: f64) -> Self {
        let k = 2 * mbar - 1;
        Self {
            center,
            dt: l * interior_dt / k as f64,
            mbar,
            pad: 0,
            values: Vec::with_capacity(k),
        }
    }

    pub fn with_padding(mut self, pad: usize) -> Self {
        self.pad = pad;
        self
    }

    pub fn cells(&self) -> usize {
        2 * (self.mbar + self.pad) - 1
    }

    /// Centre of cell `j`; cell `center_index()` is centred on `t`.
    pub fn cell_center(&self, j: usize) -> f64 {
        self.center + (j as f64 - self.center_index() as f64) * self.dt
    }

    pub fn extremes(&self) -> (f64, f64) {
        (
            self.cell_center(0) - 0.5 * self.dt,
            self.cell_center(self.cells() - 1) + 0.5 * self.dt,
        )
    }

    pub fn center_index(&self) -> usize {
        self.mbar - 1 + self.pad
    }

    /// Fills the grid with cell averages of `F(G(t))` (3-point Gauss).
    pub fn fill_from_boundary(&mut self, model: &dyn SystemModel, g: &BoundaryFunction) -> Result<()> {
        let rule = GaussLegendre::new(3);
        self.values.clear();
        for j in 0..self.cells() {
            let a = self.cell_center(j) - 0.5 * self.dt;
            let mut acc = StateVec::zeros(model.dim());
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                acc = acc.axpy(*w, &flux_eval(model, &g.eval(a + x * self.dt))?);
            }
            self.values.push(acc);
        }
        Ok(())
    }
}

/// Local cells a signal crosses per march step once the reverse Courant
/// number is at most one.
const STEP_REACH: usize = 1;

/// Padding that keeps the extreme closures of an `n`-step march outside the
/// characteristic domain of dependence of the centre cell.
pub fn required_padding(n: usize, mbar: usize) -> usize {
    (STEP_REACH * n + 1).saturating_sub(mbar - 1)
}

/// Componentwise MINMOD of two one-sided differences.
pub fn minmod_slope(dm: &StateVec, dp: &StateVec) -> StateVec {
    dm.zip_map(dp, |a, b| {
        if a * b <= 0.0 {
            0.0
        } else if a.abs() <= b.abs() {
            a
        } else {
            b
        }
    })
}

/// Inverse flux with warm starts, one guess per local time cell. Models
/// with a constant invertible Jacobian use `R(U) = A⁻¹ U` directly.
struct Inverter<'a> {
    model: &'a dyn SystemModel,
    guesses: Vec<StateVec>,
    linear: Option<(Mat, f64)>,
}

impl<'a> Inverter<'a> {
    fn new(model: &'a dyn SystemModel, guess: &StateVec, cells: usize) -> Self {
        let linear = model.constant_jacobian().and_then(|a| {
            let inv = a.inverse()?;
            let mu = model.reverse_spectral_radius(guess).ok()?;
            Some((inv, mu))
        });
        Self {
            model,
            guesses: vec![*guess; cells],
            linear,
        }
    }

    fn invert(&mut self, j: usize, u: &StateVec) -> Result<StateVec> {
        if let Some((inv, _)) = &self.linear {
            return Ok(inv.mul_vec(u));
        }
        let q = self.model.inverse_flux(u, &self.guesses[j])?;
        if !q.is_finite() {
            return Err(Error::domain("inverse flux produced a non-finite state", u));
        }
        self.guesses[j] = q;
        Ok(q)
    }

    /// `R(U)` and the reverse signal speed at `U`.
    fn eval(&mut self, j: usize, u: &StateVec) -> Result<(StateVec, f64)> {
        if let Some((inv, mu)) = &self.linear {
            return Ok((inv.mul_vec(u), *mu));
        }
        let (q, mu) = self.model.reverse_state(u, &self.guesses[j])?;
        if !q.is_finite() {
            return Err(Error::domain("inverse flux produced a non-finite state", u));
        }
        self.guesses[j] = q;
        Ok((q, mu))
    }
}

fn rusanov_r(sigma: f64, a: (StateVec, f64), b: (StateVec, f64), ua: &StateVec, ub: &StateVec) -> StateVec {
    let mu = a.1.max(b.1);
    (a.0 + b.0) * (0.5 * sigma) - (*ub - *ua) * (0.5 * mu)
}

/// One MUSCL-Hancock step `δx` of the space march. `sigma` is the march
/// direction (+1 away from a right boundary, −1 away from a left one).
fn march_step_inner(
    inv: &mut Inverter<'_>,
    u: &[StateVec],
    dx: f64,
    dt: f64,
    sigma: f64,
) -> Result<Vec<StateVec>> {
    let k = u.len();
    let low = (u[0] * 3.0 - u[1] * 3.0) + u[2];
    let high = (u[k - 1] * 3.0 - u[k - 2] * 3.0) + u[k - 3];
    let at = |j: isize| -> StateVec {
        if j < 0 {
            low
        } else if j as usize >= k {
            high
        } else {
            u[j as usize]
        }
    };
    let half = 0.5 * dx / dt;
    // Evolved face extrapolations (early, late) in each cell.
    let mut faces = Vec::with_capacity(k);
    for j in 0..k {
        let c = at(j as isize);
        let slope = minmod_slope(&(c - at(j as isize - 1)), &(at(j as isize + 1) - c));
        let early = c - slope * 0.5;
        let late = c + slope * 0.5;
        let r_early = inv.invert(j, &early)?;
        let r_late = inv.invert(j, &late)?;
        let shift = (r_late - r_early) * (sigma * half);
        let (e, l) = (early - shift, late - shift);
        faces.push((e, inv.eval(j, &e)?, l, inv.eval(j, &l)?));
    }
    // flux[j] sits at the lower face of cell j, j = 0..=k.
    let mut flux = Vec::with_capacity(k + 1);
    let r_low = inv.eval(0, &low)?;
    flux.push(rusanov_r(sigma, r_low, inv.eval(0, &u[0])?, &low, &u[0]));
    for j in 1..k {
        let (_, _, ul, rl) = faces[j - 1];
        let (ue, re, _, _) = faces[j];
        flux.push(rusanov_r(sigma, rl, re, &ul, &ue));
    }
    let r_high = inv.eval(k - 1, &high)?;
    flux.push(rusanov_r(sigma, inv.eval(k - 1, &u[k - 1])?, r_high, &u[k - 1], &high));
    let ratio = dx / dt;
    let mut next = Vec::with_capacity(k);
    for j in 0..k {
        let v = u[j].axpy(-ratio, &(flux[j + 1] - flux[j]));
        if !v.is_finite() {
            return Err(Error::BlowUp { cell: j, time: f64::NAN });
        }
        next.push(v);
    }
    Ok(next)
}

/// One march step from a right boundary (`+x` direction) with the guess
/// used to start every inverse-flux evaluation.
pub fn march_step(
    model: &dyn SystemModel,
    grid: &[StateVec],
    dx: f64,
    dt: f64,
    side: Side,
    guess: &StateVec,
) -> Result<Vec<StateVec>> {
    if grid.len() < 3 {
        return Err(Error::Config("local time grid needs at least three cells".into()));
    }
    let mut inv = Inverter::new(model, guess, grid.len());
    march_step_inner(&mut inv, grid, dx, dt, side.outward())
}

/// Summary of one exterior evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchReport {
    /// March steps actually used.
    pub n: usize,
    /// Times the CFL guard raised `N`.
    pub refinements: u32,
    /// `μ̄ δx / δt` with the final step count.
    pub courant: f64,
}

/// Reverse-problem evaluator bound to one model and configuration.
#[derive(Debug, Clone, Copy)]
pub struct ReverseSolver<'a> {
    pub model: &'a dyn SystemModel,
    pub cfg: ReverseConfig,
}

impl<'a> ReverseSolver<'a> {
    pub fn new(model: &'a dyn SystemModel, cfg: ReverseConfig) -> Self {
        Self { model, cfg }
    }

    /// `Q(x, t)` outside the domain. `g` must be complete on the local grid
    /// around `t`; `guess` (usually the adjacent interior average) seeds the
    /// inverse flux.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate_exterior_state(
        &self,
        x: f64,
        t: f64,
        side: Side,
        boundary_x: f64,
        g: &BoundaryFunction,
        interior_dt: f64,
        guess: &StateVec,
    ) -> Result<(StateVec, MarchReport)> {
        let dist = (x - boundary_x) * side.outward();
        if dist <= 0.0 {
            return Err(Error::Config(format!("x = {x} is not outside the {side} boundary at {boundary_x}")));
        }
        let mut n = self.cfg.n;
        let mut refinements = 0;
        let (grid, mu_bar, mut inv) = loop {
            let mut grid = LocalTimeGrid::new(t, self.cfg.mbar, self.cfg.l, interior_dt)
                .with_padding(required_padding(n, self.cfg.mbar));
            grid.fill_from_boundary(self.model, g)?;
            let mut inv = Inverter::new(self.model, guess, grid.cells());
            let mut mu_bar = 0.0f64;
            for j in 0..grid.cells() {
                let (_, mu) = inv.eval(j, &grid.values[j])?;
                mu_bar = mu_bar.max(mu);
            }
            if mu_bar * dist / n as f64 <= grid.dt {
                break (grid, mu_bar, inv);
            }
            // Smallest count meeting the bound on this grid; the wider
            // padded grid of the next pass may raise it again.
            n = ((mu_bar * dist / grid.dt).ceil() as usize).max(n + 1);
            refinements += 1;
            if n > self.cfg.n_cap {
                return Err(Error::March(format!(
                    "reverse CFL {:.3e} cannot be met within N ≤ {} (mu = {mu_bar:.3e})",
                    mu_bar * dist / (self.cfg.n_cap as f64 * grid.dt),
                    self.cfg.n_cap
                )));
            }
        };
        let dx = dist / n as f64;
        let sigma = side.outward();
        let core = self.cfg.mbar - 1;
        let mut u = grid.values;
        for step in 0..n {
            u = march_step_inner(&mut inv, &u, dx, grid.dt, sigma).map_err(|e| match e {
                Error::BlowUp { cell, .. } => Error::March(format!(
                    "non-finite value in local cell {cell} at march step {step} (x = {:.6e}, t = {t:.6e})",
                    boundary_x + sigma * dx * (step + 1) as f64
                )),
                other => other,
            })?;
            // Cells beyond the reach of the remaining steps no longer matter.
            let keep = core.max(STEP_REACH * (n - step - 1) + 1);
            let half = u.len() / 2;
            if half > keep {
                let cut = half - keep;
                u.drain(..cut);
                u.truncate(u.len() - cut);
                inv.guesses.drain(..cut);
                inv.guesses.truncate(inv.guesses.len() - cut);
            }
        }
        let c = u.len() / 2;
        let q = inv.invert(c, &u[c])?;
        Ok((
            q,
            MarchReport {
                n,
                refinements,
                courant: mu_bar * dx / grid.dt,
            },
        ))
    }

    /// Averages of the first `count` ghost cells beyond `side` at time `t`,
    /// each from a 3-point Gauss rule over per-node exterior evaluations.
    /// Returns the ghosts ordered outward and the largest refinement used.
    #[allow(clippy::too_many_arguments)]
    pub fn ghost_cell_averages(
        &self,
        side: Side,
        count: usize,
        t: f64,
        boundary_x: f64,
        dx: f64,
        g: &BoundaryFunction,
        interior_dt: f64,
        guess: &StateVec,
    ) -> Result<(Vec<StateVec>, MarchReport)> {
        let rule = GaussLegendre::new(3);
        let sigma = side.outward();
        let mut ghosts = Vec::with_capacity(count);
        let mut worst = MarchReport {
            n: self.cfg.n,
            refinements: 0,
            courant: 0.0,
        };
        let mut warm = *guess;
        for j in 0..count {
            let mut acc = StateVec::zeros(self.model.dim());
            for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
                let x = boundary_x + sigma * (j as f64 + xi) * dx;
                let (q, rep) = self.evaluate_exterior_state(x, t, side, boundary_x, g, interior_dt, &warm)?;
                warm = q;
                if rep.refinements > worst.refinements || rep.courant > worst.courant {
                    worst = MarchReport {
                        n: rep.n.max(worst.n),
                        refinements: rep.refinements.max(worst.refinements),
                        courant: rep.courant.max(worst.courant),
                    };
                }
                acc = acc.axpy(*w, &q);
            }
            ghosts.push(acc);
        }
        Ok((ghosts, worst))
    }
}
