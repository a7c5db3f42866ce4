use super::{Euler, LinearAdvection, LinearSystem, Side, SpaceDependentFlux, SystemModel};
use crate::boundary::BoundaryMode;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::reverse::ReverseConfig;
use crate::state::StateVec;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

const TWO_PI: f64 = 2.0 * PI;

/// The bundled experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    LinearAdvection,
    LinearSystem,
    SpaceDependent,
    EulerSmooth,
    Blast,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [
        CaseId::LinearAdvection,
        CaseId::LinearSystem,
        CaseId::SpaceDependent,
        CaseId::EulerSmooth,
        CaseId::Blast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::LinearAdvection => "linear-advection",
            CaseId::LinearSystem => "linear-system",
            CaseId::SpaceDependent => "space-dependent",
            CaseId::EulerSmooth => "euler-smooth",
            CaseId::Blast => "blast",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = CaseId::ALL.iter().map(|c| c.as_str()).collect();
                Error::Config(format!("unknown case `{s}` (expected one of {})", known.join(", ")))
            })
    }
}

/// Physical parameters shared by the cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    /// Advection speed.
    pub lambda: f64,
    /// Ratio of specific heats.
    pub gamma: f64,
    /// Coefficient selected by the space-dependent inverse flux.
    pub k: f64,
}

impl Default for CaseParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            gamma: 1.4,
            k: 1.0,
        }
    }
}

/// A model together with its domain, initial data, exact solution and the
/// boundary data that goes with it.
#[derive(Debug, Clone)]
pub struct TestCase {
    pub id: CaseId,
    pub params: CaseParams,
    model: Arc<dyn SystemModel>,
}

impl TestCase {
    pub fn new(id: CaseId, params: CaseParams) -> Self {
        let model: Arc<dyn SystemModel> = match id {
            CaseId::LinearAdvection => Arc::new(LinearAdvection::new(params.lambda)),
            CaseId::LinearSystem => Arc::new(LinearSystem),
            CaseId::SpaceDependent => Arc::new(SpaceDependentFlux::new(params.k)),
            CaseId::EulerSmooth | CaseId::Blast => Arc::new(Euler::new(params.gamma)),
        };
        Self { id, params, model }
    }

    pub fn model(&self) -> &dyn SystemModel {
        self.model.as_ref()
    }

    pub fn shared_model(&self) -> Arc<dyn SystemModel> {
        Arc::clone(&self.model)
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn boundary_x(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.domain().0,
            Side::Right => self.domain().1,
        }
    }

    pub fn default_t_out(&self) -> f64 {
        match self.id {
            CaseId::LinearAdvection => 4.0,
            CaseId::Blast => 0.038,
            _ => 1.0,
        }
    }

    /// Boundary modes used by the reference experiments.
    pub fn default_modes(&self) -> (BoundaryMode, BoundaryMode) {
        match self.id {
            CaseId::LinearAdvection => (BoundaryMode::Prescribed, BoundaryMode::Auto),
            CaseId::Blast => (BoundaryMode::Wall, BoundaryMode::Wall),
            _ => (BoundaryMode::Prescribed, BoundaryMode::Prescribed),
        }
    }

    /// Reverse-solver parameters used by the reference experiments.
    pub fn default_reverse(&self) -> ReverseConfig {
        match self.id {
            CaseId::LinearAdvection => ReverseConfig::new(20, 10, 0.7),
            CaseId::LinearSystem => ReverseConfig::new(50, 10, 2.0),
            CaseId::SpaceDependent => ReverseConfig::new(3, 3, 2.0),
            CaseId::EulerSmooth => ReverseConfig::new(3, 3, 1.5),
            // Near-stagnant flow at the walls makes the reverse signal speed
            // unbounded; past this cap the wall falls back to mirrored cells.
            CaseId::Blast => ReverseConfig {
                n_cap: 256,
                ..ReverseConfig::new(3, 3, 1.5)
            },
        }
    }

    pub fn has_exact(&self) -> bool {
        self.id != CaseId::Blast
    }

    /// Point value of the initial data.
    pub fn initial(&self, x: f64) -> StateVec {
        match self.id {
            CaseId::Blast => {
                let p = if x < 0.1 {
                    1000.0
                } else if x < 0.9 {
                    0.01
                } else {
                    100.0
                };
                self.euler().conserved(&StateVec::from_slice(&[1.0, 0.0, p]))
            }
            _ => self.exact_unchecked(x, 0.0),
        }
    }

    /// Cell averages of the initial data by 5-point Gauss quadrature.
    pub fn initial_averages(&self, cells: usize) -> Vec<StateVec> {
        let (a, b) = self.domain();
        let dx = (b - a) / cells as f64;
        let rule = GaussLegendre::new(5);
        (0..cells)
            .map(|i| {
                let xl = a + i as f64 * dx;
                rule.average(xl, xl + dx, |x| self.initial(x))
            })
            .collect()
    }

    pub fn exact(&self, x: f64, t: f64) -> Result<StateVec> {
        if !self.has_exact() {
            return Err(Error::Unsupported(format!("case `{}` has no closed-form solution", self.id)));
        }
        Ok(self.exact_unchecked(x, t))
    }

    fn exact_unchecked(&self, x: f64, t: f64) -> StateVec {
        match self.id {
            CaseId::LinearAdvection => StateVec::scalar((TWO_PI * (x - self.params.lambda * t)).sin()),
            CaseId::LinearSystem => {
                let a = TWO_PI * (x - t);
                let b = TWO_PI * (x - 2.0 * t);
                StateVec::from_slice(&[a.sin() + a.cos() - b.cos(), b.cos()])
            }
            CaseId::SpaceDependent => StateVec::from_slice(&[
                SpaceDependentFlux::q_hat(x, t),
                SpaceDependentFlux::a_hat(x),
            ]),
            CaseId::EulerSmooth => {
                let rho = 1.0 + 0.2 * (TWO_PI * (x - t)).sin();
                self.euler().conserved(&StateVec::from_slice(&[rho, 1.0, 2.0]))
            }
            CaseId::Blast => unreachable!("blast has no exact solution"),
        }
    }

    /// Prescribed boundary data `G(t)` for the side (the exact solution at the
    /// boundary point).
    pub fn boundary_value(&self, side: Side, t: f64) -> Result<StateVec> {
        self.exact(self.boundary_x(side), t)
    }

    /// `d^l/dt^l` of the exact solution at `(x, t)` for `l = 0..count`.
    pub fn exact_time_derivatives(&self, x: f64, t: f64, count: usize) -> Result<Vec<StateVec>> {
        if !self.has_exact() {
            return Err(Error::Unsupported(format!("case `{}` has no closed-form solution", self.id)));
        }
        // d^l/dt^l sin(ω(x − c t) + φ) = (−ωc)^l sin(ω(x − c t) + φ + lπ/2)
        let wave = |c: f64, phase: f64, l: usize| {
            (-TWO_PI * c).powi(l as i32) * (TWO_PI * (x - c * t) + phase + l as f64 * FRAC_PI_2).sin()
        };
        (0..count)
            .map(|l| match self.id {
                CaseId::LinearAdvection => Ok(StateVec::scalar(wave(self.params.lambda, 0.0, l))),
                CaseId::LinearSystem => Ok(StateVec::from_slice(&[
                    wave(1.0, 0.0, l) + wave(1.0, FRAC_PI_2, l) - wave(2.0, FRAC_PI_2, l),
                    wave(2.0, FRAC_PI_2, l),
                ])),
                CaseId::EulerSmooth => {
                    if l == 0 {
                        return Ok(self.exact_unchecked(x, t));
                    }
                    let d = 0.2 * wave(1.0, 0.0, l);
                    Ok(StateVec::from_slice(&[d, d, 0.5 * d]))
                }
                CaseId::SpaceDependent => match l {
                    0 => Ok(self.exact_unchecked(x, t)),
                    1 => Ok(StateVec::from_slice(&[SpaceDependentFlux::q_hat_t(x, t), 0.0])),
                    _ => Err(Error::Unsupported(
                        "higher time derivatives of the space-dependent case are not tabulated".into(),
                    )),
                },
                CaseId::Blast => unreachable!(),
            })
            .collect()
    }

    fn euler(&self) -> Euler {
        Euler::new(self.params.gamma)
    }
}
