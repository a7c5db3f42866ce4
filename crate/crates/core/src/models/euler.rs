use super::{Eigensystem, SystemModel};
use crate::error::{Error, Result};
use crate::state::{Mat, StateVec};

/// Smallest density and pressure accepted as physical.
pub const ADMISSIBILITY_FLOOR: f64 = 1e-12;

/// Compressible Euler equations for a γ-law gas, `Q = (ρ, ρu, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    pub gamma: f64,
}

impl Euler {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    pub fn pressure(&self, q: &StateVec) -> f64 {
        (self.gamma - 1.0) * (q[2] - 0.5 * q[1] * q[1] / q[0])
    }

    /// `(ρ, u, p)` from conserved variables.
    pub fn primitive(&self, q: &StateVec) -> StateVec {
        StateVec::from_slice(&[q[0], q[1] / q[0], self.pressure(q)])
    }

    /// Conserved variables from `(ρ, u, p)`.
    pub fn conserved(&self, w: &StateVec) -> StateVec {
        let (rho, u, p) = (w[0], w[1], w[2]);
        StateVec::from_slice(&[rho, rho * u, p / (self.gamma - 1.0) + 0.5 * rho * u * u])
    }

    pub fn sound_speed(&self, q: &StateVec) -> f64 {
        (self.gamma * self.pressure(q) / q[0]).sqrt()
    }

    /// `ρu² > γp`.
    pub fn is_supersonic(&self, q: &StateVec) -> bool {
        q[1] * q[1] / q[0] > self.gamma * self.pressure(q)
    }
}

impl SystemModel for Euler {
    fn name(&self) -> &'static str {
        "euler"
    }

    fn dim(&self) -> usize {
        3
    }

    fn flux(&self, q: &StateVec) -> StateVec {
        let u = q[1] / q[0];
        let p = self.pressure(q);
        StateVec::from_slice(&[q[1], q[1] * u + p, u * (q[2] + p)])
    }

    fn jacobian(&self, q: &StateVec) -> Mat {
        let g = self.gamma;
        let u = q[1] / q[0];
        let e = q[2] / q[0];
        Mat::from_rows(&[
            &[0.0, 1.0, 0.0],
            &[0.5 * (g - 3.0) * u * u, (3.0 - g) * u, g - 1.0],
            &[
                (g - 1.0) * u * u * u - g * e * u,
                g * e - 1.5 * (g - 1.0) * u * u,
                g * u,
            ],
        ])
    }

    fn eigensystem(&self, q: &StateVec) -> Result<Eigensystem> {
        let u = q[1] / q[0];
        let p = self.pressure(q);
        let c = self.sound_speed(q);
        let h = (q[2] + p) / q[0];
        Eigensystem::from_right_eigenpairs(&[
            (u - c, StateVec::from_slice(&[1.0, u - c, h - u * c])),
            (u, StateVec::from_slice(&[1.0, u, 0.5 * u * u])),
            (u + c, StateVec::from_slice(&[1.0, u + c, h + u * c])),
        ])
    }

    fn eigenvalues(&self, q: &StateVec) -> Result<StateVec> {
        let u = q[1] / q[0];
        let c = self.sound_speed(q);
        Ok(StateVec::from_slice(&[u - c, u, u + c]))
    }

    fn check_admissible(&self, q: &StateVec) -> Result<()> {
        if q.len() != 3 || !q.is_finite() {
            return Err(Error::domain("non-finite or malformed Euler state", q));
        }
        if q[0] < ADMISSIBILITY_FLOOR {
            return Err(Error::domain("non-positive density", q));
        }
        if self.pressure(q) < ADMISSIBILITY_FLOOR {
            return Err(Error::domain("non-positive pressure", q));
        }
        Ok(())
    }

    fn spectral_radius(&self, q: &StateVec) -> f64 {
        (q[1] / q[0]).abs() + self.sound_speed(q)
    }

    fn analytic_inverse_flux(&self, u: &StateVec) -> Option<StateVec> {
        crate::inversion::euler_inverse_flux(u, self.gamma)
    }

    fn inverse_flux(&self, u: &StateVec, guess: &StateVec) -> Result<StateVec> {
        // The closed form always lands on the subsonic branch; a supersonic
        // warm start asks for the other preimage.
        let analytic = if self.is_supersonic(guess) {
            None
        } else {
            self.analytic_inverse_flux(u)
        };
        match analytic {
            Some(q) if self.check_admissible(&q).is_ok() => Ok(q),
            _ => crate::inversion::invert_flux(self, u, guess).map(|r| r.state),
        }
    }
}
