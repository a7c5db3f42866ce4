use super::{Eigensystem, SystemModel};
use crate::error::Result;
use crate::state::{Mat, StateVec};

/// `q_t + (a(x) q)_x = s(x, t)`, carried as the pair `Q = (q, a)` with a
/// stationary coefficient, so `F(Q) = (a q, 0)`.
///
/// The Jacobian has a zero eigenvalue everywhere and is never invertible;
/// the reverse problem uses the one-parameter family `R(U) = (u1 / k, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceDependentFlux {
    /// Coefficient value selected by the inverse flux.
    pub k: f64,
}

impl SpaceDependentFlux {
    pub fn new(k: f64) -> Self {
        Self { k }
    }

    /// Manufactured amplitude `q̂ = sin(x / (t + 1))`.
    pub fn q_hat(x: f64, t: f64) -> f64 {
        (x / (t + 1.0)).sin()
    }

    pub fn q_hat_t(x: f64, t: f64) -> f64 {
        let s = t + 1.0;
        -x / (s * s) * (x / s).cos()
    }

    pub fn q_hat_x(x: f64, t: f64) -> f64 {
        let s = t + 1.0;
        (x / s).cos() / s
    }

    /// Coefficient profile `â = exp(−50 (x − 1/2)²)`.
    pub fn a_hat(x: f64) -> f64 {
        (-50.0 * (x - 0.5).powi(2)).exp()
    }

    pub fn a_hat_x(x: f64) -> f64 {
        -100.0 * (x - 0.5) * Self::a_hat(x)
    }
}

impl SystemModel for SpaceDependentFlux {
    fn name(&self) -> &'static str {
        "space-dependent"
    }

    fn dim(&self) -> usize {
        2
    }

    fn flux(&self, q: &StateVec) -> StateVec {
        StateVec::from_slice(&[q[1] * q[0], 0.0])
    }

    fn jacobian(&self, q: &StateVec) -> Mat {
        Mat::from_rows(&[&[q[1], q[0]], &[0.0, 0.0]])
    }

    fn eigensystem(&self, q: &StateVec) -> Result<Eigensystem> {
        // Component order (0, a) so the tie at a = 0 keeps the stationary
        // family first.
        Eigensystem::from_right_eigenpairs(&[
            (0.0, StateVec::from_slice(&[q[0], -q[1]])),
            (q[1], StateVec::from_slice(&[1.0, 0.0])),
        ])
    }

    fn eigenvalues(&self, q: &StateVec) -> Result<StateVec> {
        Ok(StateVec::from_slice(&[0.0, q[1]]))
    }

    fn spectral_radius(&self, q: &StateVec) -> f64 {
        q[1].abs()
    }

    fn source(&self, x: f64, t: f64) -> Option<StateVec> {
        let s = Self::q_hat_t(x, t) + Self::a_hat_x(x) * Self::q_hat(x, t) + Self::a_hat(x) * Self::q_hat_x(x, t);
        Some(StateVec::from_slice(&[s, 0.0]))
    }

    fn has_source(&self) -> bool {
        true
    }

    fn analytic_inverse_flux(&self, u: &StateVec) -> Option<StateVec> {
        Some(StateVec::from_slice(&[u[0] / self.k, self.k]))
    }

    fn reverse_spectral_radius(&self, _q: &StateVec) -> Result<f64> {
        // ∂R/∂U = diag(1/k, 0).
        Ok(1.0 / self.k.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_values_at_domain_centre() {
        let m = SpaceDependentFlux::new(1.0);
        let s0 = m.source(0.5, 0.0).unwrap()[0];
        assert!((s0 - 0.5 * 0.5f64.cos()).abs() < 1e-15);
        assert!((s0 - 0.43879).abs() < 1e-5);
        let s1 = m.source(0.5, 1.0).unwrap()[0];
        assert!((s1 - 0.375 * 0.25f64.cos()).abs() < 1e-15);
        assert!((s1 - 0.36334).abs() < 1e-5);
    }

    #[test]
    fn inverse_selects_unit_coefficient() {
        let m = SpaceDependentFlux::new(1.0);
        let q = m.analytic_inverse_flux(&StateVec::from_slice(&[0.5, 0.0])).unwrap();
        assert_eq!(q.as_slice(), &[0.5, 1.0]);
    }

    #[test]
    fn eigenvalues_zero_then_coefficient() {
        let m = SpaceDependentFlux::new(1.0);
        let q = StateVec::from_slice(&[0.3, 0.7]);
        let e = m.eigensystem(&q).unwrap();
        assert_eq!(e.values.as_slice(), &[0.0, 0.7]);
        assert!(e.recompose().max_abs_diff(&m.jacobian(&q)) < 1e-14);
    }
}
