use super::{Eigensystem, SystemModel};
use crate::error::Result;
use crate::state::{Mat, StateVec};

/// The coupled pair `F(Q) = (q1 − q2, 2 q2)` with speeds 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearSystem;

impl SystemModel for LinearSystem {
    fn name(&self) -> &'static str {
        "linear-system"
    }

    fn dim(&self) -> usize {
        2
    }

    fn flux(&self, q: &StateVec) -> StateVec {
        StateVec::from_slice(&[q[0] - q[1], 2.0 * q[1]])
    }

    fn jacobian(&self, _q: &StateVec) -> Mat {
        Mat::from_rows(&[&[1.0, -1.0], &[0.0, 2.0]])
    }

    fn eigensystem(&self, _q: &StateVec) -> Result<Eigensystem> {
        Eigensystem::from_right_eigenpairs(&[
            (1.0, StateVec::from_slice(&[1.0, 0.0])),
            (2.0, StateVec::from_slice(&[1.0, -1.0])),
        ])
    }

    fn eigenvalues(&self, _q: &StateVec) -> Result<StateVec> {
        Ok(StateVec::from_slice(&[1.0, 2.0]))
    }

    fn spectral_radius(&self, _q: &StateVec) -> f64 {
        2.0
    }

    fn constant_jacobian(&self) -> Option<Mat> {
        Some(self.jacobian(&StateVec::zeros(2)))
    }

    fn analytic_inverse_flux(&self, u: &StateVec) -> Option<StateVec> {
        Some(StateVec::from_slice(&[u[0] + 0.5 * u[1], 0.5 * u[1]]))
    }
}
