use super::{Eigensystem, SystemModel};
use crate::error::Result;
use crate::state::{Mat, StateVec};

/// Scalar transport `q_t + λ q_x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearAdvection {
    pub lambda: f64,
}

impl LinearAdvection {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }
}

impl SystemModel for LinearAdvection {
    fn name(&self) -> &'static str {
        "linear-advection"
    }

    fn dim(&self) -> usize {
        1
    }

    fn flux(&self, q: &StateVec) -> StateVec {
        *q * self.lambda
    }

    fn jacobian(&self, _q: &StateVec) -> Mat {
        Mat::from_rows(&[&[self.lambda]])
    }

    fn eigensystem(&self, _q: &StateVec) -> Result<Eigensystem> {
        Ok(Eigensystem {
            values: StateVec::scalar(self.lambda),
            left: Mat::identity(1),
            right: Mat::identity(1),
        })
    }

    fn eigenvalues(&self, _q: &StateVec) -> Result<StateVec> {
        Ok(StateVec::scalar(self.lambda))
    }

    fn spectral_radius(&self, _q: &StateVec) -> f64 {
        self.lambda.abs()
    }

    fn constant_jacobian(&self) -> Option<Mat> {
        Some(self.jacobian(&StateVec::zeros(1)))
    }

    fn analytic_inverse_flux(&self, u: &StateVec) -> Option<StateVec> {
        (self.lambda != 0.0).then(|| *u * (1.0 / self.lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::flux_eval;

    #[test]
    fn flux_scales_by_speed() {
        let m = LinearAdvection::new(1.0);
        assert_eq!(flux_eval(&m, &StateVec::scalar(2.0)).unwrap()[0], 2.0);
    }

    #[test]
    fn scalar_eigensystem() {
        let e = LinearAdvection::new(1.0).eigensystem(&StateVec::scalar(0.3)).unwrap();
        assert_eq!(e.values[0], 1.0);
        assert_eq!(e.left, Mat::identity(1));
    }

    #[test]
    fn inverse_divides_by_speed() {
        let m = LinearAdvection::new(2.0);
        assert_eq!(m.analytic_inverse_flux(&StateVec::scalar(3.0)).unwrap()[0], 1.5);
    }
}
