//! Local space-time predictor: evolves a cell's reconstruction over one time
//! step and returns the time traces at both cell faces.

use super::{FaceTimePoly, MAX_NODES};
use crate::error::Result;
use crate::models::{Side, SystemModel};
use crate::quadrature::{lagrange_derivative_matrix, lagrange_integration_matrix, lagrange_weights, GaussLegendre};
use crate::state::{Mat, StateVec};
use crate::weno::ReconPoly;

/// Predictor for one order `M`. Constant-coefficient homogeneous systems use
/// the Cauchy-Kowalewsky series directly; everything else runs a Picard
/// iteration on an `M × M` Gauss-Legendre space-time collocation grid, which
/// gains one order per sweep and is swept `M` times.
#[derive(Debug, Clone)]
pub struct Predictor {
    order: usize,
    time: GaussLegendre,
    space: GaussLegendre,
    /// `diff[a][e] = l_e'(ξ_a)`.
    diff: Vec<Vec<f64>>,
    /// `integ[b][c] = ∫_0^{τ_b} l_c`.
    integ: Vec<Vec<f64>>,
    left_trace: Vec<f64>,
    right_trace: Vec<f64>,
}

/// Cell geometry and time level the predictor runs on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSlab {
    pub x_left: f64,
    pub dx: f64,
    pub t: f64,
    pub dt: f64,
}

impl Predictor {
    pub fn new(order: usize) -> Self {
        assert!((1..=MAX_NODES).contains(&order));
        let time = GaussLegendre::new(order);
        let space = GaussLegendre::new(order);
        Self {
            order,
            diff: lagrange_derivative_matrix(&space.nodes),
            integ: lagrange_integration_matrix(&time.nodes),
            left_trace: lagrange_weights(&space.nodes, 0.0),
            right_trace: lagrange_weights(&space.nodes, 1.0),
            time,
            space,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Gauss-Legendre rule in scaled time on which traces are sampled.
    pub fn time_rule(&self) -> &GaussLegendre {
        &self.time
    }

    /// Traces `(q(0, τ), q(1, τ))` at the left and right faces of the cell.
    pub fn predict(
        &self,
        model: &dyn SystemModel,
        poly: &ReconPoly,
        slab: CellSlab,
    ) -> Result<(FaceTimePoly, FaceTimePoly)> {
        match model.constant_jacobian() {
            Some(a) if !model.has_source() => Ok(self.cauchy_kowalewsky(&a, poly, slab)),
            _ => self.picard(model, poly, slab),
        }
    }

    fn cauchy_kowalewsky(&self, a: &Mat, poly: &ReconPoly, slab: CellSlab) -> (FaceTimePoly, FaceTimePoly) {
        let m = self.order;
        let dim = poly.dim();
        // Spatial derivative k at each face, mapped through (−A)^k / Δx^k.
        let minus_a = a.scale(-1.0);
        let mut power = Mat::identity(dim);
        let mut left_terms = [StateVec::zeros(dim); MAX_NODES];
        let mut right_terms = [StateVec::zeros(dim); MAX_NODES];
        for k in 0..m {
            let scale = 1.0 / slab.dx.powi(k as i32);
            left_terms[k] = power.mul_vec(&(poly.derivative(k, 0.0) * scale));
            right_terms[k] = power.mul_vec(&(poly.derivative(k, 1.0) * scale));
            power = power.mul_mat(&minus_a);
        }
        let eval = |terms: &[StateVec; MAX_NODES], side: Side| {
            let mut values = [StateVec::zeros(dim); MAX_NODES];
            for (b, &tau) in self.time.nodes.iter().enumerate() {
                let s = tau * slab.dt;
                let mut acc = StateVec::zeros(dim);
                let mut fact = 1.0;
                for (k, term) in terms.iter().enumerate().take(m) {
                    if k > 0 {
                        fact *= s / k as f64;
                    }
                    acc = acc.axpy(fact, term);
                }
                values[b] = acc;
            }
            FaceTimePoly::from_nodal(&values[..m], side)
        };
        (eval(&left_terms, Side::Left), eval(&right_terms, Side::Right))
    }

    fn picard(&self, model: &dyn SystemModel, poly: &ReconPoly, slab: CellSlab) -> Result<(FaceTimePoly, FaceTimePoly)> {
        let m = self.order;
        let dim = poly.dim();
        let zero = StateVec::zeros(dim);
        let mut initial = [zero; MAX_NODES];
        for (a, &xi) in self.space.nodes.iter().enumerate() {
            initial[a] = poly.eval(xi);
        }
        // q[b][a]: state at time node b, space node a.
        let mut q = [initial; MAX_NODES];
        let mut src = [[zero; MAX_NODES]; MAX_NODES];
        if model.has_source() {
            for (b, &tau) in self.time.nodes.iter().enumerate() {
                for (a, &xi) in self.space.nodes.iter().enumerate() {
                    src[b][a] = model.source(slab.x_left + xi * slab.dx, slab.t + tau * slab.dt).unwrap_or(zero);
                }
            }
        }
        let ratio = slab.dt / slab.dx;
        for _ in 0..m {
            let mut rhs = [[zero; MAX_NODES]; MAX_NODES];
            for c in 0..m {
                let mut flux = [zero; MAX_NODES];
                for e in 0..m {
                    model.check_admissible(&q[c][e])?;
                    flux[e] = model.flux(&q[c][e]);
                }
                for a in 0..m {
                    let mut dfdxi = zero;
                    for e in 0..m {
                        dfdxi = dfdxi.axpy(self.diff[a][e], &flux[e]);
                    }
                    rhs[c][a] = (src[c][a] * slab.dt).axpy(-ratio, &dfdxi);
                }
            }
            for b in 0..m {
                for a in 0..m {
                    let mut acc = initial[a];
                    for c in 0..m {
                        acc = acc.axpy(self.integ[b][c], &rhs[c][a]);
                    }
                    q[b][a] = acc;
                }
            }
        }
        let mut left = [zero; MAX_NODES];
        let mut right = [zero; MAX_NODES];
        for b in 0..m {
            for a in 0..m {
                left[b] = left[b].axpy(self.left_trace[a], &q[b][a]);
                right[b] = right[b].axpy(self.right_trace[a], &q[b][a]);
            }
        }
        Ok((
            FaceTimePoly::from_nodal(&left[..m], Side::Left),
            FaceTimePoly::from_nodal(&right[..m], Side::Right),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CaseId, CaseParams, Euler, LinearAdvection, LinearSystem, TestCase};
    use crate::weno::build_candidate;

    fn slab(dt: f64) -> CellSlab {
        CellSlab {
            x_left: 0.0,
            dx: 0.1,
            t: 0.0,
            dt,
        }
    }

    #[test]
    fn constant_data_gives_constant_traces() {
        let p = Predictor::new(3);
        let q = Euler::new(1.4).conserved(&StateVec::from_slice(&[1.0, 0.5, 2.0]));
        let poly = ReconPoly::constant(q, 3);
        let (l, r) = p.predict(&Euler::new(1.4), &poly, slab(0.01)).unwrap();
        for tau in [0.0, 0.4, 1.0] {
            assert!((l.eval(tau) - q).norm_inf() < 1e-13);
            assert!((r.eval(tau) - q).norm_inf() < 1e-13);
        }
    }

    #[test]
    fn advection_linear_profile_by_hand() {
        // Face value p0 = 1.5 at ξ = 1 and slope 1 per unit ξ, i.e. 10 per unit x.
        let poly = ReconPoly::from_coeffs(&[StateVec::scalar(1.0), StateVec::scalar(0.5)]);
        let p = Predictor::new(2);
        let dt = 0.02;
        let (_, r) = p.predict(&LinearAdvection::new(1.0), &poly, slab(dt)).unwrap();
        for tau in [0.0, 0.3, 1.0] {
            assert!((r.eval(tau)[0] - (1.5 - 10.0 * dt * tau)).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomial_advection_data() {
        // q(x, 0) = x² on a cell of width 0.1: the trace q(x_R − λt) is a
        // quadratic in time and CK at M = 3 reproduces it.
        let dx = 0.1;
        let avgs: Vec<StateVec> = [-2, -1, 0]
            .iter()
            .map(|&d| {
                let (a, b) = (d as f64 * dx, (d + 1) as f64 * dx);
                StateVec::scalar((b.powi(3) - a.powi(3)) / (3.0 * dx))
            })
            .collect();
        let poly = build_candidate(&avgs, &[-2, -1, 0], 3).unwrap();
        let p = Predictor::new(3);
        let (_, r) = p.predict(&LinearAdvection::new(1.0), &poly, slab(0.05)).unwrap();
        for tau in [0.0, 0.5, 1.0] {
            let x = dx - 0.05 * tau;
            assert!((r.eval(tau)[0] - x * x).abs() < 1e-13);
        }
    }

    fn system_trace_error(order: usize, dt: f64) -> f64 {
        let case = TestCase::new(CaseId::LinearSystem, CaseParams::default());
        let dx = 2.0 * dt;
        let offsets: Vec<i32> = (-(order as i32 - 1)..=0).collect();
        let x0 = 0.3;
        let rule = GaussLegendre::new(6);
        let avgs: Vec<StateVec> = offsets
            .iter()
            .map(|&d| {
                let a = x0 + d as f64 * dx;
                rule.average(a, a + dx, |x| case.exact(x, 0.0).unwrap())
            })
            .collect();
        let poly = build_candidate(&avgs, &offsets, order).unwrap();
        let s = CellSlab { x_left: x0, dx, t: 0.0, dt };
        let (_, r) = Predictor::new(order).predict(&LinearSystem, &poly, s).unwrap();
        (0..=10)
            .map(|j| {
                let tau = j as f64 / 10.0;
                (r.eval(tau) - case.exact(x0 + dx, tau * dt).unwrap()).norm_inf()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn linear_system_trace_converges() {
        for order in 2..=5 {
            let e1 = system_trace_error(order, 0.01);
            let e2 = system_trace_error(order, 0.005);
            let rate = (e1 / e2).log2();
            assert!(rate >= order as f64 - 0.5, "order {order}: rate {rate}");
        }
    }

    fn euler_trace_error(order: usize, dx: f64) -> f64 {
        let case = TestCase::new(CaseId::EulerSmooth, CaseParams::default());
        let model = case.model();
        let dt = 0.3 * dx;
        let x0 = 0.2;
        let offsets: Vec<i32> = (-(order as i32 - 1)..=0).collect();
        let rule = GaussLegendre::new(6);
        let avgs: Vec<StateVec> = offsets
            .iter()
            .map(|&d| {
                let a = x0 + d as f64 * dx;
                rule.average(a, a + dx, |x| case.exact(x, 0.0).unwrap())
            })
            .collect();
        let poly = build_candidate(&avgs, &offsets, order).unwrap();
        let s = CellSlab { x_left: x0, dx, t: 0.0, dt };
        let (_, r) = Predictor::new(order).predict(model, &poly, s).unwrap();
        (0..=10)
            .map(|j| {
                let tau = j as f64 / 10.0;
                (r.eval(tau) - case.exact(x0 + dx, tau * dt).unwrap()).norm_inf()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn picard_predictor_reaches_design_order() {
        for order in 2..=5 {
            let e1 = euler_trace_error(order, 0.02);
            let e2 = euler_trace_error(order, 0.01);
            let rate = (e1 / e2).log2();
            assert!(rate >= order as f64 - 0.5, "order {order}: rate {rate}");
        }
    }
}
