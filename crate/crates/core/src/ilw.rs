//! Inverse Lax-Wendroff ghost cells: a spatial Taylor series at the
//! boundary whose derivatives are recovered from time derivatives of the
//! prescribed data.

use crate::error::{Error, Result};
use crate::models::{Side, SystemModel};
use crate::quadrature::GaussLegendre;
use crate::state::{Mat, StateVec};

/// `g^{(l)}(t)` at the boundary point for `l = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDerivatives {
    pub values: Vec<StateVec>,
}

impl BoundaryDerivatives {
    pub fn new(values: Vec<StateVec>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("boundary derivatives need at least the value itself".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite boundary derivative", v));
        }
        Ok(Self { values })
    }
}

/// Spatial derivatives `∂_x^k Q = (−A⁻¹)^k g^{(k)}` for a constant Jacobian.
pub fn spatial_derivatives(a: &Mat, derivs: &BoundaryDerivatives, order: usize) -> Result<Vec<StateVec>> {
    if derivs.values.len() < order {
        return Err(Error::Config(format!(
            "{} boundary derivatives supplied, {order} needed",
            derivs.values.len()
        )));
    }
    let inv = a
        .inverse()
        .ok_or_else(|| Error::Unsupported("inverse Lax-Wendroff needs an invertible Jacobian".into()))?;
    let step = inv.scale(-1.0);
    let mut power = Mat::identity(a.size());
    let mut out = Vec::with_capacity(order);
    for k in 0..order {
        out.push(power.mul_vec(&derivs.values[k]));
        power = power.mul_mat(&step);
    }
    Ok(out)
}

fn taylor(dx_k: &[StateVec], offset: f64) -> StateVec {
    let mut acc = StateVec::zeros(dx_k[0].len());
    let mut coef = 1.0;
    for (k, d) in dx_k.iter().enumerate() {
        if k > 0 {
            coef *= offset / k as f64;
        }
        acc = acc.axpy(coef, d);
    }
    acc
}

/// Point values at signed offsets `x − x_b` from the boundary, using the
/// first `order` terms of the series.
pub fn ilw_ghost_states(a: &Mat, derivs: &BoundaryDerivatives, offsets: &[f64], order: usize) -> Result<Vec<StateVec>> {
    let d = spatial_derivatives(a, derivs, order)?;
    Ok(offsets.iter().map(|&o| taylor(&d, o)).collect())
}

/// First-order series for a nonlinear model: `∂_x Q = −A(g)⁻¹ ġ`.
pub fn ilw_ghost_states_nonlinear_first_order(
    model: &dyn SystemModel,
    g: &StateVec,
    g_dot: &StateVec,
    offsets: &[f64],
) -> Result<Vec<StateVec>> {
    model.check_admissible(g)?;
    let inv = model
        .jacobian(g)
        .inverse()
        .ok_or_else(|| Error::Unsupported("inverse Lax-Wendroff needs an invertible Jacobian at the boundary".into()))?;
    let dq = inv.mul_vec(g_dot) * -1.0;
    Ok(offsets.iter().map(|&o| g.axpy(o, &dq)).collect())
}

/// Ghost-cell averages (3-point Gauss) of the ILW extension beyond `side`,
/// ordered outward. Linear constant-coefficient models use `order` terms;
/// other models fall back to the first-order nonlinear series.
pub fn ilw_ghost_averages(
    model: &dyn SystemModel,
    derivs: &BoundaryDerivatives,
    side: Side,
    dx: f64,
    count: usize,
    order: usize,
) -> Result<Vec<StateVec>> {
    let rule = GaussLegendre::new(3);
    let sigma = side.outward();
    let offsets: Vec<f64> = (0..count)
        .flat_map(|j| rule.nodes.iter().map(move |xi| sigma * (j as f64 + xi) * dx))
        .collect();
    let points = match model.constant_jacobian() {
        Some(a) if !model.has_source() => ilw_ghost_states(&a, derivs, &offsets, order)?,
        _ => {
            if derivs.values.len() < 2 {
                return Err(Error::Config("first-order ILW needs the boundary time derivative".into()));
            }
            ilw_ghost_states_nonlinear_first_order(model, &derivs.values[0], &derivs.values[1], &offsets)?
        }
    };
    Ok(points
        .chunks(3)
        .map(|c| {
            let mut acc = StateVec::zeros(model.dim());
            for (q, w) in c.iter().zip(&rule.weights) {
                acc = acc.axpy(*w, q);
            }
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CaseId, CaseParams, Euler, LinearAdvection, LinearSystem, TestCase};
    use std::f64::consts::PI;

    #[test]
    fn constant_data_extends_constantly() {
        let g = StateVec::from_slice(&[0.3, -0.4]);
        let d = BoundaryDerivatives::new(vec![g, StateVec::zeros(2), StateVec::zeros(2)]).unwrap();
        let a = LinearSystem.constant_jacobian().unwrap();
        for v in ilw_ghost_states(&a, &d, &[-0.1, -0.25], 3).unwrap() {
            assert_eq!(v, g);
        }
    }

    #[test]
    fn advection_series_matches_taylor_remainder() {
        let case = TestCase::new(CaseId::LinearAdvection, CaseParams::default());
        let d = BoundaryDerivatives::new(case.exact_time_derivatives(0.0, 0.0, 3).unwrap()).unwrap();
        let a = LinearAdvection::new(1.0).constant_jacobian().unwrap();
        let dx = 1.0 / 32.0;
        let v = ilw_ghost_states(&a, &d, &[-dx], 3).unwrap()[0][0];
        let exact = (2.0 * PI * -dx).sin();
        assert!((v - exact).abs() <= (2.0 * PI * dx).powi(3) / 6.0);
    }

    #[test]
    fn linear_system_ghosts_converge() {
        let case = TestCase::new(CaseId::LinearSystem, CaseParams::default());
        let a = LinearSystem.constant_jacobian().unwrap();
        let err = |dx: f64| {
            let d = BoundaryDerivatives::new(case.exact_time_derivatives(1.0, 0.3, 4).unwrap()).unwrap();
            let v = ilw_ghost_states(&a, &d, &[dx], 4).unwrap()[0];
            (v - case.exact(1.0 + dx, 0.3).unwrap()).norm_inf()
        };
        let rate = (err(0.02) / err(0.01)).log2();
        assert!(rate >= 3.5, "rate {rate}");
    }

    #[test]
    fn polynomial_time_data_is_exact() {
        // q = (x − t)² under unit advection, so g = t², ġ = 2t, g̈ = 2 at x = 0.
        let t: f64 = 0.5;
        let d = BoundaryDerivatives::new(vec![
            StateVec::scalar(t * t),
            StateVec::scalar(2.0 * t),
            StateVec::scalar(2.0),
        ])
        .unwrap();
        let a = LinearAdvection::new(1.0).constant_jacobian().unwrap();
        for x in [-0.3, -0.05] {
            let v = ilw_ghost_states(&a, &d, &[x], 3).unwrap()[0][0];
            assert!((v - (x - t).powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn euler_first_derivative_from_time_data() {
        let case = TestCase::new(CaseId::EulerSmooth, CaseParams::default());
        let e = Euler::new(1.4);
        let d = case.exact_time_derivatives(0.0, 0.0, 2).unwrap();
        let h = 1e-3;
        let v = ilw_ghost_states_nonlinear_first_order(&e, &d[0], &d[1], &[h]).unwrap()[0];
        let drho = (v[0] - d[0][0]) / h;
        assert!((drho - 0.4 * PI).abs() < 1e-9);
    }

    #[test]
    fn steady_boundary_and_scalar_consistency() {
        let e = Euler::new(1.4);
        let g = e.conserved(&StateVec::from_slice(&[1.0, 0.5, 1.0]));
        let v = ilw_ghost_states_nonlinear_first_order(&e, &g, &StateVec::zeros(3), &[-0.1]).unwrap();
        assert_eq!(v[0], g);
        let adv = LinearAdvection::new(2.0);
        let d = BoundaryDerivatives::new(vec![StateVec::scalar(0.4), StateVec::scalar(1.2)]).unwrap();
        let lin = ilw_ghost_states(&adv.constant_jacobian().unwrap(), &d, &[-0.1], 2).unwrap()[0];
        let non = ilw_ghost_states_nonlinear_first_order(&adv, &d.values[0], &d.values[1], &[-0.1]).unwrap()[0];
        assert!((lin - non).norm_inf() < 1e-15);
    }

    #[test]
    fn singular_jacobian_is_unsupported() {
        let d = BoundaryDerivatives::new(vec![StateVec::scalar(1.0), StateVec::scalar(0.0)]).unwrap();
        let a = LinearAdvection::new(0.0).constant_jacobian().unwrap();
        assert!(matches!(ilw_ghost_states(&a, &d, &[-0.1], 2), Err(Error::Unsupported(_))));
    }
}
