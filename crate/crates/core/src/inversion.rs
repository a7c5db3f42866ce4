//! Inverse flux `Q = R(U)` with `F(Q) = U`: damped Gauss-Newton for the
//! general case plus the closed forms of the bundled systems.

use crate::error::{Error, Result};
use crate::models::SystemModel;
use crate::state::{Mat, StateVec};
use nalgebra::{DMatrix, DVector};

/// Relative residual tolerance, `‖F(Q) − U‖∞ ≤ TOL (1 + ‖U‖∞)`.
pub const INVERSION_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 50;
/// Extra full Newton steps tried once the tolerance is met.
pub const POLISH_STEPS: usize = 3;
/// Smallest damping factor tried before giving up on a direction.
pub const MIN_STEP: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionResult {
    pub state: StateVec,
    pub iterations: usize,
    /// `‖F(Q) − U‖∞` at the returned state.
    pub residual: f64,
}

/// Minimum-norm least-squares solution of `A δ = r`.
fn least_squares(a: &Mat, r: &StateVec) -> StateVec {
    let n = a.size();
    let m = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let b = DVector::from_column_slice(r.as_slice());
    let svd = m.svd(true, true);
    let cutoff = 1e-13 * svd.singular_values.max();
    match svd.solve(&b, cutoff) {
        Ok(x) => StateVec::from_slice(x.as_slice()),
        Err(_) => StateVec::zeros(n),
    }
}

/// Gauss-Newton on `r(Q) = F(Q) − U` from `guess`, halving the step until
/// the residual does not grow.
pub fn invert_flux<M: SystemModel + ?Sized>(model: &M, u: &StateVec, guess: &StateVec) -> Result<InversionResult> {
    model.check_admissible(guess)?;
    let tol = INVERSION_TOL * (1.0 + u.norm_inf());
    let mut q = *guess;
    let mut r = model.flux(&q) - *u;
    let mut norm = r.norm_inf();
    let mut iterations = 0;
    while norm > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::Inversion {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let delta = least_squares(&model.jacobian(&q), &r);
        let mut step = 1.0;
        let mut admissible_seen = false;
        loop {
            let trial = q.axpy(-step, &delta);
            if model.check_admissible(&trial).is_ok() {
                admissible_seen = true;
                let rt = model.flux(&trial) - *u;
                let nt = rt.norm_inf();
                if nt < norm {
                    q = trial;
                    r = rt;
                    norm = nt;
                    break;
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                if !admissible_seen {
                    return Err(Error::domain("every damped Gauss-Newton iterate is inadmissible", &q));
                }
                return Err(Error::Inversion {
                    iterations,
                    residual: norm,
                });
            }
        }
    }
    // Near-sonic states are ill-conditioned, so a residual at the tolerance
    // can still leave a sizeable state error. Polish with full steps while
    // the residual keeps falling.
    for _ in 0..POLISH_STEPS {
        if norm == 0.0 {
            break;
        }
        let trial = q - least_squares(&model.jacobian(&q), &r);
        if model.check_admissible(&trial).is_err() {
            break;
        }
        let rt = model.flux(&trial) - *u;
        let nt = rt.norm_inf();
        if !(nt < norm) {
            break;
        }
        q = trial;
        r = rt;
        norm = nt;
    }
    Ok(InversionResult {
        state: q,
        iterations,
        residual: norm,
    })
}

/// Closed-form Euler inverse flux on the subsonic branch.
///
/// With `U = (ρu, ρu² + p, u(E + p))` the auxiliary
/// `φ = [2u₂ + √(4u₂² + 8(γ²−1)(u₂²/2 − u₁u₃))] / (2(γ+1))` equals `p` when
/// `ρu² < γp`; then `ρ = u₁² / (u₂ − φ)` and `E = u₂/2 + φ(3−γ) / (2(γ−1))`.
/// The difference `u₂ − φ` is evaluated as `4(γ−1)u₁u₃ / (2γu₂ + √disc)` to
/// avoid cancellation at low speed. Returns `None` when the branch does not
/// apply (zero momentum, `u₂ − φ ≤ 0`, negative discriminant).
pub fn euler_inverse_flux(u: &StateVec, gamma: f64) -> Option<StateVec> {
    let (u1, u2, u3) = (u[0], u[1], u[2]);
    let g2 = gamma * gamma - 1.0;
    let mut disc = 4.0 * u2 * u2 + 8.0 * g2 * (0.5 * u2 * u2 - u1 * u3);
    if disc < 0.0 {
        // Rounding at the sonic point only.
        if disc < -1e-12 * u2 * u2 {
            return None;
        }
        disc = 0.0;
    }
    let root = disc.sqrt();
    let phi = (2.0 * u2 + root) / (2.0 * (gamma + 1.0));
    let denom = 2.0 * gamma * u2 + root;
    let gap = 4.0 * (gamma - 1.0) * u1 * u3 / denom;
    if !(gap > 0.0) || !gap.is_finite() {
        return None;
    }
    let rho = u1 * u1 / gap;
    let energy = 0.5 * u2 + phi * (3.0 - gamma) / (2.0 * (gamma - 1.0));
    let q = StateVec::from_slice(&[rho, u1, energy]);
    q.is_finite().then_some(q)
}

/// The model's registered closed-form inverse.
pub fn analytic_inverse(model: &dyn SystemModel, u: &StateVec) -> Result<StateVec> {
    model
        .analytic_inverse_flux(u)
        .ok_or_else(|| Error::Unsupported(format!("model `{}` has no closed-form inverse flux here", model.name())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Euler, LinearAdvection, LinearSystem, SpaceDependentFlux};
    use proptest::prelude::*;

    #[test]
    fn linear_problem_takes_one_iteration() {
        let r = invert_flux(&LinearSystem, &StateVec::from_slice(&[-1.0, 4.0]), &StateVec::zeros(2)).unwrap();
        assert!((r.state - StateVec::from_slice(&[1.0, 2.0])).norm_inf() < 1e-14);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn euler_gauss_newton_example() {
        let e = Euler::new(1.4);
        let u = StateVec::from_slice(&[1.0, 3.0, 7.5]);
        let r = invert_flux(&e, &u, &StateVec::from_slice(&[1.0, 1.0, 5.0])).unwrap();
        assert!((r.state - StateVec::from_slice(&[1.0, 1.0, 5.5])).norm_inf() < 1e-11);
        assert!(r.residual <= 1e-12 * (1.0 + 7.5));
    }

    #[test]
    fn exact_guess_needs_no_iteration() {
        let e = Euler::new(1.4);
        let q = StateVec::from_slice(&[1.0, 1.0, 5.5]);
        let r = invert_flux(&e, &e.flux(&q), &q).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.state, q);
    }

    #[test]
    fn inadmissible_guess_is_rejected() {
        let e = Euler::new(1.4);
        let r = invert_flux(&e, &StateVec::from_slice(&[1.0, 3.0, 7.5]), &StateVec::from_slice(&[-1.0, 0.0, 1.0]));
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn closed_form_euler_example() {
        let q = euler_inverse_flux(&StateVec::from_slice(&[1.0, 3.0, 7.5]), 1.4).unwrap();
        assert!((q - StateVec::from_slice(&[1.0, 1.0, 5.5])).norm_inf() < 1e-14);
    }

    #[test]
    fn zero_momentum_falls_back() {
        let e = Euler::new(1.4);
        let u = StateVec::from_slice(&[0.0, 2.0, 0.0]);
        assert!(euler_inverse_flux(&u, 1.4).is_none());
        let guess = e.conserved(&StateVec::from_slice(&[1.3, 0.0, 2.1]));
        let q = e.inverse_flux(&u, &guess).unwrap();
        assert!((e.flux(&q) - u).norm_inf() < 1e-11);
    }

    #[test]
    fn registered_closed_forms() {
        let q = analytic_inverse(&LinearSystem, &StateVec::from_slice(&[0.0, 2.0])).unwrap();
        assert_eq!(q.as_slice(), &[1.0, 1.0]);
        let q = analytic_inverse(&SpaceDependentFlux::new(1.0), &StateVec::from_slice(&[0.5, 0.0])).unwrap();
        assert_eq!(q.as_slice(), &[0.5, 1.0]);
        let q = analytic_inverse(&LinearAdvection::new(2.0), &StateVec::scalar(3.0)).unwrap();
        assert_eq!(q[0], 1.5);
    }

    #[test]
    fn space_dependent_iteration_lands_on_a_valid_branch() {
        // Every (u₁/k, k) inverts the flux. The minimum-norm step moves both
        // components, so the iterate only lands near k = 1.
        let m = SpaceDependentFlux::new(1.0);
        let u = StateVec::from_slice(&[0.5, 0.0]);
        let r = invert_flux(&m, &u, &StateVec::from_slice(&[0.1, 1.0])).unwrap();
        assert!((m.flux(&r.state) - u).norm_inf() <= INVERSION_TOL * 1.5);
        assert!((r.state[1] - 1.0).abs() < 0.1, "k = {}", r.state[1]);
        let exact = invert_flux(&m, &u, &StateVec::from_slice(&[0.5, 1.0])).unwrap();
        assert_eq!(exact.iterations, 0);
    }

    fn subsonic_state() -> impl Strategy<Value = StateVec> {
        (0.1..10.0f64, -0.999..0.999f64, 0.1..10.0f64).prop_map(|(rho, frac, p)| {
            let c = (1.4 * p / rho).sqrt();
            Euler::new(1.4).conserved(&StateVec::from_slice(&[rho, frac * c, p]))
        })
    }

    proptest! {
        #[test]
        fn gauss_newton_round_trip(q in subsonic_state()) {
            let e = Euler::new(1.4);
            let u = e.flux(&q);
            let guess = StateVec::from_slice(&[q[0] * 1.05, q[1] * 0.97, q[2] * 1.02]);
            let r = invert_flux(&e, &u, &guess).unwrap();
            prop_assert!((e.flux(&r.state) - u).norm_inf() <= 1e-10 * (1.0 + u.norm_inf()));
        }

        #[test]
        fn analytic_and_numeric_agree(q in subsonic_state()) {
            let e = Euler::new(1.4);
            let u = e.flux(&q);
            if let Some(a) = euler_inverse_flux(&u, 1.4) {
                let n = invert_flux(&e, &u, &q.map(|v| v * 1.01)).unwrap().state;
                prop_assert!((a - n).norm_inf() <= 1e-9 * (1.0 + q.norm_inf()));
            }
        }
    }
}
