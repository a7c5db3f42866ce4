//! Conservation-law models `∂_t Q + ∂_x F(Q) = S(x, t)` and the bundled test cases.

mod advection;
mod cases;
mod euler;
mod linear_system;
mod space_dependent;

pub use advection::LinearAdvection;
pub use cases::{CaseId, CaseParams, TestCase};
pub use euler::{Euler, ADMISSIBILITY_FLOOR};
pub use linear_system::LinearSystem;
pub use space_dependent::SpaceDependentFlux;

use crate::error::{Error, Result};
use crate::state::{Mat, StateVec};
use std::fmt;

/// Which end of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Outward direction: −1 on the left, +1 on the right.
    pub fn outward(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Diagonalisation `A = L⁻¹ Λ L` with eigenvalues in ascending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem {
    pub values: StateVec,
    /// Left eigenvectors as rows (`L`).
    pub left: Mat,
    /// Right eigenvectors as columns (`L⁻¹`).
    pub right: Mat,
}

impl Eigensystem {
    /// Builds the decomposition from unsorted eigenpairs. Ties keep the
    /// original ordering, so characteristic masks stay deterministic.
    pub fn from_right_eigenpairs(pairs: &[(f64, StateVec)]) -> Result<Self> {
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0));
        let values = StateVec::from_slice(&order.iter().map(|&i| pairs[i].0).collect::<Vec<_>>());
        let cols: Vec<StateVec> = order.iter().map(|&i| pairs[i].1).collect();
        let right = Mat::from_columns(&cols);
        let left = right
            .inverse()
            .ok_or_else(|| Error::Model("eigenvectors are linearly dependent".into()))?;
        Ok(Self {
            values,
            left,
            right,
        })
    }

    /// `L⁻¹ Λ L`.
    pub fn recompose(&self) -> Mat {
        self.right.mul_mat(&Mat::diagonal(&self.values)).mul_mat(&self.left)
    }
}

/// A hyperbolic system of conservation laws in one space dimension.
///
/// Implementations are immutable and shareable across threads.
pub trait SystemModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Number of conserved variables `m`.
    fn dim(&self) -> usize;

    /// Physical flux without admissibility checks; see [`flux_eval`].
    fn flux(&self, q: &StateVec) -> StateVec;

    fn jacobian(&self, q: &StateVec) -> Mat;

    fn eigensystem(&self, q: &StateVec) -> Result<Eigensystem>;

    /// Eigenvalues of `A(Q)` in the order of [`SystemModel::eigensystem`].
    fn eigenvalues(&self, q: &StateVec) -> Result<StateVec> {
        self.eigensystem(q).map(|e| e.values)
    }

    fn check_admissible(&self, q: &StateVec) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::domain("wrong state dimension", q));
        }
        if !q.is_finite() {
            return Err(Error::domain("non-finite state", q));
        }
        Ok(())
    }

    /// `max_j |λ_j(A(Q))|`.
    fn spectral_radius(&self, q: &StateVec) -> f64 {
        self.eigenvalues(q).map(|v| v.norm_inf()).unwrap_or(f64::NAN)
    }

    /// Source term `S(x, t)`, if the model has one.
    fn source(&self, _x: f64, _t: f64) -> Option<StateVec> {
        None
    }

    fn has_source(&self) -> bool {
        false
    }

    /// `Some(A)` when the Jacobian does not depend on the state.
    fn constant_jacobian(&self) -> Option<Mat> {
        None
    }

    /// Closed-form inverse flux `R(U)` with `F(R(U)) = U`, when available.
    fn analytic_inverse_flux(&self, _u: &StateVec) -> Option<StateVec> {
        None
    }

    /// `R(U)`: analytic where possible, otherwise Gauss-Newton from `guess`.
    fn inverse_flux(&self, u: &StateVec, guess: &StateVec) -> Result<StateVec> {
        match self.analytic_inverse_flux(u) {
            Some(q) => Ok(q),
            None => crate::inversion::invert_flux(self, u, guess).map(|r| r.state),
        }
    }

    /// Spectral radius of `∂R/∂U` at `U = F(q)`, the signal speed of the
    /// reverse problem. The default uses `∂R/∂U = A(q)⁻¹`.
    fn reverse_spectral_radius(&self, q: &StateVec) -> Result<f64> {
        let values = self.eigenvalues(q)?;
        let slowest = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if slowest < 1e-12 {
            return Err(Error::March(format!(
                "Jacobian eigenvalue {slowest:.3e} vanishes (sonic point) at {:?}",
                q.as_slice()
            )));
        }
        Ok(1.0 / slowest)
    }

    /// `R(U)` and the reverse signal speed there.
    fn reverse_state(&self, u: &StateVec, guess: &StateVec) -> Result<(StateVec, f64)> {
        let q = self.inverse_flux(u, guess)?;
        Ok((q, self.reverse_spectral_radius(&q)?))
    }
}

/// `F(Q)` after checking that `Q` is admissible.
pub fn flux_eval(model: &dyn SystemModel, q: &StateVec) -> Result<StateVec> {
    model.check_admissible(q)?;
    Ok(model.flux(q))
}

/// Eigen-decomposition after checking that `Q` is admissible.
pub fn eigensystem(model: &dyn SystemModel, q: &StateVec) -> Result<Eigensystem> {
    model.check_admissible(q)?;
    model.eigensystem(q)
}

/// Source value at `(x, t)`; zero for homogeneous systems.
pub fn source_eval(model: &dyn SystemModel, x: f64, t: f64) -> StateVec {
    model.source(x, t).unwrap_or_else(|| StateVec::zeros(model.dim()))
}
