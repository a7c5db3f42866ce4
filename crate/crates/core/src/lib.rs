//! High-order ADER finite volume schemes for 1-D systems of conservation
//! laws, with Dirichlet boundaries enforced through reverse problems that
//! evolve the boundary data in space to manufacture ghost cells.

pub mod ader;
pub mod boundary;
pub mod error;
pub mod harness;
pub mod ilw;
pub mod inversion;
pub mod models;
pub mod quadrature;
pub mod reverse;
pub mod solver;
pub mod state;
pub mod weno;

pub use ader::{AderScheme, CellField};
pub use boundary::{BoundaryFunction, BoundaryMode, HistoryBuffer};
pub use error::{Error, Result};
pub use harness::{ConvergenceRow, RunConfig};
pub use models::{CaseId, CaseParams, Euler, Side, SystemModel, TestCase};
pub use reverse::{ReverseConfig, ReverseSolver};
pub use solver::{solve, Diagnostics, Solution, SolverConfig};
pub use state::{Mat, StateVec};
