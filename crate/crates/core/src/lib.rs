//! Analysis of generalized mass-action systems: exact structural computations
//! (deficiencies, sign-vector conditions) and numerical solvers (vertex-balanced
//! steady states, generalized Birch points, trajectory integration).

pub mod balance;
pub mod birch;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod network;
pub mod ratcore;
pub mod signs;

pub use balance::{analyze, AnalysisReport, Deficiencies, Verdict};
pub use birch::{BirchProblem, BirchSolution, SolveOptions};
pub use dynamics::Trajectory;
pub use error::{GmasError, Result};
pub use network::GeneralizedNetwork;
pub use ratcore::{Rational, RationalMatrix, SubspaceBasis};
pub use signs::{SignSet, SignVector};
