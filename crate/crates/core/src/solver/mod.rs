//! Global assembly, Dirichlet elimination, Jacobi-preconditioned CG,
//! error norms and convergence studies.

mod assemble;
mod cg;
mod norms;
mod problem;
mod sparse;
mod study;

pub use assemble::{apply_dirichlet, assemble, solve, ReducedSystem, Solution, SolveOptions, System};
pub use cg::{solve_cg, CgInfo};
pub use norms::{energy_error, errors, l2_error, ErrorNorms};
pub use problem::Problem;
pub use sparse::CsrMatrix;
pub use study::{convergence_study, ConvergenceReport, ConvergenceRow, MeshKind, ProblemKind, Scenario};

use crate::meshgen::MeshGenError;
use crate::vem::VemError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("local operators failed on {} cell(s); first: cell {}: {}", .0.len(), .0[0].0, .0[0].1)]
    Cells(Vec<(usize, VemError)>),
    #[error("CG did not converge: {iterations} iterations, relative residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("problem has no exact solution")]
    MissingExact,
    #[error("mesh generation failed: {0}")]
    Mesh(#[from] MeshGenError),
    #[error("invalid study: {0}")]
    Study(String),
}
