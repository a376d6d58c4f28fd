//! Per-cell virtual element operators.
//!
//! Local DoFs of a cell are the vertices of its boundary triangulation in
//! ascending vertex order. Virtual functions are never evaluated inside a
//! cell: everything is computed from boundary values through the
//! projection onto a four-dimensional space `W_h(K)` (linear polynomials,
//! or immersed finite element functions on interface cells).

mod analysis;
mod local;
mod space;

pub use analysis::{boundary_mass, h2_rayleigh, quasi_interp_jk, stabilization_ratio_min};
pub use local::{
    interpolate_boundary, local_load, local_stiffness, projection, stabilization_edge, stabilization_face, LocalOperators,
    Stabilization,
};
pub use space::{build_m_minus, Coefficients, ProjectionSpace};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VemError {
    #[error("cell {cell}: degenerate cell ({reason})")]
    DegenerateCell { cell: usize, reason: String },
    #[error("interface frame is not orthonormal (Gram deviation {0:.3e})")]
    NonOrthonormalFrame(f64),
    #[error("coefficients must be positive, got beta- = {0}, beta+ = {1}")]
    BadCoefficient(f64, f64),
    #[error("cell {0} is not an interface cell")]
    NotInterface(usize),
    #[error("cell {0}: stabilization is singular on the zero-mean subspace")]
    SingularStabilization(usize),
}
