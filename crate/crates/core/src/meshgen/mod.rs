//! Mesh generators: reference cube and tetrahedral meshes plus the three
//! anisotropic families (notched cells, plane-cut cuboids, unfitted
//! interface tetrahedra).

mod builder;
mod levelset;
mod notch;
mod plane;
mod structured;

pub use levelset::{cut_by_levelset, LevelSet, PlaneLevelSet, SphereLevelSet};
pub use notch::{notch_element, notch_mesh};
pub use plane::{cut_by_plane, CutPlane};
pub use structured::{cube_mesh, tet_mesh, unit_box, Aabb};

use crate::mesh::TriangulateError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshGenError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("cell {cell}: face triangulation failed: {source}")]
    Triangulation { cell: usize, source: TriangulateError },
    #[error("cell {cell}: degenerate interface ({reason})")]
    DegenerateInterface { cell: usize, reason: String },
}
