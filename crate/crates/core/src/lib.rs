//! Lowest-order virtual element method for `-div(beta grad u) = f` on
//! anisotropic polyhedral meshes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: polyhedral mesh model with shared per-face boundary
//!   triangulations, per-cell quadrature tetrahedra, validation and I/O.
//! * [`meshgen`]: reference meshes plus the three anisotropic families
//!   (notched non-star-convex cells, plane-cut cuboids, unfitted interface
//!   tetrahedra).
//! * [`geomcheck`]: verifiers for the maximum-angle and path conditions and
//!   the explicit constants that go with them.
//! * [`quadrature`]: symmetric simplex rules.
//! * [`vem`]: per-cell projection, stabilisation, stiffness and load.
//! * [`solver`]: assembly, Dirichlet elimination, preconditioned CG, error
//!   norms and convergence studies.
//!
//! Per-cell work runs on rayon when the `parallel` feature is enabled (the
//! default); every parallel routine has a sequential twin selected through
//! [`Exec`].

pub mod geometry;
pub mod geomcheck;
pub mod mesh;
pub mod meshgen;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod vem;

pub use geometry::Point3;
pub use mesh::PolyMesh;
pub use par::Exec;
