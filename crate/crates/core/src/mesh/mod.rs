//! Polyhedral mesh model.
//!
//! Faces own their boundary triangulation; both cells adjacent to a face see
//! the same triangles (with opposite orientation), which makes the
//! piecewise-linear trace space globally conforming. Every cell also carries
//! an explicit sub-tetrahedron decomposition used only for volume quadrature.
//!
//! Degrees of freedom are the vertices that appear in at least one face
//! triangle. Vertices used only by sub-tetrahedra (cone apexes, box corners)
//! are geometric helpers and never carry a DoF.

mod io;
mod triangulate;
mod validate;
mod vtk;

pub use io::{load_json, mesh_from_json, mesh_to_json, save_json};
pub use triangulate::{triangulate_face, TriangulateError};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};
pub use vtk::{export_vtk, write_vtk, Field, FieldValues};

use crate::geometry::{self, Point3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("mesh schema error: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("field {name}: expected {expected} values, got {got}")]
    FieldSize { name: String, expected: usize, got: usize },
}

/// Material region of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Plus,
    Minus,
    Interface,
}

/// Side of the (approximate) interface a sub-tetrahedron lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Polygon vertex ids, counter-clockwise seen from outside `cells[0]`.
    pub loop_ids: Vec<usize>,
    /// Boundary triangulation, same orientation as the loop.
    pub tris: Vec<[usize; 3]>,
    /// Owning cell and neighbour (`-1` on the domain boundary).
    pub cells: [i64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells[1] < 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceRef {
    pub id: usize,
    /// True when the face's stored orientation points into this cell.
    pub flip: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubTet {
    pub v: [usize; 4],
    pub tag: Side,
}

/// The planar interface piece `Gamma_h^K` of an unfitted interface cell.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfacePatch {
    /// Polygon vertices (3 or 4 edge intersection points).
    pub gamma: Vec<usize>,
    /// Unit normal pointing from the minus to the plus side.
    pub normal: Point3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub faces: Vec<FaceRef>,
    pub tag: Material,
    pub subtets: Vec<SubTet>,
    pub interface: Option<InterfacePatch>,
}

/// Orthonormal frame attached to an interface cell: `t1`, `t2` tangent to
/// `Gamma_h^K`, `normal` from minus to plus, `anchor` a point on the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFrame {
    pub t1: Point3,
    pub t2: Point3,
    pub normal: Point3,
    pub anchor: Point3,
}

impl InterfaceFrame {
    /// Builds the frame from a unit normal: `t1` is the global x-axis
    /// projected onto the plane (y-axis when x is nearly normal to it).
    pub fn from_normal(normal: Point3, anchor: Point3) -> Self {
        let n = normal.normalize();
        let mut t1 = Point3::x() - n * n.x;
        if t1.norm() < 0.1 {
            t1 = Point3::y() - n * n.y;
        }
        let t1 = t1.normalize();
        let t2 = n.cross(&t1);
        InterfaceFrame { t1, t2, normal: n, anchor }
    }

    /// Signed distance of `x` to the interface plane.
    pub fn level(&self, x: &Point3) -> f64 {
        (x - self.anchor).dot(&self.normal)
    }

    pub fn side(&self, x: &Point3) -> Side {
        if self.level(x) >= 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    /// Vertex ids of DoFs on the domain boundary, ascending.
    pub boundary_dofs: Vec<usize>,
    dof_vertices: Vec<usize>,
    dof_of_vertex: Vec<Option<usize>>,
    cell_diameters: Vec<f64>,
    h: f64,
}

impl PolyMesh {
    pub fn new(vertices: Vec<Point3>, faces: Vec<Face>, cells: Vec<Cell>, boundary_dofs: Vec<usize>) -> Self {
        let mut mesh = PolyMesh {
            vertices,
            faces,
            cells,
            boundary_dofs,
            dof_vertices: Vec::new(),
            dof_of_vertex: Vec::new(),
            cell_diameters: Vec::new(),
            h: 0.0,
        };
        mesh.refresh();
        mesh
    }

    /// Recomputes DoF numbering, cell diameters and `h`. Call after editing
    /// the public fields directly.
    pub fn refresh(&mut self) {
        let nv = self.vertices.len();
        let mut used = vec![false; nv];
        for f in &self.faces {
            for t in &f.tris {
                for &v in t {
                    if v < nv {
                        used[v] = true;
                    }
                }
            }
        }
        self.dof_of_vertex = vec![None; nv];
        self.dof_vertices.clear();
        for (v, u) in used.iter().enumerate() {
            if *u {
                self.dof_of_vertex[v] = Some(self.dof_vertices.len());
                self.dof_vertices.push(v);
            }
        }
        self.boundary_dofs.sort_unstable();
        self.boundary_dofs.dedup();
        self.cell_diameters = (0..self.cells.len()).map(|c| self.compute_cell_diameter(c)).collect();
        self.h = self.cell_diameters.iter().cloned().fold(0.0, f64::max);
    }

    /// Rebuilds `boundary_dofs` from the faces that have a single cell.
    pub fn mark_boundary_from_faces(&mut self) {
        let mut set = BTreeSet::new();
        for f in self.faces.iter().filter(|f| f.is_boundary()) {
            for t in &f.tris {
                set.extend(t.iter().copied());
            }
        }
        self.boundary_dofs = set.into_iter().collect();
    }

    pub fn num_dofs(&self) -> usize {
        self.dof_vertices.len()
    }

    /// Vertex id of every DoF, in DoF order.
    pub fn dof_vertices(&self) -> &[usize] {
        &self.dof_vertices
    }

    pub fn dof_of_vertex(&self, v: usize) -> Option<usize> {
        self.dof_of_vertex.get(v).copied().flatten()
    }

    /// Maximum cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        self.cell_diameters[c]
    }

    fn compute_cell_diameter(&self, c: usize) -> f64 {
        let pts: Vec<Point3> = self.cell_vertices(&self.cells[c]).into_iter().map(|v| self.vertices[v]).collect();
        geometry::diameter(&pts)
    }

    /// Boundary triangles of a cell, oriented outward.
    pub fn cell_boundary_tris(&self, cell: &Cell) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for fr in &cell.faces {
            for t in &self.faces[fr.id].tris {
                out.push(if fr.flip { [t[0], t[2], t[1]] } else { *t });
            }
        }
        out
    }

    /// Vertex ids of the cell's boundary triangulation (its local DoFs),
    /// ascending.
    pub fn cell_vertices(&self, cell: &Cell) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for fr in &cell.faces {
            if let Some(f) = self.faces.get(fr.id) {
                for t in &f.tris {
                    set.extend(t.iter().copied());
                }
            }
        }
        set.into_iter().collect()
    }

    /// Cell edges: the deduplicated segments of its face polygons.
    pub fn cell_edges(&self, cell: &Cell) -> Vec<[usize; 2]> {
        let mut set = BTreeSet::new();
        for fr in &cell.faces {
            let l = &self.faces[fr.id].loop_ids;
            for i in 0..l.len() {
                let (a, b) = (l[i], l[(i + 1) % l.len()]);
                set.insert([a.min(b), a.max(b)]);
            }
        }
        set.into_iter().collect()
    }

    /// Volume by the divergence theorem over the outward boundary triangles.
    pub fn cell_volume(&self, cell: &Cell) -> f64 {
        let tris = self.cell_boundary_tris(cell);
        let Some(first) = tris.first() else { return 0.0 };
        let o = self.vertices[first[0]];
        tris.iter()
            .map(|t| {
                geometry::tet_signed_volume(&o, &self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]])
            })
            .sum()
    }

    pub fn subtet_volume(&self, st: &SubTet) -> f64 {
        let v = st.v.map(|i| &self.vertices[i]);
        geometry::tet_signed_volume(v[0], v[1], v[2], v[3]).abs()
    }

    pub fn cell_subtet_volume(&self, cell: &Cell, side: Option<Side>) -> f64 {
        cell.subtets.iter().filter(|s| side.is_none_or(|t| t == s.tag)).map(|s| self.subtet_volume(s)).sum()
    }

    pub fn boundary_area(&self, cell: &Cell) -> f64 {
        self.cell_boundary_tris(cell)
            .iter()
            .map(|t| geometry::tri_area(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .sum()
    }

    /// Total volume of all sub-tetrahedra.
    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| self.cell_subtet_volume(c, None)).sum()
    }

    pub fn interface_frame(&self, cell: &Cell) -> Option<InterfaceFrame> {
        let patch = cell.interface.as_ref()?;
        let pts: Vec<Point3> = patch.gamma.iter().map(|&v| self.vertices[v]).collect();
        Some(InterfaceFrame::from_normal(patch.normal, geometry::centroid(&pts)))
    }

    /// Neighbouring cells across faces.
    pub fn face_neighbors(&self, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for fr in &self.cells[c].faces {
            for &o in &self.faces[fr.id].cells {
                if o >= 0 && o as usize != c && !out.contains(&(o as usize)) {
                    out.push(o as usize);
                }
            }
        }
        out
    }
}
