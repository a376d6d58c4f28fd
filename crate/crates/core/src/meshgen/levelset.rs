use super::builder::Builder;
use super::plane::order_around;
use super::MeshGenError;
use crate::geometry::Point3;
use crate::mesh::{Cell, FaceRef, InterfacePatch, Material, PolyMesh, Side, SubTet};
use nalgebra::Matrix3;
use std::collections::HashMap;

/// Level-set description of an interface; `value < 0` marks the minus region.
pub trait LevelSet: Sync {
    fn value(&self, x: &Point3) -> f64;
    fn gradient(&self, x: &Point3) -> Point3;
}

/// `phi(x) = normal . x - offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneLevelSet {
    pub normal: Point3,
    pub offset: f64,
}

impl LevelSet for PlaneLevelSet {
    fn value(&self, x: &Point3) -> f64 {
        self.normal.dot(x) - self.offset
    }
    fn gradient(&self, _x: &Point3) -> Point3 {
        self.normal
    }
}

/// Signed distance to a sphere, negative inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereLevelSet {
    pub center: Point3,
    pub radius: f64,
}

impl LevelSet for SphereLevelSet {
    fn value(&self, x: &Point3) -> f64 {
        (x - self.center).norm() - self.radius
    }
    fn gradient(&self, x: &Point3) -> Point3 {
        let d = x - self.center;
        let r = d.norm();
        if r == 0.0 {
            Point3::zeros()
        } else {
            d / r
        }
    }
}

/// Unfitted cut of a tetrahedral mesh by the linear interpolant of `phi`.
///
/// Interface tetrahedra stay whole but get the interface polygon, its
/// normal, side-tagged sub-tetrahedra, and face triangulations that follow
/// the interface trace. Vertex values that are exactly zero are moved to
/// the plus side by `1e-12 h`; crossing points closer than `1e-10 h` to an
/// edge endpoint are replaced by that endpoint.
/// Distance (relative to the mesh size) below which a crossing point is
/// replaced by the nearby edge endpoint.
const SNAP: f64 = 1e-10;

pub fn cut_by_levelset(mesh: &PolyMesh, phi: &dyn LevelSet) -> Result<PolyMesh, MeshGenError> {
    let bump = 1e-12 * mesh.h();
    let vals: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|x| {
            let v = phi.value(x);
            if v == 0.0 {
                bump
            } else {
                v
            }
        })
        .collect();
    let mut b = Builder::with_vertices(mesh.vertices.clone());
    let snap = SNAP * mesh.h();
    let mut cross: HashMap<(usize, usize), usize> = HashMap::new();
    // Crossing point of edge (u, v), or the nearer endpoint when the point
    // would lie within `snap` of it.
    let mut crossing = |b: &mut Builder, u: usize, v: usize| -> Option<usize> {
        if vals[u] * vals[v] >= 0.0 {
            return None;
        }
        let (u, v) = (u.min(v), u.max(v));
        Some(*cross.entry((u, v)).or_insert_with(|| {
            let t = vals[u] / (vals[u] - vals[v]);
            let (p, q) = (mesh.vertices[u], mesh.vertices[v]);
            let len = (q - p).norm();
            if t * len <= snap {
                u
            } else if (1.0 - t) * len <= snap {
                v
            } else {
                b.helper_vertex(p + (q - p) * t)
            }
        }))
    };

    // Per old face: refined loop and triangles (stored orientation).
    let mut face_data: Vec<(Vec<usize>, Vec<[usize; 3]>)> = Vec::with_capacity(mesh.faces.len());
    for f in &mesh.faces {
        let l = &f.loop_ids;
        let mut nl: Vec<usize> = Vec::with_capacity(l.len() + 2);
        let mut xs = Vec::new();
        for i in 0..l.len() {
            nl.push(l[i]);
            if let Some(x) = crossing(&mut b, l[i], l[(i + 1) % l.len()]) {
                if !l.contains(&x) {
                    nl.push(x);
                }
                if !xs.contains(&x) {
                    xs.push(x);
                }
            }
        }
        let splits = xs.len() == 2 && nl.len() > l.len();
        if !splits {
            face_data.push((l.clone(), f.tris.clone()));
            continue;
        }
        let tris = crate::mesh::triangulate_face(&b.vertices, &nl, Some((xs[0], xs[1]))).map_err(|source| {
            MeshGenError::Triangulation { cell: f.cells[0].max(0) as usize, source }
        })?;
        face_data.push((nl, tris));
    }

    for (ci, cell) in mesh.cells.iter().enumerate() {
        let ids = mesh.cell_vertices(cell);
        if ids.len() != 4 {
            return Err(MeshGenError::Parameter(format!("cell {ci} is not a tetrahedron")));
        }
        let nc = b.next_cell();
        let mut refs: Vec<FaceRef> = Vec::with_capacity(4);
        for fr in &cell.faces {
            let (l, t) = &face_data[fr.id];
            let (l, t) = if fr.flip {
                (l.iter().rev().copied().collect(), t.iter().map(|t| [t[0], t[2], t[1]]).collect())
            } else {
                (l.clone(), t.clone())
            };
            refs.push(b.face(nc, l, Some(t)).expect("explicit triangles"));
        }
        let mut gamma = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                if let Some(x) = crossing(&mut b, ids[i], ids[j]) {
                    if !gamma.contains(&x) {
                        gamma.push(x);
                    }
                }
            }
        }
        let free: Vec<usize> = ids.iter().copied().filter(|v| !gamma.contains(v)).collect();
        let has_minus = free.iter().any(|&v| vals[v] < 0.0);
        let has_plus = free.iter().any(|&v| vals[v] > 0.0);
        if gamma.len() < 3 || !(has_minus && has_plus) {
            let side = if has_minus { Side::Minus } else { Side::Plus };
            let tag = if has_minus { Material::Minus } else { Material::Plus };
            let subtets = cell.subtets.iter().map(|s| SubTet { v: s.v, tag: side }).collect();
            b.cells.push(Cell { faces: refs, tag, subtets, interface: None });
            continue;
        }

        let p: Vec<Point3> = ids.iter().map(|&v| mesh.vertices[v]).collect();
        let m = Matrix3::from_rows(&[(p[1] - p[0]).transpose(), (p[2] - p[0]).transpose(), (p[3] - p[0]).transpose()]);
        let rhs = Point3::new(vals[ids[1]] - vals[ids[0]], vals[ids[2]] - vals[ids[0]], vals[ids[3]] - vals[ids[0]]);
        let grad = m.lu().solve(&rhs).unwrap_or_else(Point3::zeros);
        let scale = rhs.amax() / mesh.cell_diameter(ci);
        if !(grad.norm() > 1e-12 * scale) {
            return Err(MeshGenError::DegenerateInterface { cell: ci, reason: "vanishing interpolated gradient".into() });
        }
        let normal = grad.normalize();
        let gamma = order_around(&b.vertices, gamma, &normal);
        if gamma.len() < 3 {
            return Err(MeshGenError::DegenerateInterface { cell: ci, reason: format!("{} trace points", gamma.len()) });
        }

        let tet_faces = [[ids[0], ids[1], ids[2]], [ids[0], ids[1], ids[3]], [ids[0], ids[2], ids[3]], [ids[1], ids[2], ids[3]]];
        let mut subtets = Vec::new();
        for side in [Side::Minus, Side::Plus] {
            let mut tris: Vec<[usize; 3]> = fan(&gamma);
            for t in &tet_faces {
                let mut poly = Vec::new();
                for i in 0..3 {
                    let (u, v) = (t[i], t[(i + 1) % 3]);
                    if vals[u] * side.sign() > 0.0 || gamma.contains(&u) {
                        poly.push(u);
                    }
                    if let Some(x) = crossing(&mut b, u, v) {
                        poly.push(x);
                    }
                }
                poly.dedup();
                if poly.len() > 1 && poly[0] == poly[poly.len() - 1] {
                    poly.pop();
                }
                if poly.len() >= 3 {
                    tris.extend(fan(&poly));
                }
            }
            subtets.extend(b.cone_convex(&tris, side));
        }
        b.cells.push(Cell {
            faces: refs,
            tag: Material::Interface,
            subtets,
            interface: Some(InterfacePatch { gamma, normal }),
        });
    }
    Ok(b.finish())
}

fn fan(poly: &[usize]) -> Vec<[usize; 3]> {
    (1..poly.len() - 1).map(|k| [poly[0], poly[k], poly[k + 1]]).collect()
}
