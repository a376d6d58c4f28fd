use super::builder::Builder;
use super::MeshGenError;
use crate::geometry::Point3;
use crate::mesh::{Cell, FaceRef, Material, PolyMesh, Side, SubTet};
use std::collections::HashMap;

/// The plane `normal . x = offset`; the plus side is where `normal . x > offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPlane {
    pub normal: Point3,
    pub offset: f64,
}

impl CutPlane {
    /// Normalises `normal` (and scales `offset` with it).
    pub fn new(normal: Point3, offset: f64) -> Result<Self, MeshGenError> {
        let len = normal.norm();
        if !(len > 0.0) || !offset.is_finite() {
            return Err(MeshGenError::Parameter("plane normal must be non-zero".into()));
        }
        Ok(CutPlane { normal: normal / len, offset: offset / len })
    }

    pub fn eval(&self, x: &Point3) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// Relative distance (in units of the mesh size) below which a vertex is
/// treated as lying on the plane.
const SNAP: f64 = 1e-10;

/// Splits every convex cell crossed by `plane` into its two halves
/// (a fitted, cell-splitting cut). Crossed faces are split along the trace;
/// the new cut polygon is shared by the two halves and oriented from the
/// minus half to the plus half. Cells are tagged by side.
///
/// A plane that crosses no cell returns the input unchanged.
pub fn cut_by_plane(mesh: &PolyMesh, plane: &CutPlane) -> Result<PolyMesh, MeshGenError> {
    let tol = SNAP * mesh.h();
    let s: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|x| {
            let v = plane.eval(x);
            if v.abs() <= tol {
                0.0
            } else {
                v
            }
        })
        .collect();
    let crossed = |ids: &[usize]| ids.iter().any(|&v| s[v] > 0.0) && ids.iter().any(|&v| s[v] < 0.0);
    let cell_ids: Vec<Vec<usize>> = mesh.cells.iter().map(|c| mesh.cell_vertices(c)).collect();
    if !cell_ids.iter().any(|ids| crossed(ids)) {
        return Ok(mesh.clone());
    }

    let mut b = Builder::with_vertices(mesh.vertices.clone());
    let mut cross: HashMap<(usize, usize), usize> = HashMap::new();
    let mut crossing = |b: &mut Builder, u: usize, v: usize| -> usize {
        let (u, v) = (u.min(v), u.max(v));
        *cross.entry((u, v)).or_insert_with(|| {
            let t = s[u] / (s[u] - s[v]);
            let (p, q) = (mesh.vertices[u], mesh.vertices[v]);
            b.helper_vertex(p + (q - p) * t)
        })
    };

    // Split faces: (plus part, minus part), stored orientation.
    let mut parts: Vec<Option<(Vec<usize>, Vec<usize>)>> = vec![None; mesh.faces.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        if !crossed(&f.loop_ids) {
            continue;
        }
        let l = &f.loop_ids;
        let (mut plus, mut minus) = (Vec::new(), Vec::new());
        for i in 0..l.len() {
            let (v, w) = (l[i], l[(i + 1) % l.len()]);
            if s[v] >= 0.0 {
                plus.push(v);
            }
            if s[v] <= 0.0 {
                minus.push(v);
            }
            if s[v] * s[w] < 0.0 {
                let x = crossing(&mut b, v, w);
                plus.push(x);
                minus.push(x);
            }
        }
        parts[fi] = Some((plus, minus));
    }

    let reversed = |l: &[usize]| -> Vec<usize> { l.iter().rev().copied().collect() };
    let rev_tris = |t: &[[usize; 3]]| -> Vec<[usize; 3]> { t.iter().map(|t| [t[0], t[2], t[1]]).collect() };

    for (ci, cell) in mesh.cells.iter().enumerate() {
        if !crossed(&cell_ids[ci]) {
            let nc = b.next_cell();
            let mut refs = Vec::with_capacity(cell.faces.len());
            for fr in &cell.faces {
                let f = &mesh.faces[fr.id];
                let (l, t) = if fr.flip { (reversed(&f.loop_ids), rev_tris(&f.tris)) } else { (f.loop_ids.clone(), f.tris.clone()) };
                refs.push(b.face(nc, l, Some(t)).map_err(|source| MeshGenError::Triangulation { cell: ci, source })?);
            }
            let side = if cell_ids[ci].iter().any(|&v| s[v] < 0.0) { Side::Minus } else { Side::Plus };
            let tag = if side == Side::Minus { Material::Minus } else { Material::Plus };
            let subtets = cell.subtets.iter().map(|st| SubTet { v: st.v, tag: side }).collect();
            b.cells.push(Cell { faces: refs, tag, subtets, interface: None });
            continue;
        }

        // Cut polygon: edge crossings plus on-plane vertices, ordered
        // counter-clockwise around the plane normal.
        let mut poly: Vec<usize> = cell_ids[ci].iter().copied().filter(|&v| s[v] == 0.0).collect();
        for [u, v] in mesh.cell_edges(cell) {
            if s[u] * s[v] < 0.0 {
                poly.push(crossing(&mut b, u, v));
            }
        }
        let poly = order_around(&b.vertices, poly, &plane.normal);

        for side in [Side::Minus, Side::Plus] {
            let nc = b.next_cell();
            let mut refs: Vec<FaceRef> = Vec::new();
            for fr in &cell.faces {
                let f = &mesh.faces[fr.id];
                let piece = match &parts[fr.id] {
                    Some((p, m)) => Some(if side == Side::Plus { p.clone() } else { m.clone() }),
                    None => {
                        let on_side = f.loop_ids.iter().any(|&v| s[v] * side.sign() > 0.0);
                        on_side.then(|| f.loop_ids.clone())
                    }
                };
                let Some(l) = piece else { continue };
                let split = parts[fr.id].is_some();
                let l = if fr.flip { reversed(&l) } else { l };
                let tris = if split {
                    None
                } else if fr.flip {
                    Some(rev_tris(&f.tris))
                } else {
                    Some(f.tris.clone())
                };
                refs.push(b.face(nc, l, tris).map_err(|source| MeshGenError::Triangulation { cell: ci, source })?);
            }
            // Outward normal of the cut face is +n for the minus half.
            let cut = if side == Side::Minus { poly.clone() } else { reversed(&poly) };
            refs.push(b.face(nc, cut, None).map_err(|source| MeshGenError::Triangulation { cell: ci, source })?);
            let boundary = b.oriented_tris(&refs);
            let subtets = b.cone_convex(&boundary, side);
            let tag = if side == Side::Minus { Material::Minus } else { Material::Plus };
            b.cells.push(Cell { faces: refs, tag, subtets, interface: None });
        }
    }
    Ok(b.finish())
}

/// Sorts coplanar points counter-clockwise around `normal`.
pub(crate) fn order_around(vertices: &[Point3], mut ids: Vec<usize>, normal: &Point3) -> Vec<usize> {
    ids.sort_unstable();
    ids.dedup();
    let pts: Vec<Point3> = ids.iter().map(|&v| vertices[v]).collect();
    let c = crate::geometry::centroid(&pts);
    let n = normal.normalize();
    let mut u = Point3::x() - n * n.x;
    if u.norm() < 0.1 {
        u = Point3::y() - n * n.y;
    }
    let u = u.normalize();
    let w = n.cross(&u);
    let mut keyed: Vec<(f64, usize)> = ids
        .iter()
        .zip(&pts)
        .map(|(&v, p)| {
            let d = p - c;
            (d.dot(&w).atan2(d.dot(&u)), v)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, v)| v).collect()
}
