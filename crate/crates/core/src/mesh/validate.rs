use super::{Material, PolyMesh, Side};
use crate::geometry::{self, Point3};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    IndexOutOfRange,
    DuplicateVertex,
    FaceAreaMismatch,
    FaceNotPlanar,
    FaceOrientation,
    FaceCellLink,
    FaceNotShared,
    CellNotClosed,
    CellOrientation,
    SubtetVolumeMismatch,
    InterfaceSide,
    BoundaryDofs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

/// Outcome of [`validate`]; an empty report means the mesh is usable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, message: String) {
        self.violations.push(Violation { kind, message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "mesh is valid");
        }
        for v in &self.violations {
            writeln!(f, "{:?}: {}", v.kind, v.message)?;
        }
        Ok(())
    }
}

const AREA_RTOL: f64 = 1e-12;
const PLANE_RTOL: f64 = 1e-10;
const VOLUME_RTOL: f64 = 1e-12;

/// Checks every structural invariant of the mesh model and lists the
/// violations found.
pub fn validate(mesh: &PolyMesh) -> ValidationReport {
    let mut r = ValidationReport::default();
    if !check_indices(mesh, &mut r) {
        return r;
    }
    check_faces(mesh, &mut r);
    check_cells(mesh, &mut r);
    check_boundary(mesh, &mut r);
    r
}

fn check_indices(mesh: &PolyMesh, r: &mut ValidationReport) -> bool {
    let nv = mesh.vertices.len();
    let nf = mesh.faces.len();
    let nc = mesh.cells.len() as i64;
    for (i, f) in mesh.faces.iter().enumerate() {
        if f.loop_ids.iter().chain(f.tris.iter().flatten()).any(|&v| v >= nv) {
            r.push(ViolationKind::IndexOutOfRange, format!("face {i} references a missing vertex"));
        }
        if f.cells[0] < 0 || f.cells[0] >= nc || f.cells[1] >= nc {
            r.push(ViolationKind::IndexOutOfRange, format!("face {i} references a missing cell"));
        }
    }
    for (c, cell) in mesh.cells.iter().enumerate() {
        if cell.faces.iter().any(|fr| fr.id >= nf) {
            r.push(ViolationKind::IndexOutOfRange, format!("cell {c} references a missing face"));
        }
        if cell.subtets.iter().flat_map(|s| s.v).any(|v| v >= nv) {
            r.push(ViolationKind::IndexOutOfRange, format!("cell {c} sub-tetrahedron references a missing vertex"));
        }
        if let Some(p) = &cell.interface {
            if p.gamma.iter().any(|&v| v >= nv) {
                r.push(ViolationKind::IndexOutOfRange, format!("cell {c} interface references a missing vertex"));
            }
        }
    }
    if mesh.boundary_dofs.iter().any(|&v| v >= nv) {
        r.push(ViolationKind::IndexOutOfRange, "boundary_dofs references a missing vertex".into());
    }
    r.is_empty()
}

fn check_faces(mesh: &PolyMesh, r: &mut ValidationReport) {
    for (i, f) in mesh.faces.iter().enumerate() {
        for (k, t) in f.tris.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                r.push(ViolationKind::DuplicateVertex, format!("face {i} triangle {k} repeats a vertex id"));
            }
        }
        let pts: Vec<Point3> = f.loop_ids.iter().map(|&v| mesh.vertices[v]).collect();
        if pts.len() < 3 {
            r.push(ViolationKind::FaceAreaMismatch, format!("face {i} has fewer than 3 loop vertices"));
            continue;
        }
        let n = geometry::polygon_normal(&pts);
        let area = 0.5 * n.norm();
        let diam = geometry::diameter(&pts);
        if area <= 0.0 {
            r.push(ViolationKind::FaceAreaMismatch, format!("face {i} has zero area"));
            continue;
        }
        let unit = n / (2.0 * area);
        let c = geometry::centroid(&pts);
        let mut tri_area = 0.0;
        let mut planar = true;
        let mut oriented = true;
        for t in &f.tris {
            let [a, b, cc] = t.map(|v| mesh.vertices[v]);
            tri_area += geometry::tri_area(&a, &b, &cc);
            for p in [&a, &b, &cc] {
                if (p - c).dot(&unit).abs() > PLANE_RTOL * diam {
                    planar = false;
                }
            }
            if geometry::tri_normal(&a, &b, &cc).dot(&unit) <= 0.0 {
                oriented = false;
            }
        }
        if pts.iter().any(|p| (p - c).dot(&unit).abs() > PLANE_RTOL * diam) {
            planar = false;
        }
        if (tri_area - area).abs() > AREA_RTOL * area {
            r.push(ViolationKind::FaceAreaMismatch, format!("face {i} area mismatch: triangles {tri_area:.6e} vs polygon {area:.6e}"));
        }
        if !planar {
            r.push(ViolationKind::FaceNotPlanar, format!("face {i} triangles are not coplanar with the face"));
        }
        if !oriented {
            r.push(ViolationKind::FaceOrientation, format!("face {i} triangles disagree with the loop orientation"));
        }
    }
}

fn check_cells(mesh: &PolyMesh, r: &mut ValidationReport) {
    // face -> (cell, flip) references
    let mut refs: Vec<Vec<(usize, bool)>> = vec![Vec::new(); mesh.faces.len()];
    for (c, cell) in mesh.cells.iter().enumerate() {
        for fr in &cell.faces {
            refs[fr.id].push((c, fr.flip));
        }
    }
    for (i, f) in mesh.faces.iter().enumerate() {
        let mut expected = vec![(f.cells[0] as usize, false)];
        if f.cells[1] >= 0 {
            expected.push((f.cells[1] as usize, true));
        }
        let mut got = refs[i].clone();
        got.sort_unstable();
        expected.sort_unstable();
        if got != expected {
            r.push(
                ViolationKind::FaceCellLink,
                format!("face {i} cell links {:?} disagree with cell references {:?}", f.cells, refs[i]),
            );
        }
    }

    for (c, cell) in mesh.cells.iter().enumerate() {
        let tris = mesh.cell_boundary_tris(cell);
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &tris {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        let closed = directed.iter().all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1));
        if !closed {
            r.push(ViolationKind::CellNotClosed, format!("cell {c} boundary triangulation is not a closed surface"));
        }
        let vol = mesh.cell_volume(cell);
        if vol <= 0.0 {
            r.push(ViolationKind::CellOrientation, format!("cell {c} has non-positive volume {vol:.3e} (inward faces?)"));
        }
        let sub = mesh.cell_subtet_volume(cell, None);
        let hk = mesh.cell_diameter(c);
        if (sub - vol).abs() > VOLUME_RTOL * vol.abs() + 1e-15 * hk.powi(3) {
            r.push(
                ViolationKind::SubtetVolumeMismatch,
                format!("cell {c} sub-tetrahedra volume {sub:.15e} differs from cell volume {vol:.15e}"),
            );
        }
        match (&cell.tag, mesh.interface_frame(cell)) {
            (Material::Interface, Some(frame)) => {
                let tol = PLANE_RTOL * hk;
                for (k, st) in cell.subtets.iter().enumerate() {
                    let bad = st.v.iter().any(|&v| {
                        let l = frame.level(&mesh.vertices[v]);
                        match st.tag {
                            Side::Plus => l < -tol,
                            Side::Minus => l > tol,
                        }
                    });
                    if bad {
                        r.push(ViolationKind::InterfaceSide, format!("cell {c} sub-tetrahedron {k} crosses the interface"));
                    }
                }
            }
            (Material::Interface, None) => {
                r.push(ViolationKind::InterfaceSide, format!("cell {c} is tagged interface but has no interface patch"));
            }
            (_, Some(_)) => {
                r.push(ViolationKind::InterfaceSide, format!("cell {c} has an interface patch but is not tagged interface"));
            }
            _ => {}
        }
    }
}

fn check_boundary(mesh: &PolyMesh, r: &mut ValidationReport) {
    let mut by_loop: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut expected = BTreeSet::new();
    for (i, f) in mesh.faces.iter().enumerate().filter(|(_, f)| f.is_boundary()) {
        let mut key = f.loop_ids.clone();
        key.sort_unstable();
        by_loop.entry(key).or_default().push(i);
        for t in &f.tris {
            expected.extend(t.iter().copied());
        }
    }
    for faces in by_loop.values().filter(|v| v.len() > 1) {
        r.push(
            ViolationKind::FaceNotShared,
            format!("faces {faces:?} cover the same polygon but are not shared (mismatched triangulations?)"),
        );
    }
    let got: BTreeSet<usize> = mesh.boundary_dofs.iter().copied().collect();
    if got != expected {
        let missing = expected.difference(&got).count();
        let extra = got.difference(&expected).count();
        r.push(
            ViolationKind::BoundaryDofs,
            format!("boundary_dofs mismatch: {missing} boundary vertices unmarked, {extra} marked vertices not on the boundary"),
        );
    }
}
