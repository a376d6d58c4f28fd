//! Checks of the boundary-triangulation shape assumptions (maximum angle,
//! path condition and its local variant, inscribed ball, non-degeneracy,
//! interface approximation) and the explicit constants derived from them.

use crate::geometry::{self, Point3};
use crate::mesh::{Material, PolyMesh};
use crate::meshgen::LevelSet;
use crate::par::{self, Exec};
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("degenerate triangle (area {area:.3e})")]
    DegenerateTriangle { area: f64 },
    #[error("maximum angle {0} is not below pi")]
    AngleOutOfRange(f64),
    #[error("cell {cell}: path condition fails for eps = {eps}")]
    PathConditionFails { cell: usize, eps: f64 },
    #[error("level-set gradient vanishes (|grad| = {0:.3e})")]
    SmallGradient(f64),
}

/// Minimum and maximum interior angle of a triangle.
pub fn tri_angles(p0: &Point3, p1: &Point3, p2: &Point3) -> Result<(f64, f64), GeomError> {
    let h = (p1 - p0).norm().max((p2 - p1).norm()).max((p0 - p2).norm());
    let area = geometry::tri_area(p0, p1, p2);
    if !(area > 1e-14 * h * h) {
        return Err(GeomError::DegenerateTriangle { area });
    }
    let a = geometry::triangle_angles(p0, p1, p2);
    Ok((a[0].min(a[1]).min(a[2]), a[0].max(a[1]).max(a[2])))
}

/// Outcome of the path-condition search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathCheck {
    pub ok: bool,
    /// Index of the largest triangle.
    pub t_max: usize,
    /// For every vertex, a path of vertex ids ending at a vertex of the
    /// largest triangle (empty when unreachable).
    pub paths: HashMap<usize, Vec<usize>>,
    pub unreached: Vec<usize>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Path condition on an arbitrary triangle list: an edge is admissible when
/// one of its opposite angles is at most `(1 + eps)` times the minimum angle
/// of the triangle that contains it; every vertex must be joined to the
/// largest triangle (lowest index on ties) through admissible edges.
pub fn check_a2_tris(vertices: &[Point3], tris: &[[usize; 3]], eps: f64) -> PathCheck {
    let mut t_max = 0;
    let mut best = f64::NEG_INFINITY;
    let mut admissible: HashMap<(usize, usize), bool> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        let p = t.map(|v| vertices[v]);
        let area = geometry::tri_area(&p[0], &p[1], &p[2]);
        if area > best {
            best = area;
            t_max = i;
        }
        let ang = geometry::triangle_angles(&p[0], &p[1], &p[2]);
        let min = ang[0].min(ang[1]).min(ang[2]);
        for k in 0..3 {
            // the edge opposite vertex k
            let e = edge_key(t[(k + 1) % 3], t[(k + 2) % 3]);
            let ok = ang[k] <= (1.0 + eps) * min * (1.0 + 1e-12);
            let entry = admissible.entry(e).or_insert(false);
            *entry |= ok;
        }
    }
    let mut verts: Vec<usize> = tris.iter().flatten().copied().collect();
    verts.sort_unstable();
    verts.dedup();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut edges: Vec<_> = admissible.iter().filter(|(_, &ok)| ok).map(|(&e, _)| e).collect();
    edges.sort_unstable();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut paths: HashMap<usize, Vec<usize>> = HashMap::new();
    if tris.is_empty() {
        return PathCheck { ok: true, t_max: 0, paths, unreached: Vec::new() };
    }
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &z in &tris[t_max] {
        if parent.insert(z, z).is_none() {
            queue.push_back(z);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in adj.get(&v).map(|x| x.as_slice()).unwrap_or(&[]) {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(v);
                queue.push_back(w);
            }
        }
    }
    let mut unreached = Vec::new();
    for &z in &verts {
        if !parent.contains_key(&z) {
            unreached.push(z);
            paths.insert(z, Vec::new());
            continue;
        }
        let mut path = vec![z];
        let mut cur = z;
        while parent[&cur] != cur {
            cur = parent[&cur];
            path.push(cur);
        }
        paths.insert(z, path);
    }
    PathCheck { ok: unreached.is_empty(), t_max, paths, unreached }
}

pub fn check_a2(mesh: &PolyMesh, cell: usize, eps: f64) -> PathCheck {
    check_a2_tris(&mesh.vertices, &mesh.cell_boundary_tris(&mesh.cells[cell]), eps)
}

/// The path-condition parameter implied by the local condition.
pub fn a2prime_eps(theta_min: f64, rho: f64, theta_max: f64) -> f64 {
    theta_max / (rho * theta_min.sin() * theta_max.sin()).asin()
}

/// Local variant of the path condition: every triangle shares an edge with
/// a triangle (itself included) whose minimum angle is at least `theta_min`
/// and whose diameter is at least `rho` times its own. Returns the implied
/// `eps` on success.
pub fn check_a2prime_tris(vertices: &[Point3], tris: &[[usize; 3]], theta_min: f64, rho: f64) -> (bool, Option<f64>) {
    let info: Vec<(f64, f64, f64)> = tris
        .iter()
        .map(|t| {
            let p = t.map(|v| vertices[v]);
            let a = geometry::triangle_angles(&p[0], &p[1], &p[2]);
            (a[0].min(a[1]).min(a[2]), a[0].max(a[1]).max(a[2]), geometry::diameter(&p))
        })
        .collect();
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            by_edge.entry(edge_key(t[k], t[(k + 1) % 3])).or_default().push(i);
        }
    }
    let ok = tris.iter().enumerate().all(|(i, t)| {
        let h = info[i].2;
        (0..3).any(|k| {
            by_edge[&edge_key(t[k], t[(k + 1) % 3])]
                .iter()
                .any(|&j| info[j].0 >= theta_min * (1.0 - 1e-12) && info[j].2 >= rho * h * (1.0 - 1e-12))
        })
    });
    let theta_max = info.iter().map(|x| x.1).fold(0.0, f64::max);
    (ok, ok.then(|| a2prime_eps(theta_min, rho, theta_max)))
}

pub fn check_a2prime(mesh: &PolyMesh, cell: usize, theta_min: f64, rho: f64) -> (bool, Option<f64>) {
    check_a2prime_tris(&mesh.vertices, &mesh.cell_boundary_tris(&mesh.cells[cell]), theta_min, rho)
}

/// Constant of the opposite-angle lemma.
pub fn kappa(theta_max: f64, eps: f64) -> Result<f64, GeomError> {
    if !(theta_max > 0.0 && theta_max < PI) {
        return Err(GeomError::AngleOutOfRange(theta_max));
    }
    Ok(2f64.sqrt() / ((PI - theta_max) / (2.0 + eps)).sin())
}

/// Largest and smallest angle over the cell's boundary triangles.
pub fn boundary_angles(mesh: &PolyMesh, cell: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for t in mesh.cell_boundary_tris(&mesh.cells[cell]) {
        let a = geometry::triangle_angles(&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]]);
        for x in a {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo, hi)
}

/// Discrete Poincare constant `sqrt(5) kappa h_K sqrt(N_T)` of a cell that
/// satisfies the path condition.
pub fn poincare_bound(mesh: &PolyMesh, cell: usize, eps: f64) -> Result<f64, GeomError> {
    if !check_a2(mesh, cell, eps).ok {
        return Err(GeomError::PathConditionFails { cell, eps });
    }
    let (_, theta_max) = boundary_angles(mesh, cell);
    let nt = mesh.cell_boundary_tris(&mesh.cells[cell]).len() as f64;
    Ok(5f64.sqrt() * kappa(theta_max, eps)? * mesh.cell_diameter(cell) * nt.sqrt())
}

fn inside_cell(mesh: &PolyMesh, cell: usize, x: &Point3) -> bool {
    mesh.cells[cell].subtets.iter().any(|s| {
        let t = s.v.map(|i| mesh.vertices[i]);
        geometry::tet_barycentric(x, &t).is_some_and(|b| b.iter().all(|&l| l >= -1e-12))
    })
}

/// Certified lower bound on (inradius / diameter): the best distance to the
/// boundary found from sub-tetrahedron barycentres improved by a 20-step
/// coordinate search that stays inside the cell.
pub fn inscribed_ratio(mesh: &PolyMesh, cell: usize) -> f64 {
    let c = &mesh.cells[cell];
    let tris = mesh.cell_boundary_tris(c);
    let v = &mesh.vertices;
    let dist = |x: &Point3| {
        tris.iter().map(|t| geometry::point_triangle_distance(x, &v[t[0]], &v[t[1]], &v[t[2]])).fold(f64::INFINITY, f64::min)
    };
    let h = mesh.cell_diameter(cell);
    let mut best = (0.0, Point3::zeros());
    for s in &c.subtets {
        let p = geometry::centroid(&s.v.map(|i| v[i]));
        let d = dist(&p);
        if d > best.0 {
            best = (d, p);
        }
    }
    let (mut d, mut x) = best;
    let mut step = 0.25 * d.max(1e-3 * h);
    for _ in 0..20 {
        let mut improved = false;
        for axis in 0..3 {
            for sgn in [1.0, -1.0] {
                let mut y = x;
                y[axis] += sgn * step;
                if !inside_cell(mesh, cell, &y) {
                    continue;
                }
                let dy = dist(&y);
                if dy > d {
                    d = dy;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    d / h
}

/// Lower bound of the best edge-triple determinant for a tetrahedron with
/// maximum (face or dihedral) angle `theta_max`.
pub fn c_m(theta_max: f64) -> f64 {
    let s = theta_max.sin();
    (3f64.sqrt() / 2.0).min(s) * (theta_max / 2.0).cos().min(s).powi(2)
}

/// Largest `|det|` of three unit edge directions over all edge triples.
pub fn best_edge_det(dirs: &[Point3]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let c = dirs[i].cross(&dirs[j]);
            for k in j + 1..dirs.len() {
                best = best.max(c.dot(&dirs[k]).abs());
            }
        }
    }
    best
}

/// `(best_det, c_m)` for a cell: edge triples over its face-polygon edges,
/// `c_m` from the maximum boundary-triangle angle.
pub fn degeneracy(mesh: &PolyMesh, cell: usize) -> (f64, f64) {
    let dirs: Vec<Point3> =
        mesh.cell_edges(&mesh.cells[cell]).iter().map(|e| (mesh.vertices[e[1]] - mesh.vertices[e[0]]).normalize()).collect();
    let (_, theta_max) = boundary_angles(mesh, cell);
    (best_edge_det(&dirs), c_m(theta_max))
}

/// Maximum of the face angles and dihedral angles of a tetrahedron.
pub fn tet_max_angle(p: &[Point3; 4]) -> f64 {
    let mut m: f64 = 0.0;
    for skip in 0..4 {
        let f: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
        for a in geometry::triangle_angles(&p[f[0]], &p[f[1]], &p[f[2]]) {
            m = m.max(a);
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let o: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
            let e = (p[j] - p[i]).normalize();
            let perp = |q: &Point3| {
                let d = q - p[i];
                d - e * d.dot(&e)
            };
            let (u, w) = (perp(&p[o[0]]), perp(&p[o[1]]));
            m = m.max((u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos());
        }
    }
    m
}

/// Both sides of the cotangent identity
/// `|T| |grad_T v|^2 = R_T sum_i cos(theta_i) |e_i| (g . t_i)^2`
/// for the linear function with gradient `g`.
pub fn cotangent_sides(p: &[Point3; 3], g: &Point3) -> (f64, f64) {
    let area = geometry::tri_area(&p[0], &p[1], &p[2]);
    let n = geometry::tri_normal(&p[0], &p[1], &p[2]).normalize();
    let gs = g - n * g.dot(&n);
    let lhs = area * gs.norm_squared();
    let ang = geometry::triangle_angles(&p[0], &p[1], &p[2]);
    let mut rhs = 0.0;
    let mut r = 0.0;
    for i in 0..3 {
        let e = p[(i + 2) % 3] - p[(i + 1) % 3];
        let len = e.norm();
        r = len / (2.0 * ang[i].sin());
        rhs += ang[i].cos() * len * g.dot(&(e / len)).powi(2);
    }
    (lhs, r * rhs)
}

/// Distance-strip check of the interface approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripCheck {
    pub ok: bool,
    /// `max |phi| / |grad phi|` over the samples.
    pub max_distance: f64,
    pub h: f64,
}

/// Samples every interface triangle at the 10 points of the cubic
/// barycentric lattice and requires `|phi| / |grad phi| <= c h^2`.
pub fn check_a5(phi: &dyn LevelSet, mesh: &PolyMesh, c: f64) -> Result<StripCheck, GeomError> {
    let mut worst: f64 = 0.0;
    for cell in mesh.cells.iter().filter(|k| k.tag == Material::Interface) {
        let Some(patch) = cell.interface.as_ref() else { continue };
        let g = &patch.gamma;
        for k in 1..g.len() - 1 {
            let t = [mesh.vertices[g[0]], mesh.vertices[g[k]], mesh.vertices[g[k + 1]]];
            for i in 0..=3 {
                for j in 0..=3 - i {
                    let l = [i as f64 / 3.0, j as f64 / 3.0, (3 - i - j) as f64 / 3.0];
                    let x = t[0] * l[0] + t[1] * l[1] + t[2] * l[2];
                    let gn = phi.gradient(&x).norm();
                    if gn < 1e-8 {
                        return Err(GeomError::SmallGradient(gn));
                    }
                    worst = worst.max(phi.value(&x).abs() / gn);
                }
            }
        }
    }
    let h = mesh.h();
    Ok(StripCheck { ok: worst <= c * h * h, max_distance: worst, h })
}

/// Parameters of a shape check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeParams {
    pub eps: f64,
    /// Minimum angle and size ratio of the local path condition.
    pub theta_min: f64,
    pub rho: f64,
}

impl Default for ShapeParams {
    fn default() -> Self {
        ShapeParams { eps: 1.0, theta_min: PI / 6.0, rho: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReport {
    pub cell: usize,
    pub theta_max: f64,
    pub theta_min: f64,
    pub n_tris: usize,
    pub a2_ok: bool,
    #[serde(skip)]
    pub a2_paths: HashMap<usize, Vec<usize>>,
    pub a2prime_ok: bool,
    pub a2prime_eps: Option<f64>,
    pub eps: f64,
    pub kappa: f64,
    pub poincare_bound: Option<f64>,
    pub inscribed_ratio: f64,
    pub best_det: f64,
    pub c_m: f64,
}

pub fn shape_report(mesh: &PolyMesh, cell: usize, params: &ShapeParams) -> Result<ShapeReport, GeomError> {
    let tris = mesh.cell_boundary_tris(&mesh.cells[cell]);
    for t in &tris {
        tri_angles(&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]])?;
    }
    let (theta_min, theta_max) = boundary_angles(mesh, cell);
    let a2 = check_a2_tris(&mesh.vertices, &tris, params.eps);
    let (a2prime_ok, a2prime_eps) = check_a2prime_tris(&mesh.vertices, &tris, params.theta_min, params.rho);
    let kappa = kappa(theta_max, params.eps)?;
    let n_tris = tris.len();
    let poincare_bound = a2.ok.then(|| 5f64.sqrt() * kappa * mesh.cell_diameter(cell) * (n_tris as f64).sqrt());
    let (best_det, c_m) = degeneracy(mesh, cell);
    Ok(ShapeReport {
        cell,
        theta_max,
        theta_min,
        n_tris,
        a2_ok: a2.ok,
        a2_paths: a2.paths,
        a2prime_ok,
        a2prime_eps,
        eps: params.eps,
        kappa,
        poincare_bound,
        inscribed_ratio: inscribed_ratio(mesh, cell),
        best_det,
        c_m,
    })
}

pub fn shape_reports(mesh: &PolyMesh, params: &ShapeParams, exec: Exec) -> Result<Vec<ShapeReport>, GeomError> {
    par::map_range(exec, mesh.cells.len(), |c| shape_report(mesh, c, params)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::{cube_mesh, unit_box};

    fn p(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 0.0)
    }

    #[test]
    fn right_isoceles_and_equilateral() {
        let (lo, hi) = tri_angles(&p(0.0, 0.0), &p(1.0, 0.0), &p(0.0, 1.0)).unwrap();
        assert!((lo - PI / 4.0).abs() < 1e-14 && (hi - PI / 2.0).abs() < 1e-14);
        let (lo, hi) = tri_angles(&p(0.0, 0.0), &p(1.0, 0.0), &p(0.5, 0.75f64.sqrt())).unwrap();
        assert!((lo - PI / 3.0).abs() < 1e-14 && (hi - PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn flattening_triangle() {
        let (_, hi) = tri_angles(&p(0.0, 0.0), &p(1.0, 0.0), &p(0.5, 1e-3)).unwrap();
        let expect = PI - 2.0 * (1e-3f64 / 0.5).atan();
        assert!((hi - expect).abs() < 1e-12);
        assert!(hi > 3.0);
        assert!(tri_angles(&p(0.0, 0.0), &p(1.0, 0.0), &p(2.0, 0.0)).is_err());
    }

    #[test]
    fn cube_passes_path_condition() {
        let m = cube_mesh(1, unit_box()).unwrap();
        let r = check_a2(&m, 0, 1.0);
        assert!(r.ok);
        assert_eq!(r.paths.len(), 8);
    }

    #[test]
    fn single_triangle_is_vacuous() {
        let v = [p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(check_a2_tris(&v, &[[0, 1, 2]], 0.0).ok);
    }

    #[test]
    fn routes_around_inadmissible_edge() {
        // Two flat triangles on either side of the edge 0-1 make it
        // inadmissible; the large triangle 0-3-4 anchors the search.
        let v = [p(0.0, 0.0), p(1.0, 0.0), p(0.5, 0.01), p(0.5, -0.01), p(-1.0, -2.0)];
        let tris = [[0, 1, 2], [1, 0, 3], [0, 3, 4]];
        let r = check_a2_tris(&v, &tris, 1.0);
        assert!(r.ok);
        assert_eq!(r.t_max, 2);
        for path in r.paths.values() {
            for w in path.windows(2) {
                assert_ne!(edge_key(w[0], w[1]), (0, 1));
            }
        }
        assert_eq!(r.paths[&1].len(), 2);
        assert_eq!(r.paths[&1][1], 3);
    }

    #[test]
    fn needle_apex_unreachable_then_monotone() {
        let v = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, -0.01), p(3.0, 0.0)];
        let tris = [[0, 2, 1], [1, 2, 3]];
        let r = check_a2_tris(&v, &tris, 1.0);
        assert!(!r.ok);
        assert_eq!(r.unreached, vec![0]);
        assert!(check_a2_tris(&v, &tris, 200.0).ok);
        assert!(check_a2_tris(&v, &tris, 1000.0).ok);
    }

    #[test]
    fn lemma_constants() {
        assert!((kappa(PI / 2.0, 1.0).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((kappa(PI / 2.0, 0.0).unwrap() - 2.0).abs() < 1e-12);
        let k144 = kappa(144f64.to_radians(), 1.0).unwrap();
        assert!((k144 - 2f64.sqrt() / 12f64.to_radians().sin()).abs() < 1e-12);
        assert!((k144 - 6.8020).abs() < 1e-4);
        assert!(kappa(PI, 1.0).is_err());
        assert!((a2prime_eps(PI / 6.0, 1.0, PI / 2.0) - 3.0).abs() < 1e-12);
        assert!((c_m(PI / 2.0) - 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn cube_poincare_and_scaling() {
        let m = cube_mesh(1, unit_box()).unwrap();
        let b = poincare_bound(&m, 0, 1.0).unwrap();
        let expect = 5f64.sqrt() * 2.0 * 2f64.sqrt() * 3f64.sqrt() * 12f64.sqrt();
        assert!((b - expect).abs() < 1e-12);
        assert!((b - 37.95).abs() < 0.01);
        let big = crate::meshgen::Aabb { lo: Point3::zeros(), hi: Point3::new(2.0, 2.0, 2.0) };
        let m2 = cube_mesh(1, big).unwrap();
        assert!((poincare_bound(&m2, 0, 1.0).unwrap() - 2.0 * b).abs() < 1e-12);
    }

    #[test]
    fn cube_inradius() {
        let m = cube_mesh(1, unit_box()).unwrap();
        let r = inscribed_ratio(&m, 0);
        assert!(r >= 0.28 && r <= 0.5 / 3f64.sqrt() + 1e-12);
    }

    #[test]
    fn corner_tet_edges_orthonormal() {
        let e = [Point3::x(), Point3::y(), Point3::z(), (Point3::y() - Point3::x()).normalize()];
        assert!((best_edge_det(&e) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn regular_tet_angles() {
        let s = [
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(1.0, -1.0, -1.0),
            Point3::new(-1.0, 1.0, -1.0),
            Point3::new(-1.0, -1.0, 1.0),
        ];
        let dihedral = (1.0f64 / 3.0).acos();
        assert!((tet_max_angle(&s) - dihedral.max(PI / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn report_serializes() {
        let m = cube_mesh(1, unit_box()).unwrap();
        let r = shape_report(&m, 0, &ShapeParams::default()).unwrap();
        assert!(r.a2_ok && r.a2prime_ok);
        assert!(r.kappa >= 2f64.sqrt());
        assert!(r.theta_min <= r.theta_max);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"a2_ok\":true"));
    }
}
