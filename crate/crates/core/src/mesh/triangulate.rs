//! Face triangulation by minimum-maximum-angle fans.

use crate::geometry::{self, Point3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TriangulateError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not planar (deviation {deviation:.3e} > {tolerance:.3e})")]
    NonPlanar { deviation: f64, tolerance: f64 },
    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("polygon has zero area")]
    Degenerate,
    #[error("chord ({0}, {1}) does not join two polygon vertices")]
    BadChord(usize, usize),
    #[error("no valid triangulation found")]
    NoTriangulation,
}

const PLANAR_TOL: f64 = 1e-10;

/// Triangulates the planar polygon `loop_ids` (vertex ids into `vertices`).
///
/// Each part is fan-triangulated from the apex that minimises the largest
/// triangle angle, ties going to the earliest loop position. When `chord`
/// (a pair of loop vertex ids, e.g. the trace of an interface) is given the
/// polygon is first split along it so no triangle straddles the chord.
/// Parts that are not star-shaped with respect to any of their vertices are
/// triangulated by a min-max-angle dynamic program over diagonals instead.
///
/// Triangles keep the loop's orientation.
pub fn triangulate_face(
    vertices: &[Point3],
    loop_ids: &[usize],
    chord: Option<(usize, usize)>,
) -> Result<Vec<[usize; 3]>, TriangulateError> {
    let n = loop_ids.len();
    if n < 3 {
        return Err(TriangulateError::TooFewVertices(n));
    }
    let pts: Vec<Point3> = loop_ids.iter().map(|&v| vertices[v]).collect();
    let normal = geometry::polygon_normal(&pts);
    let diam = geometry::diameter(&pts);
    if normal.norm() <= 1e-14 * diam * diam {
        return Err(TriangulateError::Degenerate);
    }
    let normal = normal.normalize();
    let c = geometry::centroid(&pts);
    let deviation = pts.iter().map(|p| (p - c).dot(&normal).abs()).fold(0.0, f64::max);
    let tolerance = PLANAR_TOL * diam;
    if deviation > tolerance {
        return Err(TriangulateError::NonPlanar { deviation, tolerance });
    }
    let plane = Plane2::new(&c, &normal);
    let uv: Vec<[f64; 2]> = pts.iter().map(|p| plane.project(p)).collect();
    check_simple(&uv)?;

    let positions: Vec<usize> = (0..n).collect();
    let parts: Vec<Vec<usize>> = match chord {
        None => vec![positions],
        Some((a, b)) => {
            let ia = loop_ids.iter().position(|&v| v == a).ok_or(TriangulateError::BadChord(a, b))?;
            let ib = loop_ids.iter().position(|&v| v == b).ok_or(TriangulateError::BadChord(a, b))?;
            let (i, j) = (ia.min(ib), ia.max(ib));
            if i == j {
                return Err(TriangulateError::BadChord(a, b));
            }
            if j - i == 1 || (i == 0 && j == n - 1) {
                vec![positions]
            } else {
                let first: Vec<usize> = (i..=j).collect();
                let second: Vec<usize> = (j..n).chain(0..=i).collect();
                vec![first, second]
            }
        }
    };

    let mut out = Vec::new();
    for part in parts {
        let tris = fan_min_max(&pts, &uv, &part).or_else(|| dp_min_max(&pts, &uv, &part)).ok_or(TriangulateError::NoTriangulation)?;
        out.extend(tris.into_iter().map(|t| t.map(|p| loop_ids[p])));
    }
    Ok(out)
}

struct Plane2 {
    origin: Point3,
    u: Point3,
    v: Point3,
}

impl Plane2 {
    fn new(origin: &Point3, normal: &Point3) -> Self {
        let mut u = Point3::x() - normal * normal.x;
        if u.norm() < 0.1 {
            u = Point3::y() - normal * normal.y;
        }
        let u = u.normalize();
        let v = normal.cross(&u);
        Plane2 { origin: *origin, u, v }
    }

    fn project(&self, p: &Point3) -> [f64; 2] {
        let d = p - self.origin;
        [d.dot(&self.u), d.dot(&self.v)]
    }
}

fn orient(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: &[f64; 2], b: &[f64; 2], p: &[f64; 2], tol: f64) -> bool {
    orient(a, b, p).abs() <= tol
        && p[0] >= a[0].min(b[0]) - tol
        && p[0] <= a[0].max(b[0]) + tol
        && p[1] >= a[1].min(b[1]) - tol
        && p[1] <= a[1].max(b[1]) + tol
}

fn segments_touch(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2], d: &[f64; 2], tol: f64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)) {
        return true;
    }
    on_segment(c, d, a, tol) || on_segment(c, d, b, tol) || on_segment(a, b, c, tol) || on_segment(a, b, d, tol)
}

fn scale2(uv: &[[f64; 2]]) -> f64 {
    let mut s: f64 = 0.0;
    for p in uv {
        s = s.max(p[0].abs()).max(p[1].abs());
    }
    s.max(f64::MIN_POSITIVE)
}

fn check_simple(uv: &[[f64; 2]]) -> Result<(), TriangulateError> {
    let n = uv.len();
    let s = scale2(uv);
    let tol = 1e-13 * s * s;
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_touch(&uv[i], &uv[(i + 1) % n], &uv[j], &uv[(j + 1) % n], tol) {
                return Err(TriangulateError::SelfIntersecting(i, j));
            }
        }
    }
    Ok(())
}

fn max_angle(pts: &[Point3], t: [usize; 3]) -> f64 {
    let a = geometry::triangle_angles(&pts[t[0]], &pts[t[1]], &pts[t[2]]);
    a[0].max(a[1]).max(a[2])
}

fn polygon_area2(uv: &[[f64; 2]], part: &[usize]) -> f64 {
    let m = part.len();
    (0..m).map(|k| {
        let p = &uv[part[k]];
        let q = &uv[part[(k + 1) % m]];
        p[0] * q[1] - p[1] * q[0]
    })
    .sum()
}

fn fan_min_max(pts: &[Point3], uv: &[[f64; 2]], part: &[usize]) -> Option<Vec<[usize; 3]>> {
    let m = part.len();
    if m == 3 {
        return Some(vec![[part[0], part[1], part[2]]]);
    }
    let area2 = polygon_area2(uv, part);
    let s = scale2(uv);
    let tol = 1e-12 * s * s;
    let mut best: Option<(f64, Vec<[usize; 3]>)> = None;
    for a in 0..m {
        let mut tris = Vec::with_capacity(m - 2);
        let mut sum = 0.0;
        let mut ok = true;
        for k in 1..m - 1 {
            let t = [part[a], part[(a + k) % m], part[(a + k + 1) % m]];
            let o = orient(&uv[t[0]], &uv[t[1]], &uv[t[2]]);
            if o <= tol {
                ok = false;
                break;
            }
            sum += o;
            tris.push(t);
        }
        if !ok || (sum - area2).abs() > 1e-10 * area2.abs() {
            continue;
        }
        let worst = tris.iter().map(|&t| max_angle(pts, t)).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(w, _)| worst < *w - 1e-14) {
            best = Some((worst, tris));
        }
    }
    best.map(|(_, t)| t)
}

fn point_in_polygon(uv: &[[f64; 2]], part: &[usize], p: &[f64; 2]) -> bool {
    let m = part.len();
    let mut inside = false;
    for k in 0..m {
        let a = &uv[part[k]];
        let b = &uv[part[(k + 1) % m]];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn dp_min_max(pts: &[Point3], uv: &[[f64; 2]], part: &[usize]) -> Option<Vec<[usize; 3]>> {
    let m = part.len();
    let s = scale2(uv);
    let tol = 1e-12 * s * s;
    let diag_ok = |i: usize, j: usize| -> bool {
        if j == i + 1 || (i == 0 && j == m - 1) {
            return true;
        }
        let (a, b) = (&uv[part[i]], &uv[part[j]]);
        for k in 0..m {
            let k2 = (k + 1) % m;
            if k == i || k == j || k2 == i || k2 == j {
                continue;
            }
            if segments_touch(a, b, &uv[part[k]], &uv[part[k2]], tol) {
                return false;
            }
        }
        let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
        point_in_polygon(uv, part, &mid)
    };
    let inf = f64::INFINITY;
    let mut cost = vec![vec![inf; m]; m];
    let mut split = vec![vec![usize::MAX; m]; m];
    for i in 0..m - 1 {
        cost[i][i + 1] = 0.0;
    }
    for len in 2..m {
        for i in 0..m - len {
            let j = i + len;
            if !diag_ok(i, j) {
                continue;
            }
            for k in i + 1..j {
                let t = [part[i], part[k], part[j]];
                if orient(&uv[t[0]], &uv[t[1]], &uv[t[2]]) <= tol {
                    continue;
                }
                let c = cost[i][k].max(cost[k][j]).max(max_angle(pts, t));
                if c < cost[i][j] {
                    cost[i][j] = c;
                    split[i][j] = k;
                }
            }
        }
    }
    if !cost[0][m - 1].is_finite() {
        return None;
    }
    let mut out = Vec::new();
    let mut stack = vec![(0, m - 1)];
    while let Some((i, j)) = stack.pop() {
        if j <= i + 1 {
            continue;
        }
        let k = split[i][j];
        out.push([part[i], part[k], part[j]]);
        stack.push((i, k));
        stack.push((k, j));
    }
    Some(out)
}
