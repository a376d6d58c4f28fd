//! Small vector helpers shared by every module.

use nalgebra::Vector3;

/// A point (or vector) in physical space.
pub type Point3 = Vector3<f64>;

pub fn tri_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Non-normalised normal `(b - a) x (c - a)`; its norm is twice the area.
pub fn tri_normal(a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    (b - a).cross(&(c - a))
}

pub fn tet_signed_volume(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

/// Newell normal of a closed polygon; its norm is twice the enclosed area
/// for a planar polygon.
pub fn polygon_normal(pts: &[Point3]) -> Point3 {
    let mut n = Point3::zeros();
    let m = pts.len();
    let Some(o) = pts.first() else { return n };
    for i in 1..m.saturating_sub(1) {
        n += (pts[i] - o).cross(&(pts[i + 1] - o));
    }
    n
}

pub fn centroid(pts: &[Point3]) -> Point3 {
    let mut c = Point3::zeros();
    for p in pts {
        c += p;
    }
    c / pts.len() as f64
}

/// Largest pairwise distance.
pub fn diameter(pts: &[Point3]) -> f64 {
    let mut d2: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d2 = d2.max((pts[i] - pts[j]).norm_squared());
        }
    }
    d2.sqrt()
}

/// Euclidean distance from `p` to the closed triangle `abc`.
pub fn point_triangle_distance(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> f64 {
    // Ericson, Real-Time Collision Detection, 5.1.5.
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}

/// Interior angles at `a`, `b`, `c` (radians). Degenerate input yields NaN
/// or zero entries; callers that care check the area first.
pub fn triangle_angles(a: &Point3, b: &Point3, c: &Point3) -> [f64; 3] {
    let angle = |p: &Point3, q: &Point3, r: &Point3| {
        let u = (q - p).normalize();
        let v = (r - p).normalize();
        u.dot(&v).clamp(-1.0, 1.0).acos()
    };
    [angle(a, b, c), angle(b, c, a), angle(c, a, b)]
}

/// Barycentric coordinates of `p` with respect to tetrahedron `t`.
pub fn tet_barycentric(p: &Point3, t: &[Point3; 4]) -> Option<[f64; 4]> {
    let m = nalgebra::Matrix3::from_columns(&[t[1] - t[0], t[2] - t[0], t[3] - t[0]]);
    let inv = m.try_inverse()?;
    let l = inv * (p - t[0]);
    Some([1.0 - l.x - l.y - l.z, l.x, l.y, l.z])
}
