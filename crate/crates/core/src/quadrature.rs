//! Symmetric quadrature on triangles and tetrahedra, and integration over
//! cells and cell boundaries through their stored decompositions.
//!
//! Points are barycentric; weights are normalised to sum to one so a rule is
//! applied to a simplex `S` as `|S| * sum_q w_q f(x_q)`.

use crate::geometry::{tet_signed_volume, tri_area, Point3};
use crate::mesh::{Cell, PolyMesh, Side};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("no {simplex} rule of degree {degree} (supported: 1..=4)")]
    UnsupportedDegree { simplex: &'static str, degree: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<const B: usize> {
    pub points: Vec<[f64; B]>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

pub type TriRule = QuadRule<3>;
pub type TetRule = QuadRule<4>;

fn perms3(a: f64, b: f64, c: f64) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::new();
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn perms4(v: [f64; 4]) -> Vec<[f64; 4]> {
    let mut out: Vec<[f64; 4]> = Vec::new();
    let idx = [0usize, 1, 2, 3];
    for &i in &idx {
        for &j in &idx {
            for &k in &idx {
                for &l in &idx {
                    if i != j && i != k && i != l && j != k && j != l && k != l {
                        let p = [v[i], v[j], v[k], v[l]];
                        if !out.contains(&p) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Triangle rule exact for total degree `degree` (1..=4).
pub fn tri_rule(degree: usize) -> Result<TriRule, QuadratureError> {
    match degree {
        1 => Ok(QuadRule { points: vec![[1.0 / 3.0; 3]], weights: vec![1.0], degree: 1 }),
        2 => {
            let points = perms3(2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0);
            Ok(QuadRule { weights: vec![1.0 / 3.0; points.len()], points, degree: 2 })
        }
        3 | 4 => {
            // Dunavant, degree 4, six points.
            let a = 0.445_948_490_915_964_886_32;
            let b = 0.091_576_213_509_770_743_46;
            let wa = 0.223_381_589_678_011_465_70;
            let wb = 0.109_951_743_655_321_867_64;
            let mut points = perms3(1.0 - 2.0 * a, a, a);
            let mut weights = vec![wa; points.len()];
            let pb = perms3(1.0 - 2.0 * b, b, b);
            weights.extend(std::iter::repeat_n(wb, pb.len()));
            points.extend(pb);
            Ok(QuadRule { points, weights, degree: 4 })
        }
        _ => Err(QuadratureError::UnsupportedDegree { simplex: "triangle", degree }),
    }
}

/// Tetrahedron rule exact for total degree `degree` (1..=4). Requests for
/// degree 3 or 4 return a positive-weight 14-point rule of degree 5.
pub fn tet_rule(degree: usize) -> Result<TetRule, QuadratureError> {
    match degree {
        1 => Ok(QuadRule { points: vec![[0.25; 4]], weights: vec![1.0], degree: 1 }),
        2 => {
            let a = 0.138_196_601_125_010_5;
            let b = 1.0 - 3.0 * a;
            let points = perms4([b, a, a, a]);
            Ok(QuadRule { weights: vec![0.25; 4], points, degree: 2 })
        }
        3 | 4 => {
            let a1 = 0.310_885_919_263_300_609_80;
            let a2 = 0.092_735_250_310_891_226_402;
            let b = 0.045_503_704_125_649_649_492;
            let w1 = 0.112_687_925_718_015_85;
            let w2 = 0.073_493_043_116_361_949;
            let w3 = 0.042_546_020_777_081_467;
            let mut points = Vec::with_capacity(14);
            let mut weights = Vec::with_capacity(14);
            for (set, w) in [
                (perms4([1.0 - 3.0 * a1, a1, a1, a1]), w1),
                (perms4([1.0 - 3.0 * a2, a2, a2, a2]), w2),
                (perms4([0.5 - b, 0.5 - b, b, b]), w3),
            ] {
                weights.extend(std::iter::repeat_n(w, set.len()));
                points.extend(set);
            }
            Ok(QuadRule { points, weights, degree: 5 })
        }
        _ => Err(QuadratureError::UnsupportedDegree { simplex: "tetrahedron", degree }),
    }
}

impl TriRule {
    pub fn integrate<F: FnMut(&Point3) -> f64>(&self, v: [&Point3; 3], mut f: F) -> f64 {
        let area = tri_area(v[0], v[1], v[2]);
        let mut s = 0.0;
        for (l, w) in self.points.iter().zip(&self.weights) {
            let x = v[0] * l[0] + v[1] * l[1] + v[2] * l[2];
            s += w * f(&x);
        }
        area * s
    }
}

impl TetRule {
    pub fn integrate<F: FnMut(&Point3) -> f64>(&self, v: [&Point3; 4], mut f: F) -> f64 {
        let vol = tet_signed_volume(v[0], v[1], v[2], v[3]).abs();
        let mut s = 0.0;
        for (l, w) in self.points.iter().zip(&self.weights) {
            let x = v[0] * l[0] + v[1] * l[1] + v[2] * l[2] + v[3] * l[3];
            s += w * f(&x);
        }
        vol * s
    }
}

/// `int_K f`, summed over the cell's sub-tetrahedra. `f` receives the side
/// tag of the sub-tetrahedron so interface cells can branch on it.
pub fn integrate_cell<F>(mesh: &PolyMesh, cell: &Cell, degree: usize, mut f: F) -> Result<f64, QuadratureError>
where
    F: FnMut(&Point3, Side) -> f64,
{
    let rule = tet_rule(degree)?;
    let mut s = 0.0;
    for st in &cell.subtets {
        let v = st.v.map(|i| &mesh.vertices[i]);
        s += rule.integrate(v, |x| f(x, st.tag));
    }
    Ok(s)
}

/// `int_{dK} f` over the cell's boundary triangulation.
pub fn integrate_boundary<F>(mesh: &PolyMesh, cell: &Cell, degree: usize, mut f: F) -> Result<f64, QuadratureError>
where
    F: FnMut(&Point3) -> f64,
{
    let rule = tri_rule(degree)?;
    let mut s = 0.0;
    for t in mesh.cell_boundary_tris(cell) {
        let v = t.map(|i| &mesh.vertices[i]);
        s += rule.integrate(v, &mut f);
    }
    Ok(s)
}
