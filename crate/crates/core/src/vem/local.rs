use super::space::{Coefficients, ProjectionSpace};
use super::VemError;
use crate::geometry::{self, Point3};
use crate::mesh::{PolyMesh, Side};
use crate::quadrature::tet_rule;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};
use serde::{Deserialize, Serialize};

/// Stabilization variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stabilization {
    /// Surface gradients on the boundary triangles.
    #[default]
    Face,
    /// Tangential derivatives along the face-polygon edges.
    Edge,
}

/// Local operators of one cell. Matrices are indexed by the cell's local
/// DoFs (`dofs`, ascending vertex ids).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperators {
    pub cell: usize,
    pub dofs: Vec<usize>,
    pub space: ProjectionSpace,
    /// DoF values to `W_h` coefficients (4 x n).
    pub d: DMatrix<f64>,
    /// Coefficient-weighted gradient Gram matrix of `W_h` (constant row and
    /// column are zero).
    pub gram: Matrix4<f64>,
    /// DoF values to DoF samples of the projection (n x n).
    pub p: DMatrix<f64>,
    pub consistency: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Condition number of the gradient Gram matrix when it exceeds 1e12.
    pub condition: Option<f64>,
}

impl LocalOperators {
    /// Coefficients of the projection of the local DoF values `v`.
    pub fn project(&self, v: &DVector<f64>) -> Vector4<f64> {
        let c = &self.d * v;
        Vector4::new(c[0], c[1], c[2], c[3])
    }
}

fn local_index(dofs: &[usize], v: usize) -> usize {
    dofs.binary_search(&v).expect("triangle vertex is a cell DoF")
}

/// Projection matrix `D` (4 x n), the gradient Gram matrix and its
/// condition number when above 1e12.
pub fn projection(
    mesh: &PolyMesh,
    cell: usize,
    space: &ProjectionSpace,
) -> Result<(DMatrix<f64>, Matrix3<f64>, Option<f64>), VemError> {
    let k = &mesh.cells[cell];
    let dofs = mesh.cell_vertices(k);
    let n = dofs.len();
    let h = mesh.cell_diameter(cell);
    let mut gram = Matrix3::zeros();
    for side in [Side::Plus, Side::Minus] {
        let vol = match space {
            ProjectionSpace::P1 { .. } => {
                if side == Side::Plus {
                    mesh.cell_subtet_volume(k, None)
                } else {
                    0.0
                }
            }
            ProjectionSpace::Ife { .. } => mesh.cell_subtet_volume(k, Some(side)),
        };
        let g = space.transport(side);
        gram += g.transpose() * g * (space.beta(side) * vol);
    }
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let (lmin, lmax) = (eig.min(), eig.max());
    if !(lmin > 1e-14 * lmax.max(f64::MIN_POSITIVE)) || !(lmax > 1e-300 * h.powi(3)) {
        return Err(VemError::DegenerateCell { cell, reason: format!("singular gradient Gram matrix (eigenvalues {lmin:.3e}, {lmax:.3e})") });
    }
    let cond = lmax / lmin;
    let lu = gram.lu();

    let anchor = space.anchor();
    let mut rhs = DMatrix::<f64>::zeros(3, n);
    let mut mass = DVector::<f64>::zeros(n);
    let mut moment = Vector3::zeros();
    let mut area_total = 0.0;
    for t in mesh.cell_boundary_tris(k) {
        let p = t.map(|v| mesh.vertices[v]);
        let na = (p[1] - p[0]).cross(&(p[2] - p[0])) * 0.5;
        let area = na.norm();
        let xbar = geometry::centroid(&p);
        let side = space.side(&xbar);
        let gt = space.transport(side).transpose();
        let flux = gt * na * (space.beta(side) / 3.0);
        moment += gt * (xbar - anchor) * area;
        area_total += area;
        for &v in &t {
            let i = local_index(&dofs, v);
            for r in 0..3 {
                rhs[(r, i)] += flux[r];
            }
            mass[i] += area / 3.0;
        }
    }
    let mut d = DMatrix::<f64>::zeros(4, n);
    for i in 0..n {
        let b = Vector3::new(rhs[(0, i)], rhs[(1, i)], rhs[(2, i)]);
        let p = lu.solve(&b).ok_or_else(|| VemError::DegenerateCell { cell, reason: "projection solve failed".into() })?;
        d[(0, i)] = (mass[i] - moment.dot(&p)) / area_total;
        for r in 0..3 {
            d[(r + 1, i)] = p[r];
        }
    }
    Ok((d, gram, (cond > 1e12).then_some(cond)))
}

/// `h_K sum_T (grad_T phi_i, grad_T phi_j)_T` over the boundary triangles.
pub fn stabilization_face(mesh: &PolyMesh, cell: usize) -> DMatrix<f64> {
    let k = &mesh.cells[cell];
    let dofs = mesh.cell_vertices(k);
    let h = mesh.cell_diameter(cell);
    let mut s = DMatrix::zeros(dofs.len(), dofs.len());
    for t in mesh.cell_boundary_tris(k) {
        let p = t.map(|v| mesh.vertices[v]);
        let area = geometry::tri_area(&p[0], &p[1], &p[2]);
        let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
        let idx = t.map(|v| local_index(&dofs, v));
        for a in 0..3 {
            for b in 0..3 {
                s[(idx[a], idx[b])] += h * e[a].dot(&e[b]) / (4.0 * area);
            }
        }
    }
    s
}

/// `h_K^2 sum_e (d_t phi_i, d_t phi_j)_e` over the face-polygon edges.
pub fn stabilization_edge(mesh: &PolyMesh, cell: usize) -> DMatrix<f64> {
    let k = &mesh.cells[cell];
    let dofs = mesh.cell_vertices(k);
    let h = mesh.cell_diameter(cell);
    let mut s = DMatrix::zeros(dofs.len(), dofs.len());
    for [a, b] in mesh.cell_edges(k) {
        let w = h * h / (mesh.vertices[a] - mesh.vertices[b]).norm();
        let (i, j) = (local_index(&dofs, a), local_index(&dofs, b));
        s[(i, i)] += w;
        s[(j, j)] += w;
        s[(i, j)] -= w;
        s[(j, i)] -= w;
    }
    s
}

/// Local stiffness `D^T G D + (I - P)^T S (I - P)`.
pub fn local_stiffness(mesh: &PolyMesh, cell: usize, coef: &Coefficients, stab: Stabilization) -> Result<LocalOperators, VemError> {
    let k = &mesh.cells[cell];
    let space = ProjectionSpace::for_cell(mesh, k, coef)?;
    let (d, g3, condition) = projection(mesh, cell, &space)?;
    let dofs = mesh.cell_vertices(k);
    let n = dofs.len();
    let mut e = DMatrix::zeros(n, 4);
    for (i, &v) in dofs.iter().enumerate() {
        let x = mesh.vertices[v];
        let row = space.eval(&x, space.side(&x));
        for c in 0..4 {
            e[(i, c)] = row[c];
        }
    }
    let p = &e * &d;
    let mut gram = Matrix4::zeros();
    gram.fixed_view_mut::<3, 3>(1, 1).copy_from(&g3);
    let gd = DMatrix::from_fn(4, 4, |i, j| gram[(i, j)]);
    let consistency = d.transpose() * &gd * &d;
    let s = match stab {
        Stabilization::Face => stabilization_face(mesh, cell),
        Stabilization::Edge => stabilization_edge(mesh, cell),
    };
    let imp = DMatrix::identity(n, n) - &p;
    let stabilization = imp.transpose() * &s * &imp;
    let a = &consistency + &stabilization;
    let stiffness = (&a + a.transpose()) * 0.5;
    Ok(LocalOperators { cell, dofs, space, d, gram, p, consistency, stabilization, stiffness, condition })
}

/// `b_i = (f, Pi phi_i)_K` with the degree-2 rule on the sub-tetrahedra;
/// `f` receives the side of the sub-tetrahedron.
pub fn local_load<F>(mesh: &PolyMesh, ops: &LocalOperators, f: F) -> DVector<f64>
where
    F: Fn(&Point3, Side) -> f64,
{
    let rule = tet_rule(2).expect("degree 2 rule");
    let mut q = Vector4::zeros();
    for st in &mesh.cells[ops.cell].subtets {
        let v = st.v.map(|i| &mesh.vertices[i]);
        let vol = geometry::tet_signed_volume(v[0], v[1], v[2], v[3]).abs();
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = v[0] * l[0] + v[1] * l[1] + v[2] * l[2] + v[3] * l[3];
            q += ops.space.eval(&x, st.tag) * (w * vol * f(&x, st.tag));
        }
    }
    let qd = DVector::from_column_slice(q.as_slice());
    ops.d.transpose() * qd
}

/// Samples `u` at the cell's DoF vertices.
pub fn interpolate_boundary<F: Fn(&Point3) -> f64>(mesh: &PolyMesh, cell: usize, u: F) -> DVector<f64> {
    let dofs = mesh.cell_vertices(&mesh.cells[cell]);
    DVector::from_iterator(dofs.len(), dofs.iter().map(|&v| u(&mesh.vertices[v])))
}
