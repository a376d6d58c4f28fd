use super::local::{stabilization_edge, stabilization_face};
use super::space::{Coefficients, ProjectionSpace};
use super::VemError;
use crate::geometry::{self, Point3};
use crate::mesh::PolyMesh;
use crate::quadrature::tet_rule;
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

/// Piecewise-linear mass matrix of the boundary triangulation.
pub fn boundary_mass(mesh: &PolyMesh, cell: usize) -> DMatrix<f64> {
    let k = &mesh.cells[cell];
    let dofs = mesh.cell_vertices(k);
    let mut m = DMatrix::zeros(dofs.len(), dofs.len());
    for t in mesh.cell_boundary_tris(k) {
        let p = t.map(|v| mesh.vertices[v]);
        let a = geometry::tri_area(&p[0], &p[1], &p[2]);
        let idx = t.map(|v| dofs.binary_search(&v).expect("cell DoF"));
        for i in 0..3 {
            for j in 0..3 {
                m[(idx[i], idx[j])] += if i == j { a / 6.0 } else { a / 12.0 };
            }
        }
    }
    m
}

/// Generalized eigenvalues of `a v = lambda b v` on `{v : w . v = 0}`,
/// ascending. `b` must be positive definite on that subspace.
fn eigen_on_subspace(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.nrows();
    let k = w.iamax();
    // Columns e_j - (w_j / w_k) e_k, j != k, span the subspace.
    let mut q = DMatrix::zeros(n, n - 1);
    for (c, j) in (0..n).filter(|&j| j != k).enumerate() {
        q[(j, c)] = 1.0;
        q[(k, c)] = -w[j] / w[k];
    }
    let aq = q.transpose() * a * &q;
    let bq = q.transpose() * b * &q;
    let bq = (&bq + bq.transpose()) * 0.5;
    let chol = bq.cholesky()?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&aq)?;
    let c = l.solve_lower_triangular(&x.transpose())?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Some(DVector::from_vec(ev))
}

/// Largest `lambda` with `M v = lambda h_K S v` on the boundary-mean-zero
/// subspace (`M` the boundary mass matrix, `S` the face stabilization).
/// Bounded by `5 kappa^2 N_T` under the path condition.
pub fn h2_rayleigh(mesh: &PolyMesh, cell: usize) -> Result<f64, VemError> {
    let m = boundary_mass(mesh, cell);
    let s = stabilization_face(mesh, cell) * mesh.cell_diameter(cell);
    let w = &m * DVector::from_element(m.nrows(), 1.0);
    let ev = eigen_on_subspace(&m, &s, &w).ok_or(VemError::SingularStabilization(cell))?;
    Ok(ev[ev.len() - 1])
}

/// Smallest `lambda` with `S_edge v = lambda S_face v` on the
/// boundary-mean-zero subspace.
pub fn stabilization_ratio_min(mesh: &PolyMesh, cell: usize) -> Result<f64, VemError> {
    let m = boundary_mass(mesh, cell);
    let w = &m * DVector::from_element(m.nrows(), 1.0);
    let ev = eigen_on_subspace(&stabilization_edge(mesh, cell), &stabilization_face(mesh, cell), &w)
        .ok_or(VemError::SingularStabilization(cell))?;
    Ok(ev[0])
}

/// Quasi-interpolant into the IFE space of an interface cell: the
/// L2 projection `P` of the minus-side extension `u_minus` onto linear
/// functions over the cell and its face neighbours, with the plus-side
/// gradient corrected so that the flux jump condition holds.
///
/// Returns the IFE coefficients `(P(x_K), p+)` for the cell's space.
pub fn quasi_interp_jk<F>(mesh: &PolyMesh, cell: usize, coef: &Coefficients, u_minus: F) -> Result<(ProjectionSpace, Vector4<f64>), VemError>
where
    F: Fn(&Point3) -> f64,
{
    let space = ProjectionSpace::for_cell(mesh, &mesh.cells[cell], coef)?;
    let ProjectionSpace::Ife { frame, .. } = &space else {
        return Err(VemError::NotInterface(cell));
    };
    let xk = frame.anchor;
    let rule = tet_rule(4).expect("degree 4 rule");
    let mut patch = vec![cell];
    patch.extend(mesh.face_neighbors(cell));
    let mut mass = Matrix4::zeros();
    let mut rhs = Vector4::zeros();
    for &c in &patch {
        for st in &mesh.cells[c].subtets {
            let v = st.v.map(|i| &mesh.vertices[i]);
            let vol = geometry::tet_signed_volume(v[0], v[1], v[2], v[3]).abs();
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let x = v[0] * l[0] + v[1] * l[1] + v[2] * l[2] + v[3] * l[3];
                let d = x - xk;
                let psi = Vector4::new(1.0, d.x, d.y, d.z);
                mass += psi * psi.transpose() * (w * vol);
                rhs += psi * (w * vol * u_minus(&x));
            }
        }
    }
    let a = mass.cholesky().ok_or_else(|| VemError::DegenerateCell { cell, reason: "singular patch mass matrix".into() })?.solve(&rhs);
    let n = frame.normal;
    let p_minus = Point3::new(a[1], a[2], a[3]);
    let ratio = coef.beta_minus / coef.beta_plus;
    let p_plus = p_minus + n * ((ratio - 1.0) * p_minus.dot(&n));
    Ok((space, Vector4::new(a[0], p_plus.x, p_plus.y, p_plus.z)))
}
