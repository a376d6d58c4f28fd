use super::assemble::local_values;
use super::problem::Problem;
use super::SolverError;
use crate::geometry;
use crate::mesh::PolyMesh;
use crate::par::{self, Exec};
use crate::quadrature::tet_rule;
use crate::vem::LocalOperators;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `(sum_K int_K beta_h |grad u - grad Pi_K u_h|^2)^(1/2)`.
    pub energy: f64,
    /// `(sum_K int_K (u - Pi_K u_h)^2)^(1/2)`.
    pub l2: f64,
}

/// Errors of the projected discrete solution, by the degree-4 rule on the
/// sub-tetrahedra; each sub-tetrahedron uses the exact-solution branch and
/// coefficient of its own side.
pub fn errors(mesh: &PolyMesh, problem: &Problem, ops: &[LocalOperators], u: &[f64], exec: Exec) -> Result<ErrorNorms, SolverError> {
    let (Some(exact), Some(grad)) = (&problem.exact, &problem.exact_grad) else {
        return Err(SolverError::MissingExact);
    };
    let rule = tet_rule(4).expect("degree 4 rule");
    let per_cell = par::map_slice(exec, ops, |op| {
        let w = op.project(&local_values(mesh, op, u));
        let (mut e2, mut l2) = (0.0, 0.0);
        for st in &mesh.cells[op.cell].subtets {
            let v = st.v.map(|i| &mesh.vertices[i]);
            let vol = geometry::tet_signed_volume(v[0], v[1], v[2], v[3]).abs();
            let gh = op.space.gradient(&w, st.tag);
            let beta = op.space.beta(st.tag);
            for (l, wq) in rule.points.iter().zip(&rule.weights) {
                let x = v[0] * l[0] + v[1] * l[1] + v[2] * l[2] + v[3] * l[3];
                let du = exact(&x, st.tag) - op.space.value(&w, &x, st.tag);
                let dg = grad(&x, st.tag) - gh;
                e2 += wq * vol * beta * dg.norm_squared();
                l2 += wq * vol * du * du;
            }
        }
        (e2, l2)
    });
    let (e2, l2) = per_cell.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ErrorNorms { energy: e2.sqrt(), l2: l2.sqrt() })
}

pub fn energy_error(mesh: &PolyMesh, problem: &Problem, ops: &[LocalOperators], u: &[f64]) -> Result<f64, SolverError> {
    errors(mesh, problem, ops, u, Exec::default()).map(|e| e.energy)
}

pub fn l2_error(mesh: &PolyMesh, problem: &Problem, ops: &[LocalOperators], u: &[f64]) -> Result<f64, SolverError> {
    errors(mesh, problem, ops, u, Exec::default()).map(|e| e.l2)
}
