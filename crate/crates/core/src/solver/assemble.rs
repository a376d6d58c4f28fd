use super::cg::{solve_cg, CgInfo};
use super::problem::Problem;
use super::sparse::CsrMatrix;
use super::SolverError;
use crate::geometry::Point3;
use crate::mesh::PolyMesh;
use crate::par::{self, Exec};
use crate::vem::{local_load, local_stiffness, LocalOperators, Stabilization};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub stabilization: Stabilization,
    /// Relative residual target of CG.
    pub tol: f64,
    /// CG iteration cap; `0` means ten times the number of unknowns.
    pub max_iter: usize,
    pub exec: Exec,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { stabilization: Stabilization::Face, tol: 1e-10, max_iter: 0, exec: Exec::default() }
    }
}

/// Global stiffness matrix and load vector over all DoFs.
#[derive(Debug, Clone)]
pub struct System {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub ops: Vec<LocalOperators>,
}

fn global_dofs(mesh: &PolyMesh, ops: &LocalOperators) -> Vec<usize> {
    ops.dofs.iter().map(|&v| mesh.dof_of_vertex(v).expect("cell vertex is a DoF")).collect()
}

/// Builds all local operators (in parallel when `opts.exec` allows) and
/// scatters them in cell order.
pub fn assemble(mesh: &PolyMesh, problem: &Problem, opts: &SolveOptions) -> Result<System, SolverError> {
    let results = par::map_range(opts.exec, mesh.cells.len(), |c| {
        local_stiffness(mesh, c, &problem.coef, opts.stabilization).map(|ops| {
            let b = local_load(mesh, &ops, |x, side| (problem.f)(x, side));
            (ops, b)
        })
    });
    let mut failures = Vec::new();
    let mut locals = Vec::with_capacity(results.len());
    for (c, r) in results.into_iter().enumerate() {
        match r {
            Ok(x) => locals.push(x),
            Err(e) => failures.push((c, e)),
        }
    }
    if !failures.is_empty() {
        return Err(SolverError::Cells(failures));
    }
    let maps: Vec<Vec<usize>> = locals.iter().map(|(ops, _)| global_dofs(mesh, ops)).collect();
    let n = mesh.num_dofs();
    let mut matrix = CsrMatrix::from_groups(n, maps.iter().map(|m| m.as_slice()));
    let mut rhs = vec![0.0; n];
    for ((ops, b), map) in locals.iter().zip(&maps) {
        for (i, &gi) in map.iter().enumerate() {
            rhs[gi] += b[i];
            for (j, &gj) in map.iter().enumerate() {
                matrix.add(gi, gj, ops.stiffness[(i, j)]);
            }
        }
    }
    Ok(System { matrix, rhs, ops: locals.into_iter().map(|(ops, _)| ops).collect() })
}

/// System restricted to the free DoFs after fixing boundary values.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Free DoF ids, ascending.
    pub free: Vec<usize>,
    /// Full DoF vector holding the boundary values (zero on free DoFs).
    pub values: Vec<f64>,
}

impl ReducedSystem {
    /// Full DoF vector from the free-DoF solution.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut u = self.values.clone();
        for (k, &i) in self.free.iter().enumerate() {
            u[i] = x[k];
        }
        u
    }
}

/// Fixes every boundary DoF to `g` at its vertex and eliminates it
/// symmetrically (the known columns move to the right-hand side).
pub fn apply_dirichlet<G: Fn(&Point3) -> f64>(system: &System, mesh: &PolyMesh, g: G) -> ReducedSystem {
    let n = mesh.num_dofs();
    let mut fixed = vec![false; n];
    let mut values = vec![0.0; n];
    for &v in &mesh.boundary_dofs {
        if let Some(d) = mesh.dof_of_vertex(v) {
            fixed[d] = true;
            values[d] = g(&mesh.vertices[v]);
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let rhs = free
        .iter()
        .map(|&i| system.rhs[i] - system.matrix.row(i).filter(|&(j, _)| fixed[j]).map(|(j, a)| a * values[j]).sum::<f64>())
        .collect();
    ReducedSystem { matrix: system.matrix.submatrix(&free), rhs, free, values }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// DoF values (DoF order of the mesh).
    pub u: Vec<f64>,
    pub ops: Vec<LocalOperators>,
    pub cg: CgInfo,
    /// Unconstrained system, kept for diagnostics.
    pub system: System,
}

pub fn solve(mesh: &PolyMesh, problem: &Problem, opts: &SolveOptions) -> Result<Solution, SolverError> {
    let system = assemble(mesh, problem, opts)?;
    let reduced = apply_dirichlet(&system, mesh, |x| problem.boundary_value(x));
    let max_iter = if opts.max_iter == 0 { 10 * reduced.free.len().max(10) } else { opts.max_iter };
    let (x, cg) = solve_cg(&reduced.matrix, &reduced.rhs, opts.tol, max_iter, opts.exec)?;
    let u = reduced.expand(&x);
    let ops = system.ops.clone();
    Ok(Solution { u, ops, cg, system })
}

/// Local DoF values of cell `ops.cell` extracted from a global vector.
pub(crate) fn local_values(mesh: &PolyMesh, ops: &LocalOperators, u: &[f64]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(ops.dofs.len(), ops.dofs.iter().map(|&v| u[mesh.dof_of_vertex(v).expect("DoF")]))
}
