use super::assemble::{solve, SolveOptions};
use super::norms::errors;
use super::problem::Problem;
use super::SolverError;
use crate::geometry::Point3;
use crate::mesh::{validate, PolyMesh};
use crate::meshgen::{self, cube_mesh, cut_by_levelset, cut_by_plane, notch_mesh, tet_mesh, unit_box, Aabb, CutPlane};
use crate::vem::Coefficients;
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    /// Cuboids on the unit cube.
    Cube,
    /// Kuhn tetrahedra on the unit cube.
    Tet,
    /// Cuboids on the unit cube split by the scenario plane.
    Cutplane,
    /// Tetrahedra on `[-1, 1]^3` with an unfitted sphere about the origin.
    SphereInterface,
    /// Tetrahedra on the unit cube with the scenario plane as unfitted interface.
    PlaneInterface,
    /// Notched cells with slot-filling key cells on the unit cube.
    Notch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Smooth,
    SphereInterface,
    PatchLinear,
    PatchIfe,
}

macro_rules! kebab_from_str {
    ($t:ty, $what:literal) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown {} '{}'", $what, s))
            }
        }
    };
}
kebab_from_str!(MeshKind, "mesh kind");
kebab_from_str!(ProblemKind, "problem");

/// A mesh family paired with a model problem, instantiated per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub mesh: MeshKind,
    pub problem: ProblemKind,
    /// Plane `normal . x = offset` (not necessarily normalised).
    pub plane_normal: [f64; 3],
    pub plane_offset: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// Sphere radius; defaults to `0.5 + h / 7` with `h = 2 / n`.
    pub r0: Option<f64>,
    pub notch_depth: f64,
    pub notch_width: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            mesh: MeshKind::Cube,
            problem: ProblemKind::Smooth,
            plane_normal: [1.0, 1.0, 1.0],
            plane_offset: 1.5 + 1e-4,
            beta_minus: 1.0,
            beta_plus: 1.0,
            r0: None,
            notch_depth: 0.4,
            notch_width: 0.4,
        }
    }
}

pub(crate) fn sphere_box() -> Aabb {
    Aabb { lo: Point3::new(-1.0, -1.0, -1.0), hi: Point3::new(1.0, 1.0, 1.0) }
}

impl Scenario {
    pub fn cut_plane(&self) -> Result<CutPlane, SolverError> {
        Ok(CutPlane::new(Point3::from(self.plane_normal), self.plane_offset)?)
    }

    pub fn sphere_radius(&self, n: usize) -> f64 {
        self.r0.unwrap_or(0.5 + 2.0 / n as f64 / 7.0)
    }

    pub fn coefficients(&self) -> Result<Coefficients, SolverError> {
        Coefficients::new(self.beta_minus, self.beta_plus).map_err(|e| SolverError::Study(e.to_string()))
    }

    pub fn build_mesh(&self, n: usize) -> Result<PolyMesh, SolverError> {
        Ok(match self.mesh {
            MeshKind::Cube => cube_mesh(n, unit_box())?,
            MeshKind::Tet => tet_mesh(n, unit_box())?,
            MeshKind::Cutplane => cut_by_plane(&cube_mesh(n, unit_box())?, &self.cut_plane()?)?,
            MeshKind::SphereInterface => {
                let phi = meshgen::SphereLevelSet { center: Point3::zeros(), radius: self.sphere_radius(n) };
                cut_by_levelset(&tet_mesh(n, sphere_box())?, &phi)?
            }
            MeshKind::PlaneInterface => {
                let p = self.cut_plane()?;
                cut_by_levelset(&tet_mesh(n, unit_box())?, &meshgen::PlaneLevelSet { normal: p.normal, offset: p.offset })?
            }
            MeshKind::Notch => notch_mesh(n, self.notch_depth, self.notch_width)?,
        })
    }

    pub fn build_problem(&self, n: usize) -> Result<Problem, SolverError> {
        Ok(match self.problem {
            ProblemKind::Smooth => Problem::smooth(),
            ProblemKind::PatchLinear => Problem::patch_linear(1.0, Point3::new(1.0, 2.0, 3.0)),
            ProblemKind::SphereInterface => {
                if self.mesh != MeshKind::SphereInterface {
                    return Err(SolverError::Study("the sphere-interface problem needs the sphere-interface mesh".into()));
                }
                Problem::sphere_interface(Point3::zeros(), self.sphere_radius(n), self.coefficients()?)
            }
            ProblemKind::PatchIfe => {
                if !matches!(self.mesh, MeshKind::PlaneInterface | MeshKind::Cutplane) {
                    return Err(SolverError::Study("the patch-ife problem needs a plane-interface or cutplane mesh".into()));
                }
                let p = self.cut_plane()?;
                Problem::patch_ife(p.normal, p.offset, self.coefficients()?, 0.5, Point3::new(1.0, -2.0, 0.5))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub ndof: usize,
    pub energy: f64,
    pub l2: f64,
    /// Observed orders against the previous row; `None` on the first row
    /// and when both errors are at round-off level.
    pub energy_order: Option<f64>,
    pub l2_order: Option<f64>,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

/// Errors below this are treated as exact reproduction.
const EXACT: f64 = 1e-12;

fn order(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    if e0 < EXACT && e1 < EXACT {
        None
    } else {
        Some((e0 / e1).ln() / (h0 / h1).ln())
    }
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,ndof,energy_err,energy_order,l2_err,l2_order\n");
        let fmt_order = |i: usize, o: Option<f64>| match (i, o) {
            (0, _) => String::new(),
            (_, Some(o)) => format!("{o:.4}"),
            (_, None) => "exact".into(),
        };
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{:.6e},{},{:.6e},{},{:.6e},{}",
                r.h,
                r.ndof,
                r.energy,
                fmt_order(i, r.energy_order),
                r.l2,
                fmt_order(i, r.l2_order)
            );
        }
        s
    }

    pub fn last_orders(&self) -> (Option<f64>, Option<f64>) {
        self.rows.last().map_or((None, None), |r| (r.energy_order, r.l2_order))
    }
}

/// Generates, validates, assembles, solves and measures the scenario on
/// each `n` in `levels` (at least three, `h` decreasing).
pub fn convergence_study(scenario: &Scenario, levels: &[usize], opts: &SolveOptions) -> Result<ConvergenceReport, SolverError> {
    if levels.len() < 3 {
        return Err(SolverError::Study(format!("need at least 3 levels, got {}", levels.len())));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::Study("levels must be strictly increasing".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in levels {
        let mesh = scenario.build_mesh(n)?;
        let report = validate(&mesh);
        if !report.is_empty() {
            return Err(SolverError::Study(format!("level n = {n}: generated mesh is invalid: {report}")));
        }
        let problem = scenario.build_problem(n)?;
        let sol = solve(&mesh, &problem, opts)?;
        let e = errors(&mesh, &problem, &sol.ops, &sol.u, opts.exec)?;
        let (energy_order, l2_order) = match rows.last() {
            Some(p) => (order(p.energy, e.energy, p.h, mesh.h()), order(p.l2, e.l2, p.h, mesh.h())),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            h: mesh.h(),
            ndof: mesh.num_dofs(),
            energy: e.energy,
            l2: e.l2,
            energy_order,
            l2_order,
            cg_iterations: sol.cg.iterations,
        });
    }
    Ok(ConvergenceReport { rows })
}
