//! Run configuration: built-in defaults, then a TOML/JSON file, then flags.

use anivem::solver::{MeshKind, ProblemKind, Scenario};
use anivem::vem::Stabilization;
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Settings shared by all subcommands. Every field is optional so that a
/// config file and the command line can be layered.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Mesh kind (cube, tet, cutplane, sphere-interface, plane-interface,
    /// notch) or a path to a mesh JSON file.
    #[arg(long, alias = "kind")]
    pub mesh: Option<String>,
    /// Cells per axis of the background lattice (coarsest level for `converge`).
    #[arg(long)]
    pub n: Option<usize>,
    /// Cut or interface plane "nx,ny,nz,d" meaning n . x = d.
    #[arg(long, value_parser = parse_plane)]
    pub plane: Option<Plane>,
    /// Sphere radius; defaults to 0.5 + h/7 with h the lattice spacing.
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub notch_depth: Option<f64>,
    #[arg(long)]
    pub notch_width: Option<f64>,
    /// smooth, sphere-interface, patch-linear or patch-ife.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub beta_minus: Option<f64>,
    #[arg(long)]
    pub beta_plus: Option<f64>,
    /// Path-condition parameter of `check`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// face or edge.
    #[arg(long)]
    pub stabilization: Option<String>,
    /// Relative CG residual target.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of refinement levels of `converge` (n, 2n, 4n, ...).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Worker threads; falls back to ANIVEM_THREADS.
    #[arg(long, env = "ANIVEM_THREADS")]
    pub threads: Option<usize>,
    /// Primary output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON of `solve`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Plane(pub [f64; 4]);

fn parse_plane(s: &str) -> Result<Plane, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| format!("bad plane '{s}': {e}"))?;
    let a: [f64; 4] = v.try_into().map_err(|_| format!("plane '{s}' needs 4 comma-separated numbers"))?;
    Ok(Plane(a))
}

impl TryFrom<String> for Plane {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        parse_plane(&s)
    }
}

impl From<Plane> for String {
    fn from(p: Plane) -> String {
        format!("{},{},{},{}", p.0[0], p.0[1], p.0[2], p.0[3])
    }
}

impl Settings {
    /// Fields set here win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            mesh: self.mesh.or(base.mesh),
            n: self.n.or(base.n),
            plane: self.plane.or(base.plane),
            r0: self.r0.or(base.r0),
            notch_depth: self.notch_depth.or(base.notch_depth),
            notch_width: self.notch_width.or(base.notch_width),
            problem: self.problem.or(base.problem),
            beta_minus: self.beta_minus.or(base.beta_minus),
            beta_plus: self.beta_plus.or(base.beta_plus),
            eps: self.eps.or(base.eps),
            stabilization: self.stabilization.or(base.stabilization),
            tol: self.tol.or(base.tol),
            levels: self.levels.or(base.levels),
            threads: self.threads.or(base.threads),
            out: self.out.or(base.out),
            summary: self.summary.or(base.summary),
        }
    }
}

/// Reads a config file; `.json` files are JSON, anything else is tried as
/// TOML first and JSON second.
pub fn load_file(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        return serde_json::from_str(&text).with_context(|| format!("parsing JSON config {}", path.display()));
    }
    match toml::from_str(&text) {
        Ok(s) => Ok(s),
        Err(toml_err) => serde_json::from_str(&text)
            .map_err(|_| anyhow::Error::new(toml_err))
            .with_context(|| format!("parsing config {} (neither TOML nor JSON)", path.display())),
    }
}

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generated(MeshKind),
    File(PathBuf),
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: MeshSource,
    pub scenario: Scenario,
    pub n: usize,
    pub eps: f64,
    pub stabilization: Stabilization,
    pub tol: f64,
    pub levels: usize,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<RunConfig> {
        let mesh = s.mesh.unwrap_or_else(|| "cube".into());
        let source = match mesh.parse::<MeshKind>() {
            Ok(k) => MeshSource::Generated(k),
            Err(_) if mesh.ends_with(".json") || Path::new(&mesh).exists() => MeshSource::File(mesh.into()),
            Err(e) => bail!("{e} (expected a mesh kind or a mesh JSON file)"),
        };
        let problem = match s.problem.as_deref() {
            None => ProblemKind::Smooth,
            Some(p) => p.parse::<ProblemKind>().map_err(anyhow::Error::msg)?,
        };
        let stabilization = match s.stabilization.as_deref() {
            None | Some("face") => Stabilization::Face,
            Some("edge") => Stabilization::Edge,
            Some(other) => bail!("unknown stabilization '{other}' (face or edge)"),
        };
        let mut scenario = Scenario { problem, r0: s.r0, ..Default::default() };
        if let MeshSource::Generated(k) = source {
            scenario.mesh = k;
        }
        if let Some(Plane([a, b, c, d])) = s.plane {
            scenario.plane_normal = [a, b, c];
            scenario.plane_offset = d;
        }
        scenario.beta_minus = s.beta_minus.unwrap_or(1.0);
        scenario.beta_plus = s.beta_plus.unwrap_or(1.0);
        if !(scenario.beta_minus > 0.0 && scenario.beta_plus > 0.0) {
            bail!("coefficients must be positive, got beta- = {}, beta+ = {}", scenario.beta_minus, scenario.beta_plus);
        }
        scenario.notch_depth = s.notch_depth.unwrap_or(scenario.notch_depth);
        scenario.notch_width = s.notch_width.unwrap_or(scenario.notch_width);
        let n = s.n.unwrap_or(4);
        if n == 0 {
            bail!("--n must be at least 1");
        }
        let tol = s.tol.unwrap_or(1e-10);
        if !(tol > 0.0) {
            bail!("--tol must be positive");
        }
        let eps = s.eps.unwrap_or(1.0);
        if !(eps >= 0.0) {
            bail!("--eps must be non-negative");
        }
        Ok(RunConfig {
            source,
            scenario,
            n,
            eps,
            stabilization,
            tol,
            levels: s.levels.unwrap_or(4),
            threads: s.threads,
            out: s.out,
            summary: s.summary,
        })
    }
}
