//! `anivem` command-line front end.
//!
//! Exit codes: 0 on success, 2 when `check` finds a violated mesh
//! assumption, 1 on any other error.

mod config;

use anivem::geomcheck::{check_a2, shape_report, ShapeParams, ShapeReport};
use anivem::mesh::{export_vtk, load_json, save_json, validate, Field, Material};
use anivem::solver::{convergence_study, errors, solve, MeshKind, Problem, ProblemKind, SolveOptions};
use anivem::vem::Coefficients;
use anivem::{par, Exec, Point3, PolyMesh};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use config::{load_file, MeshSource, RunConfig, Settings};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anivem", version, about = "Virtual element solver for anisotropic polyhedral meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh and write it as JSON (default mesh.json).
    Gen(CommandArgs),
    /// Validate a mesh and report per-cell shape quantities (default report.json).
    Check(CommandArgs),
    /// Solve one problem; writes VTK (default solution.vtk) and a summary JSON.
    Solve(CommandArgs),
    /// Run a convergence study; writes a CSV table (default table.csv).
    Converge(CommandArgs),
}

#[derive(clap::Args)]
struct CommandArgs {
    /// TOML or JSON file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

enum Outcome {
    Ok,
    CheckFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn resolve(args: CommandArgs) -> Result<RunConfig> {
    let base = match &args.config {
        Some(p) => load_file(p)?,
        None => Settings::default(),
    };
    RunConfig::resolve(args.settings.over(base))
}

fn run(command: Command) -> Result<Outcome> {
    let (cfg, f): (RunConfig, fn(&RunConfig, Exec) -> Result<Outcome>) = match command {
        Command::Gen(a) => (resolve(a)?, cmd_gen),
        Command::Check(a) => (resolve(a)?, cmd_check),
        Command::Solve(a) => (resolve(a)?, cmd_solve),
        Command::Converge(a) => (resolve(a)?, cmd_converge),
    };
    let exec = configure_threads(cfg.threads)?;
    f(&cfg, exec)
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> Result<Exec> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Ok(Exec::Sequential),
        Some(t) => {
            rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the thread pool")?;
            Ok(Exec::Parallel)
        }
        None => Ok(Exec::Parallel),
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) -> Result<Exec> {
    if threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    Ok(Exec::Sequential)
}

fn load_mesh(cfg: &RunConfig) -> Result<PolyMesh> {
    match &cfg.source {
        MeshSource::Generated(_) => cfg.scenario.build_mesh(cfg.n).map_err(|e| anyhow!("generating mesh: {e}")),
        MeshSource::File(p) => load_json(p).with_context(|| format!("loading mesh {}", p.display())),
    }
}

fn output(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| default.into())
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(cfg: &RunConfig, _exec: Exec) -> Result<Outcome> {
    let mesh = load_mesh(cfg)?;
    let report = validate(&mesh);
    if !report.is_empty() {
        bail!("generated mesh is invalid:\n{report}");
    }
    let out = output(cfg, "mesh.json");
    save_json(&mesh, &out)?;
    emit(&format!("wrote {} ({} cells, {} DoFs, h = {:.6e})\n", out.display(), mesh.cells.len(), mesh.num_dofs(), mesh.h()));
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct CheckReport {
    valid: bool,
    violations: Vec<String>,
    eps: f64,
    cells: usize,
    a2_failures: Vec<usize>,
    geometry_failures: Vec<String>,
    reports: Vec<ShapeReport>,
}

fn cmd_check(cfg: &RunConfig, exec: Exec) -> Result<Outcome> {
    let mesh = load_mesh(cfg)?;
    let validation = validate(&mesh);
    let violations: Vec<String> = validation.violations.iter().map(|v| format!("{:?}: {}", v.kind, v.message)).collect();
    let params = ShapeParams { eps: cfg.eps, ..Default::default() };
    let mut reports = Vec::new();
    let mut geometry_failures = Vec::new();
    if validation.is_empty() {
        for (c, r) in par::map_range(exec, mesh.cells.len(), |c| shape_report(&mesh, c, &params)).into_iter().enumerate() {
            match r {
                Ok(r) => reports.push(r),
                Err(e) => geometry_failures.push(format!("cell {c}: {e}")),
            }
        }
    }
    let a2_failures: Vec<usize> = reports.iter().filter(|r| !r.a2_ok).map(|r| r.cell).collect();
    let mut table = format!("{:>6} {:>8} {:>8} {:>4} {:>5} {:>6} {:>9} {:>8} {:>8}\n", "cell", "theta_M", "theta_m", "N_T", "A2", "A2'", "kappa", "inradius", "det/c_m");
    for r in &reports {
        let _ = writeln!(
            table,
            "{:>6} {:>8.3} {:>8.3} {:>4} {:>5} {:>6} {:>9.4} {:>8.4} {:>8.3}",
            r.cell,
            r.theta_max.to_degrees(),
            r.theta_min.to_degrees(),
            r.n_tris,
            r.a2_ok,
            r.a2prime_ok,
            r.kappa,
            r.inscribed_ratio,
            r.best_det / r.c_m
        );
    }
    emit(&table);
    for v in &violations {
        eprintln!("invalid mesh: {v}");
    }
    for g in &geometry_failures {
        eprintln!("geometry: {g}");
    }
    for &c in &a2_failures {
        let unreached = check_a2(&mesh, c, cfg.eps).unreached;
        eprintln!("cell {c}: path condition fails for eps = {}; unreached vertices {unreached:?}", cfg.eps);
    }
    let failed = !violations.is_empty() || !geometry_failures.is_empty() || !a2_failures.is_empty();
    let report = CheckReport { valid: violations.is_empty(), violations, eps: cfg.eps, cells: mesh.cells.len(), a2_failures, geometry_failures, reports };
    let out = output(cfg, "report.json");
    write(&out, &serde_json::to_string_pretty(&report)?)?;
    Ok(if failed { Outcome::CheckFailed } else { Outcome::Ok })
}

/// The problem for a mesh read from a file: no generator is known, so the
/// interface geometry comes straight from the configuration.
fn file_problem(cfg: &RunConfig) -> Result<Problem> {
    let sc = &cfg.scenario;
    let coef = Coefficients::new(sc.beta_minus, sc.beta_plus).map_err(|e| anyhow!("{e}"))?;
    Ok(match sc.problem {
        ProblemKind::Smooth => Problem::smooth(),
        ProblemKind::PatchLinear => Problem::patch_linear(1.0, Point3::new(1.0, 2.0, 3.0)),
        ProblemKind::SphereInterface => {
            let r0 = sc.r0.ok_or_else(|| anyhow!("--r0 is required for the sphere-interface problem on a mesh file"))?;
            Problem::sphere_interface(Point3::zeros(), r0, coef)
        }
        ProblemKind::PatchIfe => {
            Problem::patch_ife(Point3::from(sc.plane_normal), sc.plane_offset, coef, 0.5, Point3::new(1.0, -2.0, 0.5))
        }
    })
}

#[derive(Serialize)]
struct SolveSummary {
    mesh: String,
    problem: String,
    n: Option<usize>,
    cells: usize,
    ndof: usize,
    h: f64,
    stabilization: anivem::vem::Stabilization,
    beta_minus: f64,
    beta_plus: f64,
    cg_iterations: usize,
    cg_residual: f64,
    energy_error: Option<f64>,
    l2_error: Option<f64>,
}

fn cmd_solve(cfg: &RunConfig, exec: Exec) -> Result<Outcome> {
    let mesh = load_mesh(cfg)?;
    let (problem, mesh_name, n) = match &cfg.source {
        MeshSource::Generated(k) => (cfg.scenario.build_problem(cfg.n).map_err(|e| anyhow!("{e}"))?, kind_name(*k), Some(cfg.n)),
        MeshSource::File(p) => (file_problem(cfg)?, p.display().to_string(), None),
    };
    let opts = SolveOptions { stabilization: cfg.stabilization, tol: cfg.tol, max_iter: 0, exec };
    let sol = solve(&mesh, &problem, &opts).map_err(|e| anyhow!("{e}"))?;
    let err = errors(&mesh, &problem, &sol.ops, &sol.u, exec).ok();
    let summary = SolveSummary {
        mesh: mesh_name,
        problem: problem.name.clone(),
        n,
        cells: mesh.cells.len(),
        ndof: mesh.num_dofs(),
        h: mesh.h(),
        stabilization: cfg.stabilization,
        beta_minus: cfg.scenario.beta_minus,
        beta_plus: cfg.scenario.beta_plus,
        cg_iterations: sol.cg.iterations,
        cg_residual: sol.cg.residual,
        energy_error: err.map(|e| e.energy),
        l2_error: err.map(|e| e.l2),
    };
    let material: Vec<f64> = mesh
        .cells
        .iter()
        .map(|c| match c.tag {
            Material::Plus => 0.0,
            Material::Minus => 1.0,
            Material::Interface => 2.0,
        })
        .collect();
    let mut fields = vec![Field::cell("material", material), Field::point("u", sol.u.clone())];
    if problem.exact.is_some() {
        let exact = mesh.dof_vertices().iter().map(|&v| problem.exact_value(&mesh.vertices[v]).unwrap_or(0.0)).collect();
        fields.push(Field::point("u_exact", exact));
    }
    let out = output(cfg, "solution.vtk");
    export_vtk(&mesh, &fields, &out)?;
    let text = serde_json::to_string_pretty(&summary)?;
    let summary_path = cfg.summary.clone().unwrap_or_else(|| "summary.json".into());
    write(&summary_path, &text)?;
    emit(&format!("{text}\n"));
    Ok(Outcome::Ok)
}

fn kind_name(k: MeshKind) -> String {
    serde_json::to_value(k).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn cmd_converge(cfg: &RunConfig, exec: Exec) -> Result<Outcome> {
    if let MeshSource::File(p) = &cfg.source {
        bail!("converge needs a generated mesh family, not the file {}", p.display());
    }
    let levels: Vec<usize> = (0..cfg.levels).map(|k| cfg.n << k).collect();
    let opts = SolveOptions { stabilization: cfg.stabilization, tol: cfg.tol, max_iter: 0, exec };
    let report = convergence_study(&cfg.scenario, &levels, &opts).map_err(|e| anyhow!("{e}"))?;
    let csv = report.to_csv();
    let out = output(cfg, "table.csv");
    write(&out, &csv)?;
    emit(&csv);
    Ok(Outcome::Ok)
}
