//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use anivem::geomcheck::{self, a2prime_eps, boundary_angles, c_m, check_a2, check_a5, cotangent_sides, inscribed_ratio, kappa, tet_max_angle};
use anivem::mesh::{validate, InterfaceFrame, Material, PolyMesh, Side};
use anivem::meshgen::SphereLevelSet;
use anivem::solver::{convergence_study, errors, solve, ConvergenceReport, MeshKind, ProblemKind, Scenario, SolveOptions};
use anivem::vem::{build_m_minus, h2_rayleigh, quasi_interp_jk, Coefficients, ProjectionSpace};
use anivem::Point3;
use nalgebra::{Matrix3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};
use std::time::{Duration, Instant};

const PATCH_TOL: f64 = 1e-9;
const ENERGY_ORDER_MIN: f64 = 0.9;
const L2_ORDER_MIN: f64 = 1.8;
const CONSTANT_TOL: f64 = 1e-12;
const MAX_ANGLE_CUT: f64 = 144.0;
const FRAME_TOL: f64 = 1e-10;
const IFE_TOL: f64 = 1e-12;
const COT_TOL: f64 = 1e-12;
const VOLUME_REL_TOL: f64 = 1e-10;
const A5_C: f64 = 2.0;
const INSCRIBED_MIN: f64 = 0.15;
const LEVELS: [usize; 4] = [4, 8, 16, 32];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Meshes produced along the way, kept for the cross-cutting criteria.
#[derive(Default)]
struct Generated {
    /// `(label, mesh, true when cut from a background mesh)`.
    meshes: Vec<(String, PolyMesh, bool)>,
    /// Meshes of the convergence criteria, for the eigenvalue bound.
    convergence: Vec<(String, PolyMesh)>,
    cut_cuboid: Vec<PolyMesh>,
    sphere: Vec<(usize, PolyMesh)>,
}

fn scenario(mesh: MeshKind, problem: ProblemKind, bm: f64, bp: f64) -> Scenario {
    Scenario { mesh, problem, beta_minus: bm, beta_plus: bp, ..Default::default() }
}

fn patch_tests(gen: &mut Generated) -> Outcome {
    let opts = SolveOptions { tol: 1e-14, ..Default::default() };
    let cases = [
        (MeshKind::Cube, ProblemKind::PatchLinear, 1.0, 1.0),
        (MeshKind::Tet, ProblemKind::PatchLinear, 1.0, 1.0),
        (MeshKind::Cutplane, ProblemKind::PatchLinear, 1.0, 1.0),
        (MeshKind::Notch, ProblemKind::PatchLinear, 1.0, 1.0),
        (MeshKind::SphereInterface, ProblemKind::PatchLinear, 1.0, 1.0),
        (MeshKind::PlaneInterface, ProblemKind::PatchIfe, 10.0, 1.0),
        (MeshKind::PlaneInterface, ProblemKind::PatchIfe, 1.0, 10.0),
        (MeshKind::Cutplane, ProblemKind::PatchIfe, 10.0, 1.0),
    ];
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (mk, pk, bm, bp) in cases {
        let sc = scenario(mk, pk, bm, bp);
        let label = format!("{mk:?}/{pk:?} beta {bm}/{bp}");
        let run = || -> Result<(f64, PolyMesh), String> {
            let mesh = sc.build_mesh(4).map_err(|e| e.to_string())?;
            let problem = sc.build_problem(4).map_err(|e| e.to_string())?;
            let sol = solve(&mesh, &problem, &opts).map_err(|e| e.to_string())?;
            let e = errors(&mesh, &problem, &sol.ops, &sol.u, opts.exec).map_err(|e| e.to_string())?;
            Ok((e.energy.max(e.l2), mesh))
        };
        match run() {
            Ok((err, mesh)) => {
                worst = worst.max(err);
                if err > PATCH_TOL {
                    failures.push(format!("{label}: {err:.2e}"));
                }
                let cut = matches!(mk, MeshKind::Cutplane | MeshKind::PlaneInterface | MeshKind::SphereInterface);
                gen.meshes.push((format!("patch {label}"), mesh, cut));
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    outcome(failures.is_empty(), format!("{} cases on n = 4, max error {worst:.2e} (tol {PATCH_TOL:.0e}) {}", cases.len(), failures.join("; ")))
}

fn rates(sc: &Scenario) -> Result<ConvergenceReport, String> {
    convergence_study(sc, &LEVELS, &SolveOptions::default()).map_err(|e| e.to_string())
}

fn rate_check(report: &ConvergenceReport) -> (bool, String) {
    let (eo, lo) = report.last_orders();
    let (eo, lo) = (eo.unwrap_or(f64::NAN), lo.unwrap_or(f64::NAN));
    let last = report.rows.last().expect("levels");
    (
        eo >= ENERGY_ORDER_MIN && lo >= L2_ORDER_MIN,
        format!("energy order {eo:.3} (>= {ENERGY_ORDER_MIN}), L2 order {lo:.3} (>= {L2_ORDER_MIN}), finest energy {:.3e} L2 {:.3e}", last.energy, last.l2),
    )
}

fn keep_meshes(gen: &mut Generated, sc: &Scenario, label: &str, cut: bool) -> Result<Vec<PolyMesh>, String> {
    let mut out = Vec::new();
    for n in LEVELS {
        let m = sc.build_mesh(n).map_err(|e| e.to_string())?;
        gen.meshes.push((format!("{label} n={n}"), m.clone(), cut));
        gen.convergence.push((format!("{label} n={n}"), m.clone()));
        out.push(m);
    }
    Ok(out)
}

fn cut_cuboids(gen: &mut Generated) -> Outcome {
    let sc = scenario(MeshKind::Cutplane, ProblemKind::Smooth, 1.0, 1.0);
    let report = match rates(&sc) {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    match keep_meshes(gen, &sc, "cut cuboids", true) {
        Ok(m) => gen.cut_cuboid = m,
        Err(e) => return outcome(false, e),
    }
    let (ok, detail) = rate_check(&report);
    outcome(ok, detail)
}

fn sphere(gen: &mut Generated) -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (bm, bp) in [(10.0, 1.0), (1.0, 10.0)] {
        let sc = scenario(MeshKind::SphereInterface, ProblemKind::SphereInterface, bm, bp);
        match rates(&sc) {
            Ok(r) => {
                let (pass, d) = rate_check(&r);
                ok &= pass;
                details.push(format!("ratio {}: {d}", bm / bp));
            }
            Err(e) => {
                ok = false;
                details.push(e);
            }
        }
    }
    let sc = scenario(MeshKind::SphereInterface, ProblemKind::SphereInterface, 1.0, 1.0);
    match keep_meshes(gen, &sc, "sphere", true) {
        Ok(m) => gen.sphere = LEVELS.iter().copied().zip(m).collect(),
        Err(e) => return outcome(false, e),
    }
    outcome(ok, details.join("; "))
}

fn notch(gen: &mut Generated) -> Outcome {
    let sc = scenario(MeshKind::Notch, ProblemKind::Smooth, 1.0, 1.0);
    let report = match rates(&sc) {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    let meshes = match keep_meshes(gen, &sc, "notch", false) {
        Ok(m) => m,
        Err(e) => return outcome(false, e),
    };
    let ratio = meshes
        .iter()
        .flat_map(|m| (0..m.cells.len()).map(move |c| inscribed_ratio(m, c)))
        .fold(f64::INFINITY, f64::min);
    let (ok, detail) = rate_check(&report);
    outcome(ok && ratio >= INSCRIBED_MIN, format!("{detail}, min inscribed ratio {ratio:.4} (>= {INSCRIBED_MIN})"))
}

fn h2_bound(gen: &Generated) -> Outcome {
    let (mut checked, mut skipped) = (0usize, 0usize);
    let mut worst_frac: f64 = 0.0;
    let mut failures = Vec::new();
    for (label, m) in &gen.convergence {
        for c in 0..m.cells.len() {
            if !check_a2(m, c, 1.0).ok {
                skipped += 1;
                continue;
            }
            let (_, theta_max) = boundary_angles(m, c);
            let nt = m.cell_boundary_tris(&m.cells[c]).len() as f64;
            let bound = match kappa(theta_max, 1.0) {
                Ok(k) => 5.0 * k * k * nt,
                Err(e) => {
                    failures.push(format!("{label} cell {c}: {e}"));
                    continue;
                }
            };
            match h2_rayleigh(m, c) {
                Ok(lam) => {
                    checked += 1;
                    worst_frac = worst_frac.max(lam / bound);
                    if !(lam < bound) {
                        failures.push(format!("{label} cell {c}: {lam:.4} vs {bound:.4}"));
                    }
                }
                Err(e) => failures.push(format!("{label} cell {c}: {e}")),
            }
        }
    }
    failures.truncate(5);
    outcome(
        failures.is_empty() && checked > 0,
        format!("{checked} cells checked ({skipped} fail the path condition), max lambda/bound {worst_frac:.4} {}", failures.join("; ")),
    )
}

fn constants(gen: &Generated) -> Outcome {
    let k = kappa(FRAC_PI_2, 1.0).map(|k| (k - 2.0 * 2f64.sqrt()).abs()).unwrap_or(f64::INFINITY);
    let e = (a2prime_eps(FRAC_PI_6, 1.0, FRAC_PI_2) - 3.0).abs();
    let c = (c_m(FRAC_PI_2) - 3f64.sqrt() / 4.0).abs();
    let theta = gen
        .cut_cuboid
        .iter()
        .flat_map(|m| (0..m.cells.len()).map(move |c| boundary_angles(m, c).1))
        .fold(0.0, f64::max)
        .to_degrees();
    let ok = k <= CONSTANT_TOL && e <= CONSTANT_TOL && c <= CONSTANT_TOL && theta <= MAX_ANGLE_CUT + 1e-9 && !gen.cut_cuboid.is_empty();
    outcome(ok, format!("|dkappa| {k:.1e}, |deps| {e:.1e}, |dc_m| {c:.1e} (tol {CONSTANT_TOL:.0e}); cut-cuboid max angle {theta:.4} deg (<= {MAX_ANGLE_CUT})"))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let v = Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn ife_structure(gen: &mut Generated) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut frame_err, mut cont_err, mut flux_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10_000 {
        let frame = InterfaceFrame::from_normal(random_unit(&mut rng), Point3::new(rng.random(), rng.random(), rng.random()));
        let bm = log_uniform(&mut rng, 0.01, 100.0);
        let bp = log_uniform(&mut rng, 0.01, 100.0);
        let (Ok(mm), Ok(mp)) =
            (build_m_minus(&frame.t1, &frame.t2, &frame.normal, bm, bp), build_m_minus(&frame.t1, &frame.t2, &frame.normal, bp, bm))
        else {
            return outcome(false, "frame construction failed".into());
        };
        frame_err = frame_err.max((mm * mp - Matrix3::identity()).abs().max());
        let coef = Coefficients::new(bm, bp).expect("positive coefficients");
        let space = ProjectionSpace::Ife { frame, m_minus: mm, coef };
        let x = frame.anchor + frame.t1 * rng.random_range(-1.0..1.0) + frame.t2 * rng.random_range(-1.0..1.0);
        for i in 0..4 {
            let mut w = Vector4::zeros();
            w[i] = 1.0;
            cont_err = cont_err.max((space.value(&w, &x, Side::Minus) - space.value(&w, &x, Side::Plus)).abs());
            let fm = bm * space.gradient(&w, Side::Minus).dot(&frame.normal);
            let fp = bp * space.gradient(&w, Side::Plus).dot(&frame.normal);
            flux_err = flux_err.max((fm - fp).abs() / bm.max(bp));
        }
    }
    let sc = Scenario { mesh: MeshKind::PlaneInterface, plane_normal: [0.3, -0.5, 0.8], plane_offset: 0.11, ..Default::default() };
    let mesh = match sc.build_mesh(4) {
        Ok(m) => m,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut jk_err: f64 = 0.0;
    let mut jk_cells = 0;
    for c in (0..mesh.cells.len()).filter(|&c| mesh.cells[c].tag == Material::Interface) {
        let coef = Coefficients::new(log_uniform(&mut rng, 0.1, 10.0), log_uniform(&mut rng, 0.1, 10.0)).expect("positive coefficients");
        let space = match ProjectionSpace::for_cell(&mesh, &mesh.cells[c], &coef) {
            Ok(s) => s,
            Err(e) => return outcome(false, e.to_string()),
        };
        let w = Vector4::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let extension = |x: &Point3| space.value(&w, x, Side::Minus);
        match quasi_interp_jk(&mesh, c, &coef, extension) {
            Ok((_, v)) => jk_err = jk_err.max((v - w).abs().max()),
            Err(e) => return outcome(false, e.to_string()),
        }
        jk_cells += 1;
    }
    gen.meshes.push(("tilted plane interface n=4".into(), mesh, true));
    let ok = frame_err <= FRAME_TOL && cont_err <= IFE_TOL && flux_err <= IFE_TOL && jk_cells > 0 && jk_err <= IFE_TOL;
    outcome(
        ok,
        format!(
            "10000 frames: |M-M+ - I| {frame_err:.1e} (tol {FRAME_TOL:.0e}), continuity {cont_err:.1e}, flux jump {flux_err:.1e}; JK on {jk_cells} cells {jk_err:.1e} (tol {IFE_TOL:.0e})"
        ),
    )
}

fn cotangent_and_degeneracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pt = |rng: &mut ChaCha8Rng| Point3::new(rng.random(), rng.random(), rng.random());
    let mut cot_err: f64 = 0.0;
    let mut tris = 0;
    while tris < 1000 {
        let p = [pt(&mut rng), pt(&mut rng), pt(&mut rng)];
        if anivem::geometry::tri_area(&p[0], &p[1], &p[2]) < 1e-3 {
            continue;
        }
        let g = Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (l, r) = cotangent_sides(&p, &g);
        cot_err = cot_err.max((l - r).abs() / l.abs().max(1.0));
        tris += 1;
    }
    let mut tets = 0;
    let mut worst_margin = f64::INFINITY;
    let mut draws = 0;
    while tets < 1000 && draws < 1_000_000 {
        draws += 1;
        let p = [pt(&mut rng), pt(&mut rng), pt(&mut rng), pt(&mut rng)];
        let theta = tet_max_angle(&p);
        if !(theta <= 2.0 * PI / 3.0) {
            continue;
        }
        let mut dirs = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                dirs.push((p[j] - p[i]).normalize());
            }
        }
        worst_margin = worst_margin.min(geomcheck::best_edge_det(&dirs) - c_m(theta));
        tets += 1;
    }
    outcome(
        cot_err <= COT_TOL && tets == 1000 && worst_margin >= 0.0,
        format!("1000 triangles, cotangent residual {cot_err:.1e} (tol {COT_TOL:.0e}); {tets} tetrahedra, min best_det - c_m {worst_margin:.4}"),
    )
}

fn conservation(gen: &Generated) -> Outcome {
    let mut invalid = Vec::new();
    let mut worst_vol: f64 = 0.0;
    for (label, m, cut) in &gen.meshes {
        let r = validate(m);
        if !r.is_empty() {
            invalid.push(label.clone());
        }
        if *cut {
            let domain = if label.starts_with("sphere") || label.contains("SphereInterface") { 8.0 } else { 1.0 };
            worst_vol = worst_vol.max((m.total_volume() - domain).abs() / domain);
        }
    }
    let mut a5 = Vec::new();
    let mut a5_ok = true;
    for (n, m) in &gen.sphere {
        if 2.0 / (*n as f64) > 1.0 / 8.0 {
            continue;
        }
        let sc = Scenario::default();
        let phi = SphereLevelSet { center: Point3::zeros(), radius: sc.sphere_radius(*n) };
        match check_a5(&phi, m, A5_C) {
            Ok(s) => {
                a5_ok &= s.ok;
                a5.push(format!("n={n} dist/h^2 {:.3}", s.max_distance / (s.h * s.h)));
            }
            Err(e) => {
                a5_ok = false;
                a5.push(e.to_string());
            }
        }
    }
    outcome(
        invalid.is_empty() && worst_vol <= VOLUME_REL_TOL && a5_ok && !a5.is_empty(),
        format!(
            "{} meshes validated ({} invalid{}), volume defect {worst_vol:.1e} (tol {VOLUME_REL_TOL:.0e}), A5 with C = {A5_C}: {}",
            gen.meshes.len(),
            invalid.len(),
            if invalid.is_empty() { String::new() } else { format!(": {}", invalid.join(", ")) },
            a5.join(", ")
        ),
    )
}

fn main() {
    // libtest-style arguments (filters, --nocapture, ...) are accepted and ignored.
    let mut gen = Generated::default();
    let mut results: Vec<(u8, &str, Outcome, Duration)> = Vec::new();
    let mut run = |id: u8, name: &'static str, f: &mut dyn FnMut(&mut Generated) -> Outcome| {
        let t = Instant::now();
        let o = f(&mut gen);
        let dt = t.elapsed();
        println!("criterion {id} [{}] {name}: {} ({:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail.trim_end(), dt.as_secs_f64());
        results.push((id, name, o, dt));
    };
    run(1, "patch tests", &mut patch_tests);
    run(2, "cut-cuboid convergence", &mut cut_cuboids);
    run(3, "sphere interface convergence", &mut sphere);
    run(4, "notch convergence", &mut notch);
    run(5, "H2 eigenvalue bound", &mut |g| h2_bound(g));
    run(6, "geometric constants", &mut |g| constants(g));
    run(7, "IFE structure", &mut ife_structure);
    run(8, "cotangent identity and degeneracy", &mut |_| cotangent_and_degeneracy());
    run(9, "validation and conservation", &mut |g| conservation(g));
    let failed: Vec<u8> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
