use anivem::geomcheck::*;
use anivem::meshgen::*;
use anivem::{Exec, Point3};
use proptest::prelude::*;
use std::f64::consts::PI;

fn cut_cubes() -> anivem::PolyMesh {
    cut_by_plane(&cube_mesh(4, unit_box()).unwrap(), &CutPlane::new(Point3::new(1.0, 1.0, 1.0), 1.5001).unwrap()).unwrap()
}

#[test]
fn reports_agree_across_execution_policies() {
    let m = cut_cubes();
    let p = ShapeParams::default();
    let a = shape_reports(&m, &p, Exec::Sequential).unwrap();
    let b = shape_reports(&m, &p, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), m.cells.len());
    for r in &a {
        assert!(r.theta_max <= 0.8 * PI + 1e-12);
        assert!(r.best_det >= r.c_m);
        assert_eq!(r.poincare_bound.is_some(), r.a2_ok);
    }
}

#[test]
fn report_serializes_without_paths() {
    let m = notch_element(0.4, 0.4).unwrap();
    let r = shape_report(&m, 0, &ShapeParams::default()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in ["theta_max", "theta_min", "n_tris", "a2_ok", "a2prime_ok", "eps", "kappa", "poincare_bound", "inscribed_ratio", "best_det", "c_m"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v.get("a2_paths").is_none());
    assert!(r.inscribed_ratio >= 0.15);
}

#[test]
fn path_witnesses_end_on_the_largest_triangle() {
    let m = notch_element(0.4, 0.4).unwrap();
    let check = check_a2(&m, 0, 1.0);
    assert!(check.ok);
    let tris = m.cell_boundary_tris(&m.cells[0]);
    let big = tris[check.t_max];
    for (v, path) in &check.paths {
        assert_eq!(path.first(), Some(v));
        assert!(big.contains(path.last().unwrap()));
    }
    assert_eq!(check.paths.len(), m.cell_vertices(&m.cells[0]).len());
}

#[test]
fn local_condition_gives_its_eps() {
    let m = cube_mesh(1, unit_box()).unwrap();
    let (ok, eps) = check_a2prime(&m, 0, PI / 4.0, 1.0);
    assert!(ok);
    assert!((eps.unwrap() - a2prime_eps(PI / 4.0, 1.0, PI / 2.0)).abs() < 1e-12);
    assert!(!check_a2prime(&m, 0, PI / 3.0, 1.0).0);
}

#[test]
fn kappa_rejects_out_of_range_angles() {
    assert!(matches!(kappa(PI, 1.0), Err(GeomError::AngleOutOfRange(_))));
    assert!(kappa(0.0, 1.0).is_err());
    assert!(kappa(2.0, 1.0).unwrap() < kappa(2.5, 1.0).unwrap());
}

#[test]
fn strip_check_scales_with_constant() {
    let phi = SphereLevelSet { center: Point3::new(0.5, 0.5, 0.5), radius: 0.3 };
    let m = cut_by_levelset(&tet_mesh(8, unit_box()).unwrap(), &phi).unwrap();
    let s = check_a5(&phi, &m, 2.0).unwrap();
    assert!(s.ok && s.max_distance > 0.0);
    assert!(!check_a5(&phi, &m, 1e-3 * s.max_distance / (s.h * s.h)).unwrap().ok);
    let plane = PlaneLevelSet { normal: Point3::new(0.0, 0.6, 0.8), offset: 0.7 };
    let mp = cut_by_levelset(&tet_mesh(4, unit_box()).unwrap(), &plane).unwrap();
    assert!(check_a5(&plane, &mp, 2.0).unwrap().max_distance < 1e-12);
}

#[test]
fn degenerate_triangles_are_reported() {
    let a = Point3::zeros();
    assert!(matches!(tri_angles(&a, &Point3::x(), &(Point3::x() * 2.0)), Err(GeomError::DegenerateTriangle { .. })));
    let (lo, hi) = tri_angles(&a, &Point3::x(), &Point3::y()).unwrap();
    assert!((lo - PI / 4.0).abs() < 1e-14 && (hi - PI / 2.0).abs() < 1e-14);
}

#[test]
fn poincare_bound_needs_the_path_condition() {
    let m = cube_mesh(1, unit_box()).unwrap();
    let b = poincare_bound(&m, 0, 1.0).unwrap();
    assert!((b - 5f64.sqrt() * kappa(PI / 2.0, 1.0).unwrap() * 3f64.sqrt() * 12f64.sqrt()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn cotangent_identity_holds(
        p in proptest::array::uniform9(-1.0f64..1.0),
        g in proptest::array::uniform3(-2.0f64..2.0),
    ) {
        let t = [Point3::new(p[0], p[1], p[2]), Point3::new(p[3], p[4], p[5]), Point3::new(p[6], p[7], p[8])];
        prop_assume!(anivem::geometry::tri_area(&t[0], &t[1], &t[2]) > 1e-2);
        let (l, r) = cotangent_sides(&t, &Point3::new(g[0], g[1], g[2]));
        prop_assert!((l - r).abs() <= 1e-11 * l.abs().max(1.0));
    }

    #[test]
    fn unit_tet_directions_pass_degeneracy_bound(s in 0.5f64..2.0) {
        let t = [Point3::zeros(), Point3::x() * s, Point3::y() * s, Point3::z() * s];
        let theta = tet_max_angle(&t);
        let mut dirs = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                dirs.push((t[j] - t[i]).normalize());
            }
        }
        prop_assert!((theta - PI / 2.0).abs() < 1e-12);
        prop_assert!(best_edge_det(&dirs) >= c_m(theta));
    }
}

#[test]
fn notch_element_satisfies_path_condition() {
    for (d, w) in [(0.25, 0.25), (0.4, 0.4), (0.45, 0.1)] {
        let m = notch_element(d, w).unwrap();
        assert!(check_a2(&m, 0, 2.0).ok, "{d} {w}");
    }
}
