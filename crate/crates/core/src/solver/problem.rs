use crate::geometry::Point3;
use crate::mesh::Side;
use crate::vem::Coefficients;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&Point3, Side) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point3, Side) -> Point3 + Send + Sync>;
pub type SideFn = Arc<dyn Fn(&Point3) -> Side + Send + Sync>;

/// `-div(beta grad u) = f` with Dirichlet data. Scalar callables take the
/// side whose formula should be used, so piecewise solutions can be
/// evaluated as smooth extensions across the interface.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub coef: Coefficients,
    pub f: ScalarFn,
    pub exact: Option<ScalarFn>,
    pub exact_grad: Option<VectorFn>,
    /// Side of a point with respect to the exact interface.
    pub side_of: SideFn,
    /// Dirichlet data; defaults to the exact solution, or zero without one.
    pub dirichlet: Option<Arc<dyn Fn(&Point3) -> f64 + Send + Sync>>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem").field("name", &self.name).field("coef", &self.coef).finish_non_exhaustive()
    }
}

fn plus_everywhere() -> SideFn {
    Arc::new(|_| Side::Plus)
}

impl Problem {
    /// Exact solution at `x` on its true side.
    pub fn exact_value(&self, x: &Point3) -> Option<f64> {
        self.exact.as_ref().map(|u| u(x, (self.side_of)(x)))
    }

    pub fn boundary_value(&self, x: &Point3) -> f64 {
        match (&self.dirichlet, &self.exact) {
            (Some(g), _) => g(x),
            (None, Some(u)) => u(x, (self.side_of)(x)),
            (None, None) => 0.0,
        }
    }

    /// `u = sin(pi x) sin(pi y) sin(pi z)`, `beta = 1`, on the unit cube.
    pub fn smooth() -> Self {
        let u = |x: &Point3| (PI * x.x).sin() * (PI * x.y).sin() * (PI * x.z).sin();
        Problem {
            name: "smooth".into(),
            coef: Coefficients::uniform(1.0),
            f: Arc::new(move |x, _| 3.0 * PI * PI * u(x)),
            exact: Some(Arc::new(move |x, _| u(x))),
            exact_grad: Some(Arc::new(|x, _| {
                let (s, c) = ((PI * x).map(f64::sin), (PI * x).map(f64::cos));
                Point3::new(c.x * s.y * s.z, s.x * c.y * s.z, s.x * s.y * c.z) * PI
            })),
            side_of: plus_everywhere(),
            dirichlet: None,
        }
    }

    /// Radial solution around a sphere of radius `r0`:
    /// `u- = r^3 / beta-`, `u+ = (r^3 - r0^3) / beta+ + r0^3 / beta-`,
    /// `f = -12 r` on both sides (minus inside).
    pub fn sphere_interface(center: Point3, r0: f64, coef: Coefficients) -> Self {
        let (bm, bp) = (coef.beta_minus, coef.beta_plus);
        let r03 = r0.powi(3);
        Problem {
            name: "sphere-interface".into(),
            coef,
            f: Arc::new(move |x, _| -12.0 * (x - center).norm()),
            exact: Some(Arc::new(move |x, side| {
                let r3 = (x - center).norm().powi(3);
                match side {
                    Side::Minus => r3 / bm,
                    Side::Plus => (r3 - r03) / bp + r03 / bm,
                }
            })),
            exact_grad: Some(Arc::new(move |x, side| {
                let d = x - center;
                d * (3.0 * d.norm() / if side == Side::Minus { bm } else { bp })
            })),
            side_of: Arc::new(move |x| if (x - center).norm() < r0 { Side::Minus } else { Side::Plus }),
            dirichlet: None,
        }
    }

    /// Linear `u = c0 + grad . x` with `beta = 1` and `f = 0`.
    pub fn patch_linear(c0: f64, grad: Point3) -> Self {
        Problem {
            name: "patch-linear".into(),
            coef: Coefficients::uniform(1.0),
            f: Arc::new(|_, _| 0.0),
            exact: Some(Arc::new(move |x, _| c0 + grad.dot(x))),
            exact_grad: Some(Arc::new(move |_, _| grad)),
            side_of: plus_everywhere(),
            dirichlet: None,
        }
    }

    /// Global piecewise-linear function across the plane `normal . x = offset`
    /// satisfying both jump conditions: gradient `p_plus` on the plus side
    /// and `M- p_plus` on the minus side, value `c0` at the plane point
    /// `offset * normal`.
    pub fn patch_ife(normal: Point3, offset: f64, coef: Coefficients, c0: f64, p_plus: Point3) -> Self {
        let n = normal.normalize();
        let d = offset / normal.norm();
        let x0 = n * d;
        let p_minus = p_plus + n * ((coef.beta_plus / coef.beta_minus - 1.0) * p_plus.dot(&n));
        let grad = move |side: Side| if side == Side::Minus { p_minus } else { p_plus };
        Problem {
            name: "patch-ife".into(),
            coef,
            f: Arc::new(|_, _| 0.0),
            exact: Some(Arc::new(move |x, side| c0 + grad(side).dot(&(x - x0)))),
            exact_grad: Some(Arc::new(move |_, side| grad(side))),
            side_of: Arc::new(move |x| if n.dot(x) - d < 0.0 { Side::Minus } else { Side::Plus }),
            dirichlet: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_solution_jump_conditions() {
        let c = Point3::new(0.1, -0.2, 0.3);
        let coef = Coefficients::new(10.0, 1.0).unwrap();
        let p = Problem::sphere_interface(c, 0.55, coef);
        let u = p.exact.as_ref().unwrap();
        let g = p.exact_grad.as_ref().unwrap();
        for k in 0..50 {
            let t = k as f64 * 0.37;
            let dir = Point3::new(t.cos() * (2.0 * t).sin(), t.sin() * (2.0 * t).sin(), (2.0 * t).cos());
            let x = c + dir * 0.55;
            assert!((u(&x, Side::Minus) - u(&x, Side::Plus)).abs() < 1e-8);
            let fm = coef.beta_minus * g(&x, Side::Minus).dot(&dir);
            let fp = coef.beta_plus * g(&x, Side::Plus).dot(&dir);
            assert!((fm - fp).abs() < 1e-8);
        }
    }

    #[test]
    fn sphere_source_matches_laplacian() {
        // Central differences of beta u on each side reproduce -f.
        let coef = Coefficients::new(2.0, 5.0).unwrap();
        let p = Problem::sphere_interface(Point3::zeros(), 0.5, coef);
        let u = p.exact.as_ref().unwrap();
        let h = 1e-3;
        for (x, side) in [(Point3::new(0.1, 0.2, -0.15), Side::Minus), (Point3::new(0.6, -0.3, 0.4), Side::Plus)] {
            let mut lap = 0.0;
            for a in 0..3 {
                let mut e = Point3::zeros();
                e[a] = h;
                lap += (u(&(x + e), side) - 2.0 * u(&x, side) + u(&(x - e), side)) / (h * h);
            }
            let beta = coef.on(side);
            assert!((-beta * lap - (p.f)(&x, side)).abs() < 1e-5);
        }
    }

    #[test]
    fn ife_patch_function_is_continuous_with_flux_match() {
        let n = Point3::new(0.3, -0.5, 0.8);
        let coef = Coefficients::new(10.0, 1.0).unwrap();
        let p = Problem::patch_ife(n, 0.4, coef, 0.2, Point3::new(1.0, 2.0, -1.0));
        let u = p.exact.as_ref().unwrap();
        let g = p.exact_grad.as_ref().unwrap();
        let nn = n.normalize();
        let x0 = nn * (0.4 / n.norm());
        let t = nn.cross(&Point3::x()).normalize();
        let x = x0 + t * 0.3;
        assert!((u(&x, Side::Minus) - u(&x, Side::Plus)).abs() < 1e-14);
        let jump = coef.beta_minus * g(&x, Side::Minus).dot(&nn) - coef.beta_plus * g(&x, Side::Plus).dot(&nn);
        assert!(jump.abs() < 1e-13);
    }
}
