use super::VemError;
use crate::geometry::{self, Point3};
use crate::mesh::{Cell, InterfaceFrame, Material, PolyMesh, Side};
use nalgebra::{Matrix3, Vector4};

/// Piecewise-constant diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub beta_minus: f64,
    pub beta_plus: f64,
}

impl Coefficients {
    pub fn new(beta_minus: f64, beta_plus: f64) -> Result<Self, VemError> {
        if !(beta_minus > 0.0 && beta_plus > 0.0 && beta_minus.is_finite() && beta_plus.is_finite()) {
            return Err(VemError::BadCoefficient(beta_minus, beta_plus));
        }
        Ok(Coefficients { beta_minus, beta_plus })
    }

    pub fn uniform(beta: f64) -> Self {
        Coefficients { beta_minus: beta, beta_plus: beta }
    }

    pub fn on(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.beta_minus,
            Side::Plus => self.beta_plus,
        }
    }
}

impl Default for Coefficients {
    fn default() -> Self {
        Coefficients::uniform(1.0)
    }
}

/// `M-` maps a plus-side gradient to the minus-side gradient that has the
/// same tangential part and a continuous flux `beta n . grad`.
pub fn build_m_minus(t1: &Point3, t2: &Point3, n: &Point3, beta_minus: f64, beta_plus: f64) -> Result<Matrix3<f64>, VemError> {
    let f = Matrix3::from_columns(&[*t1, *t2, *n]);
    let dev = (f.transpose() * f - Matrix3::identity()).abs().max();
    if dev > 1e-10 || f.determinant() < 0.0 {
        return Err(VemError::NonOrthonormalFrame(dev));
    }
    if !(beta_minus > 0.0 && beta_plus > 0.0) {
        return Err(VemError::BadCoefficient(beta_minus, beta_plus));
    }
    let a = Matrix3::from_columns(&[*t1, *t2, n * beta_minus]);
    let b = Matrix3::from_columns(&[*t1, *t2, n * beta_plus]);
    let a_inv_t = a.transpose().try_inverse().ok_or(VemError::NonOrthonormalFrame(dev))?;
    Ok(a_inv_t * b.transpose())
}

/// The projection space `W_h(K)`. Coefficients are `(c, p)` with
/// `w(x) = c + (G p) . (x - anchor)`, where `G` is the identity except on
/// the minus side of an interface cell, where it is `M-`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionSpace {
    P1 { center: Point3, beta: f64 },
    Ife { frame: InterfaceFrame, m_minus: Matrix3<f64>, coef: Coefficients },
}

impl ProjectionSpace {
    /// The space used on `cell`: IFE on interface cells, linear otherwise.
    pub fn for_cell(mesh: &PolyMesh, cell: &Cell, coef: &Coefficients) -> Result<Self, VemError> {
        match (cell.tag, mesh.interface_frame(cell)) {
            (Material::Interface, Some(frame)) => {
                let m_minus = build_m_minus(&frame.t1, &frame.t2, &frame.normal, coef.beta_minus, coef.beta_plus)?;
                Ok(ProjectionSpace::Ife { frame, m_minus, coef: *coef })
            }
            (tag, _) => {
                let pts: Vec<Point3> = mesh.cell_vertices(cell).iter().map(|&v| mesh.vertices[v]).collect();
                let beta = if tag == Material::Minus { coef.beta_minus } else { coef.beta_plus };
                Ok(ProjectionSpace::P1 { center: geometry::centroid(&pts), beta })
            }
        }
    }

    pub fn anchor(&self) -> Point3 {
        match self {
            ProjectionSpace::P1 { center, .. } => *center,
            ProjectionSpace::Ife { frame, .. } => frame.anchor,
        }
    }

    /// Side of `x` with respect to the cell's interface plane (always plus
    /// for the linear space).
    pub fn side(&self, x: &Point3) -> Side {
        match self {
            ProjectionSpace::P1 { .. } => Side::Plus,
            ProjectionSpace::Ife { frame, .. } => frame.side(x),
        }
    }

    pub fn beta(&self, side: Side) -> f64 {
        match self {
            ProjectionSpace::P1 { beta, .. } => *beta,
            ProjectionSpace::Ife { coef, .. } => coef.on(side),
        }
    }

    /// Gradient transport `G` on `side`.
    pub fn transport(&self, side: Side) -> Matrix3<f64> {
        match (self, side) {
            (ProjectionSpace::Ife { m_minus, .. }, Side::Minus) => *m_minus,
            _ => Matrix3::identity(),
        }
    }

    /// Values of the four basis functions at `x` on `side`.
    pub fn eval(&self, x: &Point3, side: Side) -> Vector4<f64> {
        let g = self.transport(side).transpose() * (x - self.anchor());
        Vector4::new(1.0, g.x, g.y, g.z)
    }

    /// Gradient of the function with coefficients `coef` on `side`.
    pub fn gradient(&self, coef: &Vector4<f64>, side: Side) -> Point3 {
        self.transport(side) * Point3::new(coef[1], coef[2], coef[3])
    }

    pub fn value(&self, coef: &Vector4<f64>, x: &Point3, side: Side) -> f64 {
        coef.dot(&self.eval(x, side))
    }
}
