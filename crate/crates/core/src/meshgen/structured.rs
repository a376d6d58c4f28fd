use super::builder::Builder;
use super::MeshGenError;
use crate::geometry::{tet_signed_volume, Point3};
use crate::mesh::{Cell, Material, PolyMesh, Side, SubTet};

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Point3,
    pub hi: Point3,
}

pub fn unit_box() -> Aabb {
    Aabb { lo: Point3::zeros(), hi: Point3::new(1.0, 1.0, 1.0) }
}

impl Aabb {
    pub fn volume(&self) -> f64 {
        let d = self.hi - self.lo;
        d.x * d.y * d.z
    }

    /// Lattice point `(i, j, k)` of an `n`-subdivision, offset by local
    /// fractions inside the lattice cell. Computed the same way everywhere
    /// so shared points have identical bits.
    pub(crate) fn lattice(&self, n: usize, ijk: [usize; 3], frac: [f64; 3]) -> Point3 {
        let d = self.hi - self.lo;
        let c = |a: usize, f: f64, lo: f64, len: f64| {
            let t = (a as f64 + f) / n as f64;
            if t == 1.0 {
                lo + len
            } else {
                lo + len * t
            }
        };
        Point3::new(c(ijk[0], frac[0], self.lo.x, d.x), c(ijk[1], frac[1], self.lo.y, d.y), c(ijk[2], frac[2], self.lo.z, d.z))
    }
}

/// Outward face loops of a hexahedron given its corners indexed by
/// `dx + 2 dy + 4 dz`.
pub(crate) const HEX_FACES: [[usize; 4]; 6] = [
    [0, 4, 6, 2], // x = 0
    [1, 3, 7, 5], // x = 1
    [0, 1, 5, 4], // y = 0
    [2, 6, 7, 3], // y = 1
    [0, 2, 3, 1], // z = 0
    [4, 5, 7, 6], // z = 1
];

/// Five-tetrahedron split of a hexahedron (same corner indexing).
pub(crate) const HEX_TETS: [[usize; 4]; 5] = [[0, 1, 2, 4], [3, 1, 2, 7], [5, 1, 4, 7], [6, 2, 4, 7], [1, 2, 4, 7]];

pub(crate) fn box_subtets(corners: &[usize; 8], tag: Side) -> Vec<SubTet> {
    HEX_TETS.iter().map(|t| SubTet { v: t.map(|i| corners[i]), tag }).collect()
}

/// Adds an axis-aligned hexahedral cell with two-triangle faces.
pub(crate) fn push_hex(b: &mut Builder, corners: [usize; 8], tag: Material) {
    let c = b.next_cell();
    let faces = HEX_FACES
        .iter()
        .map(|f| {
            let l = f.map(|i| corners[i]);
            b.face(c, l.to_vec(), Some(vec![[l[0], l[1], l[2]], [l[0], l[2], l[3]]])).expect("explicit triangles")
        })
        .collect();
    let side = if tag == Material::Minus { Side::Minus } else { Side::Plus };
    b.cells.push(Cell { faces, tag, subtets: box_subtets(&corners, side), interface: None });
}

/// `n^3` cuboid cells on `domain`, each face split into two triangles and
/// each cell into five tetrahedra.
pub fn cube_mesh(n: usize, domain: Aabb) -> Result<PolyMesh, MeshGenError> {
    if n == 0 {
        return Err(MeshGenError::Parameter("n must be at least 1".into()));
    }
    let mut b = Builder::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let corners = std::array::from_fn(|c| {
                    let ijk = [i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)];
                    b.vertex(domain.lattice(n, ijk, [0.0; 3]))
                });
                push_hex(&mut b, corners, Material::Plus);
            }
        }
    }
    Ok(b.finish())
}

/// Kuhn (Freudenthal) tetrahedral mesh: every lattice cube of an `n^3`
/// subdivision of `domain` is split into six tetrahedra around its main
/// diagonal.
pub fn tet_mesh(n: usize, domain: Aabb) -> Result<PolyMesh, MeshGenError> {
    if n == 0 {
        return Err(MeshGenError::Parameter("n must be at least 1".into()));
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut b = Builder::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut ijk = [i, j, k];
                    let mut ids = [0usize; 4];
                    ids[0] = b.vertex(domain.lattice(n, ijk, [0.0; 3]));
                    for (s, &axis) in perm.iter().enumerate() {
                        ijk[axis] += 1;
                        ids[s + 1] = b.vertex(domain.lattice(n, ijk, [0.0; 3]));
                    }
                    push_tet(&mut b, ids, Material::Plus);
                }
            }
        }
    }
    Ok(b.finish())
}

/// Adds a tetrahedral cell with positively oriented vertex order.
pub(crate) fn push_tet(b: &mut Builder, mut v: [usize; 4], tag: Material) {
    let vol = {
        let p = v.map(|i| b.vertices[i]);
        tet_signed_volume(&p[0], &p[1], &p[2], &p[3])
    };
    if vol < 0.0 {
        v.swap(1, 2);
    }
    let c = b.next_cell();
    let faces = [[v[0], v[2], v[1]], [v[1], v[2], v[3]], [v[0], v[3], v[2]], [v[0], v[1], v[3]]]
        .into_iter()
        .map(|t| b.face(c, t.to_vec(), Some(vec![t])).expect("explicit triangles"))
        .collect();
    let side = if tag == Material::Minus { Side::Minus } else { Side::Plus };
    b.cells.push(Cell { faces, tag, subtets: vec![SubTet { v, tag: side }], interface: None });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn single_cube() {
        let m = cube_mesh(1, unit_box()).unwrap();
        assert_eq!(m.cells.len(), 1);
        assert_eq!(m.num_dofs(), 8);
        assert_eq!(m.cell_boundary_tris(&m.cells[0]).len(), 12);
        assert!(validate(&m).is_empty(), "{}", validate(&m));
    }

    #[test]
    fn two_by_two_cubes() {
        let m = cube_mesh(2, unit_box()).unwrap();
        assert_eq!(m.cells.len(), 8);
        assert_eq!(m.num_dofs(), 27);
        assert_eq!(m.boundary_dofs.len(), 26);
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
        assert!(validate(&m).is_empty(), "{}", validate(&m));
    }

    #[test]
    fn stretched_box_volume() {
        let dom = Aabb { lo: Point3::new(-1.0, 0.0, 2.0), hi: Point3::new(2.0, 0.5, 3.0) };
        let m = cube_mesh(3, dom).unwrap();
        assert!((m.total_volume() - 1.5).abs() < 1e-12);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn kuhn_mesh() {
        let m = tet_mesh(1, unit_box()).unwrap();
        assert_eq!(m.cells.len(), 6);
        assert!(validate(&m).is_empty(), "{}", validate(&m));
        let m = tet_mesh(3, unit_box()).unwrap();
        assert_eq!(m.cells.len(), 162);
        assert_eq!(m.num_dofs(), 64);
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
        assert!(validate(&m).is_empty(), "{}", validate(&m));
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(cube_mesh(0, unit_box()).is_err());
        assert!(tet_mesh(0, unit_box()).is_err());
    }
}
