use super::builder::Builder;
use super::structured::{box_subtets, push_hex, unit_box, Aabb};
use super::MeshGenError;
use crate::mesh::{Cell, FaceRef, Material, PolyMesh, Side, SubTet};

/// Local geometry of a notched cube: unit cube minus the through-slot
/// `[a, b] x [0, 1] x [1 - depth, 1]` with `a, b = (1 -+ width) / 2`.
#[derive(Clone, Copy)]
struct Notch {
    a: f64,
    b: f64,
    c: f64,
}

impl Notch {
    fn new(depth: f64, width: f64) -> Result<Self, MeshGenError> {
        if !(depth > 0.0 && depth < 0.5 && width > 0.0 && width < 0.5) {
            return Err(MeshGenError::Parameter(format!("notch depth and width must lie in (0, 0.5), got {depth}, {width}")));
        }
        Ok(Notch { a: 0.5 - 0.5 * width, b: 0.5 + 0.5 * width, c: 1.0 - depth })
    }
}

/// Adds one notched cell in lattice cube `ijk`. With `split_bottom` the
/// bottom face is divided into three rectangles so the cell conforms to a
/// slot-filling key cell in the lattice cube below.
fn push_notch(b: &mut Builder, dom: &Aabb, n: usize, ijk: [usize; 3], g: Notch, split_bottom: bool) -> Result<(), MeshGenError> {
    let mut v = |x: f64, y: f64, z: f64| b.vertex(dom.lattice(n, ijk, [x, y, z]));
    let (a, bb, c) = (g.a, g.b, g.c);
    // U-shaped side polygon in the (x, z) plane at height y, counter-clockwise
    // seen from -y.
    let mut u_loop = |y: f64| -> Vec<usize> {
        let mut l = vec![v(0.0, y, 0.0)];
        if split_bottom {
            l.push(v(a, y, 0.0));
            l.push(v(bb, y, 0.0));
        }
        l.extend([v(1.0, y, 0.0), v(1.0, y, 1.0), v(bb, y, 1.0), v(bb, y, c), v(a, y, c), v(a, y, 1.0), v(0.0, y, 1.0)]);
        l
    };
    let front = u_loop(0.0);
    let back: Vec<usize> = u_loop(1.0).into_iter().rev().collect();
    let quad = |p: [usize; 4]| p.to_vec();
    let mut v = |x: f64, y: f64, z: f64| b.vertex(dom.lattice(n, ijk, [x, y, z]));
    let mut loops = vec![
        front,
        back,
        quad([v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0), v(0.0, 1.0, 1.0), v(0.0, 1.0, 0.0)]),
        quad([v(1.0, 0.0, 0.0), v(1.0, 1.0, 0.0), v(1.0, 1.0, 1.0), v(1.0, 0.0, 1.0)]),
        // arm tops
        quad([v(0.0, 0.0, 1.0), v(a, 0.0, 1.0), v(a, 1.0, 1.0), v(0.0, 1.0, 1.0)]),
        quad([v(bb, 0.0, 1.0), v(1.0, 0.0, 1.0), v(1.0, 1.0, 1.0), v(bb, 1.0, 1.0)]),
        // slot walls and floor
        quad([v(a, 0.0, c), v(a, 1.0, c), v(a, 1.0, 1.0), v(a, 0.0, 1.0)]),
        quad([v(bb, 0.0, c), v(bb, 0.0, 1.0), v(bb, 1.0, 1.0), v(bb, 1.0, c)]),
        quad([v(a, 0.0, c), v(bb, 0.0, c), v(bb, 1.0, c), v(a, 1.0, c)]),
    ];
    if split_bottom {
        for (x0, x1) in [(0.0, a), (a, bb), (bb, 1.0)] {
            loops.push(quad([v(x0, 0.0, 0.0), v(x0, 1.0, 0.0), v(x1, 1.0, 0.0), v(x1, 0.0, 0.0)]));
        }
    } else {
        loops.push(quad([v(0.0, 0.0, 0.0), v(0.0, 1.0, 0.0), v(1.0, 1.0, 0.0), v(1.0, 0.0, 0.0)]));
    }
    let boxes = [([0.0, 0.0, 0.0], [1.0, 1.0, c]), ([0.0, 0.0, c], [a, 1.0, 1.0]), ([bb, 0.0, c], [1.0, 1.0, 1.0])];
    let mut subtets: Vec<SubTet> = Vec::new();
    for (lo, hi) in boxes {
        let corners: [usize; 8] = std::array::from_fn(|k| {
            let pick = |d: usize| if (k >> d) & 1 == 1 { hi[d] } else { lo[d] };
            v(pick(0), pick(1), pick(2))
        });
        subtets.extend(box_subtets(&corners, Side::Plus));
    }
    let nc = b.next_cell();
    let mut faces: Vec<FaceRef> = Vec::with_capacity(loops.len());
    for l in loops {
        faces.push(b.face(nc, l, None).map_err(|source| MeshGenError::Triangulation { cell: nc, source })?);
    }
    b.cells.push(Cell { faces, tag: Material::Plus, subtets, interface: None });
    Ok(())
}

/// A single unit-cube cell with a rectangular through-slot of the given
/// depth and width cut from its top face. The cell is not star-shaped with
/// respect to any ball once the slot is deep enough, but it still contains
/// a ball of radius comparable to its diameter.
pub fn notch_element(depth: f64, width: f64) -> Result<PolyMesh, MeshGenError> {
    let g = Notch::new(depth, width)?;
    let mut b = Builder::new();
    push_notch(&mut b, &unit_box(), 1, [0, 0, 0], g, false)?;
    Ok(b.finish())
}

/// `n^3` lattice cubes on the unit box, each holding a notched cell plus a
/// cuboid key cell that fills its slot, so the mesh tiles the box and every
/// notched cell keeps its non-star-shaped geometry under refinement.
pub fn notch_mesh(n: usize, depth: f64, width: f64) -> Result<PolyMesh, MeshGenError> {
    if n == 0 {
        return Err(MeshGenError::Parameter("n must be at least 1".into()));
    }
    let g = Notch::new(depth, width)?;
    let dom = unit_box();
    let mut b = Builder::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                push_notch(&mut b, &dom, n, [i, j, k], g, true)?;
                let corners: [usize; 8] = std::array::from_fn(|q| {
                    let x = if q & 1 == 1 { g.b } else { g.a };
                    let y = ((q >> 1) & 1) as f64;
                    let z = if (q >> 2) & 1 == 1 { 1.0 } else { g.c };
                    b.vertex(dom.lattice(n, [i, j, k], [x, y, z]))
                });
                push_hex(&mut b, corners, Material::Plus);
            }
        }
    }
    Ok(b.finish())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn element_volume() {
        let m = notch_element(0.25, 0.25).unwrap();
        assert_eq!(m.cells.len(), 1);
        assert!((m.cell_volume(&m.cells[0]) - 0.9375).abs() < 1e-14);
        assert!((m.total_volume() - 0.9375).abs() < 1e-14);
        assert!(validate(&m).is_empty(), "{}", validate(&m));
    }

    #[test]
    fn mesh_tiles_box() {
        let m = notch_mesh(2, 0.4, 0.4).unwrap();
        assert_eq!(m.cells.len(), 16);
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
        assert!(validate(&m).is_empty(), "{}", validate(&m));
    }

    #[test]
    fn bad_parameters() {
        assert!(notch_element(0.6, 0.2).is_err());
        assert!(notch_mesh(0, 0.2, 0.2).is_err());
    }
}
