//! Incremental mesh construction with shared-face deduplication.

use crate::geometry::{self, Point3};
use crate::mesh::{triangulate_face, Cell, Face, FaceRef, PolyMesh, Side, SubTet, TriangulateError};
use std::collections::HashMap;

pub(crate) struct Builder {
    pub vertices: Vec<Point3>,
    vmap: HashMap<[u64; 3], usize>,
    pub faces: Vec<Face>,
    fmap: HashMap<Vec<usize>, usize>,
    pub cells: Vec<Cell>,
}

fn key(p: &Point3) -> [u64; 3] {
    // +0.0 and -0.0 must collide
    [p.x + 0.0, p.y + 0.0, p.z + 0.0].map(f64::to_bits)
}

impl Builder {
    pub fn new() -> Self {
        Builder { vertices: Vec::new(), vmap: HashMap::new(), faces: Vec::new(), fmap: HashMap::new(), cells: Vec::new() }
    }

    /// Starts from an existing vertex list; ids are preserved.
    pub fn with_vertices(vertices: Vec<Point3>) -> Self {
        let mut b = Builder::new();
        for (i, p) in vertices.iter().enumerate() {
            b.vmap.entry(key(p)).or_insert(i);
        }
        b.vertices = vertices;
        b
    }

    /// Vertex at exactly `p`, reusing an existing one with identical bits.
    pub fn vertex(&mut self, p: Point3) -> usize {
        let k = key(&p);
        if let Some(&i) = self.vmap.get(&k) {
            return i;
        }
        self.vertices.push(p);
        self.vmap.insert(k, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    /// Always appends a new vertex (cell-private helper points).
    pub fn helper_vertex(&mut self, p: Point3) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    /// Index the next pushed cell will get.
    pub fn next_cell(&self) -> usize {
        self.cells.len()
    }

    /// Registers a face of `cell` whose loop (and triangles, if given) are
    /// oriented outward from `cell`. A face with the same vertex set that is
    /// already present is shared with the new cell.
    pub fn face(&mut self, cell: usize, loop_ids: Vec<usize>, tris: Option<Vec<[usize; 3]>>) -> Result<FaceRef, TriangulateError> {
        self.face_with_chord(cell, loop_ids, tris, None)
    }

    pub fn face_with_chord(
        &mut self,
        cell: usize,
        loop_ids: Vec<usize>,
        tris: Option<Vec<[usize; 3]>>,
        chord: Option<(usize, usize)>,
    ) -> Result<FaceRef, TriangulateError> {
        let mut k = loop_ids.clone();
        k.sort_unstable();
        if let Some(&id) = self.fmap.get(&k) {
            let f = &mut self.faces[id];
            debug_assert!(f.cells[1] < 0, "face shared by more than two cells");
            f.cells[1] = cell as i64;
            return Ok(FaceRef { id, flip: true });
        }
        let tris = match tris {
            Some(t) => t,
            None => triangulate_face(&self.vertices, &loop_ids, chord)?,
        };
        self.faces.push(Face { loop_ids, tris, cells: [cell as i64, -1] });
        let id = self.faces.len() - 1;
        self.fmap.insert(k, id);
        Ok(FaceRef { id, flip: false })
    }

    /// Outward-oriented triangles of the given face references.
    pub fn oriented_tris(&self, refs: &[FaceRef]) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for r in refs {
            for t in &self.faces[r.id].tris {
                out.push(if r.flip { [t[0], t[2], t[1]] } else { *t });
            }
        }
        out
    }

    /// Decomposes a convex polyhedron into tetrahedra. A polyhedron with
    /// exactly four vertices is returned as itself; otherwise its boundary
    /// triangles are coned to the vertex centroid.
    pub fn cone_convex(&mut self, boundary: &[[usize; 3]], tag: Side) -> Vec<SubTet> {
        let mut verts: Vec<usize> = boundary.iter().flatten().copied().collect();
        verts.sort_unstable();
        verts.dedup();
        if verts.len() == 4 {
            return vec![SubTet { v: [verts[0], verts[1], verts[2], verts[3]], tag }];
        }
        let pts: Vec<Point3> = verts.iter().map(|&v| self.vertices[v]).collect();
        let apex = self.helper_vertex(geometry::centroid(&pts));
        boundary.iter().map(|t| SubTet { v: [apex, t[0], t[1], t[2]], tag }).collect()
    }

    pub fn finish(self) -> PolyMesh {
        let mut mesh = PolyMesh::new(self.vertices, self.faces, self.cells, Vec::new());
        mesh.mark_boundary_from_faces();
        mesh
    }
}
