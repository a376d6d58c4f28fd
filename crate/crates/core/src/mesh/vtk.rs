//! Legacy ASCII VTK (v2.0) export. Polyhedral cells are written as their
//! sub-tetrahedra; `cell_id` and `side` cell fields allow reassembly.

use super::{MeshError, PolyMesh, Side};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

const VTK_TETRA: u8 = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    /// One value per polyhedral cell.
    Cell(Vec<f64>),
    /// One value per DoF.
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub name: String,
    pub values: FieldValues,
}

impl Field {
    pub fn cell(name: &str, values: Vec<f64>) -> Self {
        Field { name: name.to_string(), values: FieldValues::Cell(values) }
    }

    pub fn point(name: &str, values: Vec<f64>) -> Self {
        Field { name: name.to_string(), values: FieldValues::Point(values) }
    }
}

/// Renders the mesh and fields as a VTK legacy document.
///
/// Point fields are given per DoF; helper vertices that carry no DoF (cone
/// apexes and the like) receive the mean of their cell's DoF values.
pub fn write_vtk(mesh: &PolyMesh, fields: &[Field]) -> Result<String, MeshError> {
    let nc = mesh.cells.len();
    let ndof = mesh.num_dofs();
    for f in fields {
        let (expected, got) = match &f.values {
            FieldValues::Cell(v) => (nc, v.len()),
            FieldValues::Point(v) => (ndof, v.len()),
        };
        if expected != got {
            return Err(MeshError::FieldSize { name: f.name.clone(), expected, got });
        }
    }
    let ntet: usize = mesh.cells.iter().map(|c| c.subtets.len()).sum();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 2.0");
    let _ = writeln!(s, "anivem polyhedral mesh");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    let _ = writeln!(s, "CELLS {} {}", ntet, ntet * 5);
    for c in &mesh.cells {
        for st in &c.subtets {
            let _ = writeln!(s, "4 {} {} {} {}", st.v[0], st.v[1], st.v[2], st.v[3]);
        }
    }
    let _ = writeln!(s, "CELL_TYPES {ntet}");
    for _ in 0..ntet {
        let _ = writeln!(s, "{VTK_TETRA}");
    }

    let _ = writeln!(s, "CELL_DATA {ntet}");
    let _ = writeln!(s, "SCALARS cell_id int 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for (i, c) in mesh.cells.iter().enumerate() {
        for _ in &c.subtets {
            let _ = writeln!(s, "{i}");
        }
    }
    let _ = writeln!(s, "SCALARS side int 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for c in &mesh.cells {
        for st in &c.subtets {
            let _ = writeln!(s, "{}", if st.tag == Side::Plus { 1 } else { -1 });
        }
    }
    for f in fields {
        if let FieldValues::Cell(v) = &f.values {
            let _ = writeln!(s, "SCALARS {} double 1", f.name);
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for (c, val) in mesh.cells.iter().zip(v) {
                for _ in &c.subtets {
                    let _ = writeln!(s, "{val}");
                }
            }
        }
    }

    let point_fields: Vec<(&str, &Vec<f64>)> = fields
        .iter()
        .filter_map(|f| match &f.values {
            FieldValues::Point(v) => Some((f.name.as_str(), v)),
            _ => None,
        })
        .collect();
    if !point_fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.vertices.len());
        for (name, v) in point_fields {
            let mut out = vec![0.0; mesh.vertices.len()];
            for (d, &vid) in mesh.dof_vertices().iter().enumerate() {
                out[vid] = v[d];
            }
            for c in &mesh.cells {
                let dofs = mesh.cell_vertices(c);
                if dofs.is_empty() {
                    continue;
                }
                let mean = dofs.iter().map(|&vid| v[mesh.dof_of_vertex(vid).unwrap()]).sum::<f64>() / dofs.len() as f64;
                for st in &c.subtets {
                    for &vid in &st.v {
                        if mesh.dof_of_vertex(vid).is_none() {
                            out[vid] = mean;
                        }
                    }
                }
            }
            let _ = writeln!(s, "SCALARS {name} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for x in out {
                let _ = writeln!(s, "{x}");
            }
        }
    }
    Ok(s)
}

pub fn export_vtk(mesh: &PolyMesh, fields: &[Field], path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    let text = write_vtk(mesh, fields)?;
    let io = |source| MeshError::Io { path: path.display().to_string(), source };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}
