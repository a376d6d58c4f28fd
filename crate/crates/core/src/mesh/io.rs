//! JSON mesh files.
//!
//! ```text
//! {"vertices": [[x,y,z],...],
//!  "faces": [{"loop":[vid,...], "tris":[[a,b,c],...], "cells":[c0, c1|-1]}],
//!  "cells": [{"faces":[{"id":f,"flip":bool}], "tag":"plus|minus|interface",
//!             "subtets":[{"v":[a,b,c,d],"tag":"plus|minus"}],
//!             "interface": {"gamma":[vid,...], "normal":[x,y,z]}}],
//!  "boundary_dofs":[vid,...]}
//! ```
//!
//! `interface` is optional and only present on interface cells.

use super::{Cell, Face, FaceRef, InterfacePatch, Material, MeshError, PolyMesh, Side, SubTet};
use crate::geometry::Point3;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    vertices: Vec<[f64; 3]>,
    faces: Vec<FaceFile>,
    cells: Vec<CellFile>,
    boundary_dofs: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceFile {
    #[serde(rename = "loop")]
    loop_ids: Vec<usize>,
    tris: Vec<[usize; 3]>,
    cells: [i64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceRefFile {
    id: usize,
    flip: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubTetFile {
    v: [usize; 4],
    tag: Side,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterfaceFile {
    gamma: Vec<usize>,
    normal: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellFile {
    faces: Vec<FaceRefFile>,
    tag: Material,
    subtets: Vec<SubTetFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interface: Option<InterfaceFile>,
}

fn to_file(mesh: &PolyMesh) -> MeshFile {
    MeshFile {
        vertices: mesh.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
        faces: mesh
            .faces
            .iter()
            .map(|f| FaceFile { loop_ids: f.loop_ids.clone(), tris: f.tris.clone(), cells: f.cells })
            .collect(),
        cells: mesh
            .cells
            .iter()
            .map(|c| CellFile {
                faces: c.faces.iter().map(|r| FaceRefFile { id: r.id, flip: r.flip }).collect(),
                tag: c.tag,
                subtets: c.subtets.iter().map(|s| SubTetFile { v: s.v, tag: s.tag }).collect(),
                interface: c
                    .interface
                    .as_ref()
                    .map(|p| InterfaceFile { gamma: p.gamma.clone(), normal: [p.normal.x, p.normal.y, p.normal.z] }),
            })
            .collect(),
        boundary_dofs: mesh.boundary_dofs.clone(),
    }
}

fn from_file(file: MeshFile) -> Result<PolyMesh, MeshError> {
    let nv = file.vertices.len();
    let nf = file.faces.len();
    let nc = file.cells.len() as i64;
    for (i, f) in file.faces.iter().enumerate() {
        if let Some(v) = f.loop_ids.iter().chain(f.tris.iter().flatten()).find(|&&v| v >= nv) {
            return Err(MeshError::Invalid(format!("faces[{i}]: vertex id {v} out of range ({nv} vertices)")));
        }
        for (k, t) in f.tris.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::Invalid(format!("faces[{i}].tris[{k}]: duplicate vertex ids {t:?}")));
            }
        }
        if f.cells[0] < 0 || f.cells[0] >= nc || f.cells[1] >= nc || f.cells[1] < -1 {
            return Err(MeshError::Invalid(format!("faces[{i}].cells: {:?} out of range", f.cells)));
        }
    }
    for (c, cell) in file.cells.iter().enumerate() {
        if let Some(r) = cell.faces.iter().find(|r| r.id >= nf) {
            return Err(MeshError::Invalid(format!("cells[{c}].faces: face id {} out of range", r.id)));
        }
        if cell.subtets.iter().flat_map(|s| s.v).any(|v| v >= nv) {
            return Err(MeshError::Invalid(format!("cells[{c}].subtets: vertex id out of range")));
        }
        if let Some(p) = &cell.interface {
            if p.gamma.iter().any(|&v| v >= nv) {
                return Err(MeshError::Invalid(format!("cells[{c}].interface.gamma: vertex id out of range")));
            }
        }
    }
    if let Some(v) = file.boundary_dofs.iter().find(|&&v| v >= nv) {
        return Err(MeshError::Invalid(format!("boundary_dofs: vertex id {v} out of range")));
    }
    let vertices = file.vertices.into_iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
    let faces = file.faces.into_iter().map(|f| Face { loop_ids: f.loop_ids, tris: f.tris, cells: f.cells }).collect();
    let cells = file
        .cells
        .into_iter()
        .map(|c| Cell {
            faces: c.faces.into_iter().map(|r| FaceRef { id: r.id, flip: r.flip }).collect(),
            tag: c.tag,
            subtets: c.subtets.into_iter().map(|s| SubTet { v: s.v, tag: s.tag }).collect(),
            interface: c.interface.map(|p| InterfacePatch {
                gamma: p.gamma,
                normal: Point3::new(p.normal[0], p.normal[1], p.normal[2]),
            }),
        })
        .collect();
    Ok(PolyMesh::new(vertices, faces, cells, file.boundary_dofs))
}

pub fn mesh_to_json(mesh: &PolyMesh) -> String {
    serde_json::to_string(&to_file(mesh)).expect("mesh serialisation cannot fail")
}

pub fn mesh_from_json(text: &str) -> Result<PolyMesh, MeshError> {
    from_file(serde_json::from_str(text)?)
}

pub fn save_json(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    std::fs::write(path, mesh_to_json(mesh)).map_err(|source| MeshError::Io { path: path.display().to_string(), source })
}

pub fn load_json(path: impl AsRef<Path>) -> Result<PolyMesh, MeshError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io { path: path.display().to_string(), source })?;
    mesh_from_json(&text)
}
