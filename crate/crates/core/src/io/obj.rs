//! Wavefront OBJ meshes. Only `v` and `f` are read; polygons are
//! fan-triangulated as (1,2,3), (1,3,4), ...

use std::fs;
use std::path::Path;

use super::FormatError;
use crate::mesh::{MeshError, TriangleMesh};
use crate::Vec3;

fn parse_index(tok: &str, vertex_count: usize, line: usize) -> Result<usize, FormatError> {
    let head = tok.split('/').next().unwrap_or("");
    let raw: i64 = head
        .parse()
        .map_err(|_| FormatError::parse(line, format!("bad face index {tok:?}")))?;
    let resolved = match raw {
        0 => None,
        r if r > 0 => Some(r as usize - 1),
        r => (vertex_count as i64 + r).try_into().ok(),
    };
    match resolved {
        Some(i) if i < vertex_count => Ok(i),
        _ => Err(FormatError::parse(
            line,
            format!("face index {raw} out of range ({vertex_count} vertices defined)"),
        )),
    }
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh, FormatError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| FormatError::parse(line, "bad vertex coordinate"))?;
                if coords.len() != 3 {
                    return Err(FormatError::parse(line, "vertex needs three coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tokens
                    .map(|t| parse_index(t, vertices.len(), line))
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(FormatError::parse(line, "face needs at least three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if triangles.is_empty() {
        return Err(FormatError::EmptyMesh);
    }
    let mesh = TriangleMesh::new(vertices, triangles).map_err(|e| match e {
        MeshError::EmptyMesh => FormatError::EmptyMesh,
        other => FormatError::parse(0, other.to_string()),
    })?;
    if mesh.is_empty() {
        return Err(FormatError::EmptyMesh);
    }
    Ok(mesh)
}

pub fn read_obj(path: impl AsRef<Path>) -> Result<TriangleMesh, FormatError> {
    parse_obj(&fs::read_to_string(path)?)
}
