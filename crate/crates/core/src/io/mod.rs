//! File formats: PLY point clouds, OBJ meshes, trajectories, session
//! scripts and correspondence lists.

pub mod correspondences;
pub mod obj;
pub mod ply;
pub mod script;
pub mod trajectory;

use thiserror::Error;

pub use correspondences::{read_correspondences, parse_correspondences};
pub use obj::{parse_obj, read_obj};
pub use ply::{read_ply, read_ply_from, write_ply, write_ply_to, PlyFormat};
pub use script::{format_script, parse_script, read_script, write_script};
pub use trajectory::{parse_trajectory, read_trajectory, write_trajectory, TrajectorySample};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("line {line}: timestamp is not strictly increasing")]
    NonMonotonicTime { line: usize },
    #[error("line {line}: invalid rotation: {message}")]
    InvalidRotation { line: usize, message: String },
    #[error("line {line}: unknown tool {name:?}")]
    UnknownTool { line: usize, name: String },
    #[error("line {line}: invalid parameters: {message}")]
    InvalidParams { line: usize, message: String },
}

impl FormatError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }
}
