//! Accuracy evaluation against a ground-truth mesh: coarse alignment from
//! picked correspondences, mesh sampling, ICP refinement, perpendicular
//! cloud-to-mesh distances and heat-map coloring.

mod align;
mod distance;
mod heatmap;
mod icp;
mod pipeline;
mod report;
mod sampling;

use thiserror::Error;

use crate::mesh::MeshError;
use crate::model::PointId;
use crate::Vec3;

pub use align::{align_from_correspondences, rigid_fit};
pub use distance::{point_to_mesh_distance, DistanceReport, DistanceSummary};
pub use heatmap::{colorize_heatmap, percentile, ramp_color};
pub use icp::{icp_refine, icp_refine_points, IcpConfig, IcpIteration, IcpResult};
pub use pipeline::{evaluate, EvalConfig, Evaluation, DEFAULT_MESH_SAMPLES};
pub use report::{format_report, write_report};
pub use sampling::{sample_mesh, sample_mesh_points};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("degenerate correspondences: {0}")]
    DegenerateCorrespondences(String),
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("ICP iteration {iteration}: no point pair within the correspondence distance")]
    NoCorrespondences { iteration: usize },
    #[error("distance report does not match the cloud's point ids")]
    MismatchedReport,
    #[error("correspondence references unknown point id {0}")]
    UnknownPoint(PointId),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl From<MeshError> for EvalError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::EmptyMesh => EvalError::EmptyMesh,
            other => EvalError::InvalidConfig(other.to_string()),
        }
    }
}

/// Cloud point ids paired with their picked positions in the mesh frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrespondenceSet {
    pub pairs: Vec<(PointId, Vec3)>,
}

impl CorrespondenceSet {
    pub fn new(pairs: Vec<(PointId, Vec3)>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}
