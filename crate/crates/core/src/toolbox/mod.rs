//! The editing toolbox: cropping, statistical outlier removal, voxel
//! downsampling, prism primitives, and the sponge and spray erasers, all
//! applied through an [`EditSession`].

mod plane;
mod primitive;
mod script;
mod session;
mod strength;
pub mod tools;

use thiserror::Error;

use crate::model::GeometryError;

pub use plane::{fit_support_plane, PlaneFitConfig, SupportPlane, SurfaceKind};
pub use primitive::{sample_prism_local, sample_primitive, samples_per_edge, PrimitiveSpec, DEFAULT_SAMPLE_SPACING};
pub use script::{SessionScript, ToolInvocation};
pub use session::{EditSession, PendingEdit, DEFAULT_HISTORY_CAP};
pub use strength::{Aggressiveness, EraserSize, SprayDepth, StrengthTable};
pub use tools::SprayStroke;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToolError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("too few points: need more than {needed}, have {available}")]
    TooFewPoints { needed: usize, available: usize },
    #[error("stroke has no samples")]
    EmptyStroke,
    #[error("no plane found (best inlier ratio {inlier_ratio:.3})")]
    NoPlaneFound { inlier_ratio: f64 },
    #[error("surface is tilted {tilt_degrees:.1} degrees; only horizontal or vertical surfaces are supported")]
    NotAxisAligned { tilt_degrees: f64 },
    #[error("no pending edit")]
    NoPendingEdit,
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("an edit is already pending; commit or discard it first")]
    PendingEditExists,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("script record {index}: {source}")]
    Script {
        index: usize,
        source: Box<ToolError>,
    },
}
