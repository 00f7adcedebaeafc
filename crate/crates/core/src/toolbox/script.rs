//! Tool invocation records: the unit of a session script and of a preview.

use serde::{Deserialize, Serialize};

use super::primitive::PrimitiveSpec;
use super::strength::{Aggressiveness, EraserSize};
use super::tools::SprayStroke;
use super::ToolError;
use crate::model::{Aabb, Pose};

/// One tool application with its parameters. Serialized as a JSON object
/// tagged by `"tool"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tool", rename_all = "snake_case", deny_unknown_fields)]
pub enum ToolInvocation {
    Crop {
        bounds: Aabb,
    },
    RemoveOutliers {
        strength: Aggressiveness,
    },
    Downsample {
        strength: Aggressiveness,
    },
    CreatePrimitive {
        primitive: PrimitiveSpec,
    },
    EraseSponge {
        stroke: Vec<Pose>,
        size: EraserSize,
    },
    EraseSpray {
        strokes: Vec<SprayStroke>,
    },
}

impl ToolInvocation {
    pub const TOOL_NAMES: [&'static str; 6] = [
        "crop",
        "remove_outliers",
        "downsample",
        "create_primitive",
        "erase_sponge",
        "erase_spray",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Crop { .. } => "crop",
            Self::RemoveOutliers { .. } => "remove_outliers",
            Self::Downsample { .. } => "downsample",
            Self::CreatePrimitive { .. } => "create_primitive",
            Self::EraseSponge { .. } => "erase_sponge",
            Self::EraseSpray { .. } => "erase_spray",
        }
    }

    /// Checks parameter invariants serde cannot express.
    pub fn validate(&self) -> Result<(), ToolError> {
        match self {
            Self::Crop { bounds } => Aabb::new(bounds.min, bounds.max)
                .map(|_| ())
                .map_err(|e| ToolError::InvalidParams(e.to_string())),
            Self::RemoveOutliers { .. } | Self::Downsample { .. } => Ok(()),
            Self::CreatePrimitive { primitive } => primitive.validate(),
            Self::EraseSponge { stroke, .. } => {
                if stroke.is_empty() {
                    return Err(ToolError::EmptyStroke);
                }
                if stroke.iter().any(|p| !p.is_valid()) {
                    return Err(ToolError::InvalidParams("sponge pose is not rigid".into()));
                }
                Ok(())
            }
            Self::EraseSpray { strokes } => {
                if strokes.is_empty() {
                    return Err(ToolError::EmptyStroke);
                }
                strokes.iter().try_for_each(SprayStroke::validate)
            }
        }
    }
}

/// Ordered tool invocations replayed by [`super::EditSession::apply_script`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionScript {
    pub records: Vec<ToolInvocation>,
}

impl SessionScript {
    pub fn new(records: Vec<ToolInvocation>) -> Self {
        Self { records }
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
}

impl FromIterator<ToolInvocation> for SessionScript {
    fn from_iter<T: IntoIterator<Item = ToolInvocation>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}
