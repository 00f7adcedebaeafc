//! Two-phase editing: every tool produces a pending preview that is then
//! committed or discarded. Commits are undoable.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use super::primitive::{sample_primitive, PrimitiveSpec};
use super::script::{SessionScript, ToolInvocation};
use super::strength::{Aggressiveness, EraserSize, StrengthTable};
use super::tools::{self, SprayStroke};
use super::ToolError;
use crate::model::{Aabb, Point, PointCloud, PointId, Pose};

pub const DEFAULT_HISTORY_CAP: usize = 32;

/// A proposed edit as an (added, removed) diff against the committed cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingEdit {
    pub tool: ToolInvocation,
    pub added: Vec<Point>,
    pub removed: BTreeSet<PointId>,
}

impl PendingEdit {
    /// `base` with the diff applied: survivors keep their order, added
    /// points are appended.
    pub fn apply_to(&self, base: &PointCloud) -> PointCloud {
        let mut points = base.without(&self.removed).into_points();
        points.extend_from_slice(&self.added);
        PointCloud::from_points_unchecked(points)
    }
}

#[derive(Debug, Clone)]
pub struct EditSession {
    committed: Arc<PointCloud>,
    pending: Option<PendingEdit>,
    history: VecDeque<Arc<PointCloud>>,
    history_cap: usize,
    next_id: PointId,
    table: StrengthTable,
}

impl EditSession {
    pub fn new(cloud: PointCloud) -> Self {
        Self::with_table(cloud, StrengthTable::default())
    }

    pub fn with_table(cloud: PointCloud, table: StrengthTable) -> Self {
        let next_id = cloud.max_id().map_or(0, |m| m + 1);
        Self {
            committed: Arc::new(cloud),
            pending: None,
            history: VecDeque::new(),
            history_cap: DEFAULT_HISTORY_CAP,
            next_id,
            table,
        }
    }

    pub fn with_history_cap(mut self, cap: usize) -> Self {
        self.history_cap = cap;
        self
    }

    pub fn committed(&self) -> &PointCloud {
        &self.committed
    }

    /// Shareable read-only handle on the committed state.
    pub fn snapshot(&self) -> Arc<PointCloud> {
        Arc::clone(&self.committed)
    }

    pub fn pending(&self) -> Option<&PendingEdit> {
        self.pending.as_ref()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn table(&self) -> &StrengthTable {
        &self.table
    }

    /// The committed cloud with the pending edit applied, if there is one.
    pub fn preview_cloud(&self) -> Option<PointCloud> {
        self.pending.as_ref().map(|p| p.apply_to(&self.committed))
    }

    /// Runs a tool against the committed cloud and stores the result as the
    /// pending edit. Fails if an edit is already pending.
    pub fn preview(&mut self, tool: ToolInvocation) -> Result<&PendingEdit, ToolError> {
        if self.pending.is_some() {
            return Err(ToolError::PendingEditExists);
        }
        tool.validate()?;
        let cloud = &*self.committed;
        let table = &self.table;
        let (added, removed) = match &tool {
            ToolInvocation::Crop { bounds } => (Vec::new(), tools::crop_removal(cloud, bounds)),
            ToolInvocation::RemoveOutliers { strength } => (
                Vec::new(),
                tools::outlier_removal(
                    cloud,
                    table.outlier_neighbors,
                    table.outlier_std_ratio(*strength),
                )?,
            ),
            ToolInvocation::Downsample { strength } => (
                tools::voxel_centroids(cloud, table.voxel_size(*strength), self.next_id),
                cloud.iter().map(|p| p.id).collect(),
            ),
            ToolInvocation::CreatePrimitive { primitive } => {
                (sample_primitive(primitive, self.next_id)?, BTreeSet::new())
            }
            ToolInvocation::EraseSponge { stroke, size } => (
                Vec::new(),
                tools::sponge_removal(cloud, stroke, table.sponge_half_extents(*size))?,
            ),
            ToolInvocation::EraseSpray { strokes } => {
                (Vec::new(), tools::spray_removal(cloud, strokes, table)?)
            }
        };
        self.next_id += added.len() as PointId;
        Ok(self.pending.insert(PendingEdit {
            tool,
            added,
            removed,
        }))
    }

    pub fn crop(&mut self, bounds: Aabb) -> Result<&PendingEdit, ToolError> {
        self.preview(ToolInvocation::Crop { bounds })
    }

    pub fn remove_outliers(&mut self, strength: Aggressiveness) -> Result<&PendingEdit, ToolError> {
        self.preview(ToolInvocation::RemoveOutliers { strength })
    }

    pub fn downsample(&mut self, strength: Aggressiveness) -> Result<&PendingEdit, ToolError> {
        self.preview(ToolInvocation::Downsample { strength })
    }

    pub fn create_primitive(&mut self, primitive: PrimitiveSpec) -> Result<&PendingEdit, ToolError> {
        self.preview(ToolInvocation::CreatePrimitive { primitive })
    }

    pub fn erase_sponge(
        &mut self,
        stroke: Vec<Pose>,
        size: EraserSize,
    ) -> Result<&PendingEdit, ToolError> {
        self.preview(ToolInvocation::EraseSponge { stroke, size })
    }

    pub fn erase_spray(&mut self, strokes: Vec<SprayStroke>) -> Result<&PendingEdit, ToolError> {
        self.preview(ToolInvocation::EraseSpray { strokes })
    }

    pub fn commit(&mut self) -> Result<(), ToolError> {
        let edit = self.pending.take().ok_or(ToolError::NoPendingEdit)?;
        let next = Arc::new(edit.apply_to(&self.committed));
        let prior = std::mem::replace(&mut self.committed, next);
        if self.history_cap > 0 {
            if self.history.len() == self.history_cap {
                self.history.pop_front();
            }
            self.history.push_back(prior);
        }
        Ok(())
    }

    pub fn discard(&mut self) -> Result<PendingEdit, ToolError> {
        self.pending.take().ok_or(ToolError::NoPendingEdit)
    }

    /// Restores the state before the last commit. A pending edit, computed
    /// against the state being replaced, is dropped.
    pub fn undo(&mut self) -> Result<(), ToolError> {
        let prior = self.history.pop_back().ok_or(ToolError::NothingToUndo)?;
        self.pending = None;
        self.committed = prior;
        Ok(())
    }

    /// Replays each record as preview + commit. On failure the session stays
    /// at the last successful commit and the error names the record index.
    pub fn apply_script(&mut self, script: &SessionScript) -> Result<(), ToolError> {
        if self.pending.is_some() {
            return Err(ToolError::Script {
                index: 0,
                source: Box::new(ToolError::PendingEditExists),
            });
        }
        for (index, record) in script.records.iter().enumerate() {
            self.preview(record.clone())
                .map(|_| ())
                .and_then(|_| self.commit())
                .map_err(|e| ToolError::Script {
                    index,
                    source: Box::new(e),
                })?;
        }
        Ok(())
    }
}
