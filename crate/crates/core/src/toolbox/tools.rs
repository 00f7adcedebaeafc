//! Tool kernels. Each computes the removal set and/or the added points of an
//! edit without touching any session state.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strength::{EraserSize, SprayDepth, StrengthTable};
use super::ToolError;
use crate::index::SpatialIndex;
use crate::model::{points_in_aabb, Aabb, Cone, OrientedBox, Point, PointCloud, PointId, Pose};
use crate::model::UNIT_TOLERANCE;
use crate::Vec3;

/// One sample of a spray gesture: a ray from the device through the touched
/// screen point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SprayStroke {
    pub ray_origin: Vec3,
    pub ray_dir: Vec3,
    pub size: EraserSize,
    pub depth: SprayDepth,
}

impl SprayStroke {
    pub fn cone(&self, table: &StrengthTable) -> Result<Cone, ToolError> {
        Cone::new(
            self.ray_origin,
            self.ray_dir,
            table.spray_depth(self.depth),
            table.spray_radius(self.size),
        )
        .map_err(|e| ToolError::InvalidParams(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ToolError> {
        if (self.ray_dir.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(ToolError::InvalidParams(format!(
                "spray ray_dir must be a unit vector, norm is {}",
                self.ray_dir.norm()
            )));
        }
        if !self.ray_origin.iter().all(|c| c.is_finite()) {
            return Err(ToolError::InvalidParams("spray ray_origin is not finite".into()));
        }
        Ok(())
    }
}

/// Ids outside `bounds`.
pub fn crop_removal(cloud: &PointCloud, bounds: &Aabb) -> BTreeSet<PointId> {
    let keep = points_in_aabb(cloud, bounds);
    cloud
        .iter()
        .map(|p| p.id)
        .filter(|id| !keep.contains(id))
        .collect()
}

/// Mean/sample-std statistics of the per-point k-neighbor mean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborStats {
    pub mean_distances: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

pub fn neighbor_stats(cloud: &PointCloud, k: usize) -> Result<NeighborStats, ToolError> {
    if cloud.len() <= k + 1 {
        return Err(ToolError::TooFewPoints {
            needed: k + 1,
            available: cloud.len(),
        });
    }
    let index = SpatialIndex::build(cloud)?;
    let d = index.all_knn_mean_distances(k)?;
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok(NeighborStats {
        mean_distances: d,
        mean,
        std: var.sqrt(),
    })
}

/// Statistical outlier removal: ids whose k-neighbor mean distance exceeds
/// `mean + std_ratio · std` over the whole cloud.
pub fn outlier_removal(
    cloud: &PointCloud,
    k: usize,
    std_ratio: f64,
) -> Result<BTreeSet<PointId>, ToolError> {
    let stats = neighbor_stats(cloud, k)?;
    let threshold = stats.mean + std_ratio * stats.std;
    Ok(cloud
        .iter()
        .zip(&stats.mean_distances)
        .filter(|(_, &d)| d > threshold)
        .map(|(p, _)| p.id)
        .collect())
}

pub fn voxel_key(p: &Vec3, voxel: f64) -> [i64; 3] {
    [
        (p.x / voxel).floor() as i64,
        (p.y / voxel).floor() as i64,
        (p.z / voxel).floor() as i64,
    ]
}

/// One centroid point per occupied voxel (grid anchored at the origin),
/// ordered by first occupancy; ids start at `first_id`.
pub fn voxel_centroids(cloud: &PointCloud, voxel: f64, first_id: PointId) -> Vec<Point> {
    struct Acc {
        sum: Vec3,
        color: [u64; 3],
        count: usize,
    }
    let mut slots: HashMap<[i64; 3], usize> = HashMap::new();
    let mut accs: Vec<Acc> = Vec::new();
    for p in cloud {
        let slot = *slots.entry(voxel_key(&p.position, voxel)).or_insert_with(|| {
            accs.push(Acc {
                sum: Vec3::zeros(),
                color: [0; 3],
                count: 0,
            });
            accs.len() - 1
        });
        let acc = &mut accs[slot];
        acc.sum += p.position;
        for (c, v) in acc.color.iter_mut().zip(p.color) {
            *c += u64::from(v);
        }
        acc.count += 1;
    }
    accs.into_iter()
        .enumerate()
        .map(|(i, acc)| {
            let n = acc.count as f64;
            let color = acc.color.map(|c| (c as f64 / n).round() as u8);
            Point::new(first_id + i as PointId, acc.sum / n, color)
        })
        .collect()
}

/// Union of the oriented boxes swept along `stroke`.
pub fn sponge_removal(
    cloud: &PointCloud,
    stroke: &[Pose],
    half_extents: Vec3,
) -> Result<BTreeSet<PointId>, ToolError> {
    if stroke.is_empty() {
        return Err(ToolError::EmptyStroke);
    }
    let boxes = stroke
        .iter()
        .map(|pose| OrientedBox::new(*pose, half_extents))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    Ok(union_select(cloud, |p| boxes.iter().any(|b| b.contains(p))))
}

/// Union of the spray cones of every stroke sample.
pub fn spray_removal(
    cloud: &PointCloud,
    strokes: &[SprayStroke],
    table: &StrengthTable,
) -> Result<BTreeSet<PointId>, ToolError> {
    if strokes.is_empty() {
        return Err(ToolError::EmptyStroke);
    }
    let cones = strokes
        .iter()
        .map(|s| s.cone(table))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(union_select(cloud, |p| cones.iter().any(|c| c.contains(p))))
}

fn union_select(cloud: &PointCloud, pred: impl Fn(&Vec3) -> bool + Sync) -> BTreeSet<PointId> {
    cloud
        .points()
        .par_iter()
        .filter(|p| pred(&p.position))
        .map(|p| p.id)
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
