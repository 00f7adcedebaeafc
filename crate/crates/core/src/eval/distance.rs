use rayon::prelude::*;

use super::EvalError;
use crate::bvh::TriangleBvh;
use crate::model::{PointCloud, PointId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl DistanceSummary {
    pub fn from_distances(distances: &[f64]) -> Option<Self> {
        if distances.is_empty() {
            return None;
        }
        let n = distances.len();
        let mean = distances.iter().sum::<f64>() / n as f64;
        let var = distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        let mut sorted = distances.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Self {
            count: n,
            mean,
            median,
            std: var.sqrt(),
            min: sorted[0],
            max: sorted[n - 1],
        })
    }
}

/// Per-point perpendicular distance to the mesh surface, in cloud order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub ids: Vec<PointId>,
    pub distances: Vec<f64>,
    pub summary: DistanceSummary,
}

pub fn point_to_mesh_distance(
    cloud: &PointCloud,
    bvh: &TriangleBvh,
) -> Result<DistanceReport, EvalError> {
    if cloud.is_empty() {
        return Err(EvalError::EmptyCloud);
    }
    let distances: Vec<f64> = cloud
        .points()
        .par_iter()
        .map(|p| bvh.distance(&p.position))
        .collect();
    let summary = DistanceSummary::from_distances(&distances).expect("cloud is not empty");
    Ok(DistanceReport {
        ids: cloud.ids(),
        distances,
        summary,
    })
}
