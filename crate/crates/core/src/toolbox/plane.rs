//! Support-plane fitting for primitive placement: RANSAC over the points
//! around a picked location, least-squares refinement, and an orientation
//! gate admitting only floors/tables and walls.

use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ToolError;
use crate::model::PointCloud;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFitConfig {
    pub inlier_threshold: f64,
    pub iterations: usize,
    pub min_inlier_ratio: f64,
    /// Maximum tilt, in degrees, from a horizontal or vertical surface.
    pub gate_degrees: f64,
    pub seed: u64,
}

impl Default for PlaneFitConfig {
    fn default() -> Self {
        Self {
            inlier_threshold: 0.01,
            iterations: 200,
            min_inlier_ratio: 0.5,
            gate_degrees: 15.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    /// Floor or tabletop; normal near world ±z.
    Horizontal,
    /// Wall; normal near the horizontal plane.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportPlane {
    /// The seed point projected onto the plane.
    pub point: Vec3,
    pub normal: Vec3,
    pub kind: SurfaceKind,
    pub inlier_ratio: f64,
}

fn least_squares_plane(points: &[Vec3]) -> (Vec3, Vec3) {
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let normal = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
    (centroid, normal.normalize())
}

/// Fits the surface under `seed_point` using the points within `radius`.
/// The returned normal faces `view_origin` (the device that picked the
/// point).
pub fn fit_support_plane(
    cloud: &PointCloud,
    seed_point: &Vec3,
    radius: f64,
    view_origin: &Vec3,
    cfg: &PlaneFitConfig,
) -> Result<SupportPlane, ToolError> {
    let r2 = radius * radius;
    let hood: Vec<Vec3> = cloud
        .iter()
        .map(|p| p.position)
        .filter(|p| (p - seed_point).norm_squared() <= r2)
        .collect();
    if hood.len() < 3 {
        return Err(ToolError::TooFewPoints {
            needed: 3,
            available: hood.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, Vec3, Vec3)> = None;
    for _ in 0..cfg.iterations {
        let i = rng.random_range(0..hood.len());
        let j = rng.random_range(0..hood.len());
        let k = rng.random_range(0..hood.len());
        if i == j || j == k || i == k {
            continue;
        }
        let Some(normal) = (hood[j] - hood[i])
            .cross(&(hood[k] - hood[i]))
            .try_normalize(1e-12)
        else {
            continue;
        };
        let origin = hood[i];
        let count = hood
            .iter()
            .filter(|p| normal.dot(&(*p - origin)).abs() <= cfg.inlier_threshold)
            .count();
        if best.is_none_or(|(c, _, _)| count > c) {
            best = Some((count, origin, normal));
        }
    }
    let Some((count, origin, normal)) = best else {
        return Err(ToolError::NoPlaneFound { inlier_ratio: 0.0 });
    };
    let inlier_ratio = count as f64 / hood.len() as f64;
    if inlier_ratio < cfg.min_inlier_ratio {
        return Err(ToolError::NoPlaneFound { inlier_ratio });
    }

    let inliers: Vec<Vec3> = hood
        .iter()
        .copied()
        .filter(|p| normal.dot(&(p - origin)).abs() <= cfg.inlier_threshold)
        .collect();
    let (centroid, mut normal) = least_squares_plane(&inliers);
    if normal.dot(&(view_origin - centroid)) < 0.0 {
        normal = -normal;
    }

    let tilt = normal.z.abs().clamp(0.0, 1.0).acos().to_degrees();
    let kind = if tilt <= cfg.gate_degrees {
        SurfaceKind::Horizontal
    } else if tilt >= 90.0 - cfg.gate_degrees {
        SurfaceKind::Vertical
    } else {
        return Err(ToolError::NotAxisAligned { tilt_degrees: tilt });
    };

    let point = seed_point - normal * normal.dot(&(seed_point - centroid));
    Ok(SupportPlane {
        point,
        normal,
        kind,
        inlier_ratio,
    })
}
