use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::scene::{CompiledScene, MIN_OUTLIER_OFFSET};
use super::{backproject, should_capture, CameraIntrinsics, CaptureConfig, CaptureError, SceneSpec};
use crate::io::TrajectorySample;
use crate::model::{points_in_aabb, Aabb, Point, PointCloud, PointId, Pose};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameCapture {
    /// Ids count from 0 within the frame.
    pub points: Vec<Point>,
    /// Rays that hit the scene within range.
    pub hits: usize,
    pub dropped: usize,
    /// Returns that were mis-ranged by a reflection.
    pub outliers: usize,
}

/// Casts the capture grid from the camera-to-world `pose`. Rays are traced
/// in parallel; noise is drawn from `rng` in row-major pixel order.
pub fn capture_frame<R: Rng>(
    scene: &CompiledScene,
    pose: &Pose,
    intr: &CameraIntrinsics,
    cfg: &CaptureConfig,
    rng: &mut R,
) -> FrameCapture {
    let pixels: Vec<(f64, f64)> = (0..cfg.grid_rows)
        .flat_map(|row| (0..cfg.grid_cols).map(move |col| (col, row)))
        .map(|(col, row)| cfg.pixel(intr, col, row))
        .collect();
    // The ray is scaled to unit camera z, so the hit parameter is the depth.
    let hits: Vec<Option<(usize, f64)>> = pixels
        .par_iter()
        .map(|&(u, v)| {
            let dir = pose.rotate_vector(&intr.ray(u, v));
            scene
                .bvh
                .raycast(&pose.translation, &dir, cfg.max_range)
                .map(|h| (h.triangle, h.t))
        })
        .collect();

    let mut frame = FrameCapture::default();
    for (&pixel, hit) in pixels.iter().zip(hits) {
        let Some((triangle, depth)) = hit else {
            continue;
        };
        frame.hits += 1;
        let object = scene.object_of(triangle);
        let m = &scene.materials[object];
        if rng.random::<f64>() < m.dropout_prob {
            frame.dropped += 1;
            continue;
        }
        let noise: f64 = rng.sample(StandardNormal);
        let mut d = depth + m.depth_noise_sigma * noise;
        if rng.random::<f64>() < m.outlier_prob {
            d += rng.random_range(MIN_OUTLIER_OFFSET..=m.outlier_scale.max(MIN_OUTLIER_OFFSET));
            frame.outliers += 1;
        }
        let Ok(position) = backproject(pixel, d, intr, pose) else {
            continue;
        };
        frame.points.push(Point::new(
            frame.points.len() as PointId,
            position,
            scene.colors[object],
        ));
    }
    frame
}

/// Walks the trajectory, capturing at the first sample and whenever the
/// device has moved or turned enough since the last capture. Points outside
/// `crop` are dropped; surviving points get sequential ids.
pub fn simulate_scan(
    scene: &SceneSpec,
    trajectory: &[TrajectorySample],
    intr: &CameraIntrinsics,
    cfg: &CaptureConfig,
    crop: Option<&Aabb>,
) -> Result<(PointCloud, usize), CaptureError> {
    let Some(first) = trajectory.first() else {
        return Err(CaptureError::EmptyTrajectory);
    };
    intr.validate()?;
    cfg.validate()?;
    let compiled = scene.compile()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    let mut last = first.pose;
    let mut frames = 0;
    let mut positions = Vec::new();
    let mut colors = Vec::new();
    for (i, sample) in trajectory.iter().enumerate() {
        if i > 0 && !should_capture(&last, &sample.pose, cfg) {
            continue;
        }
        last = sample.pose;
        frames += 1;
        for p in capture_frame(&compiled, &sample.pose, intr, cfg, &mut rng).points {
            positions.push(p.position);
            colors.push(p.color);
        }
    }
    let raw = PointCloud::from_points_unchecked(
        positions
            .into_iter()
            .zip(colors)
            .enumerate()
            .map(|(i, (p, c))| Point::new(i as PointId, p, c))
            .collect(),
    );
    let Some(crop) = crop else {
        return Ok((raw, frames));
    };
    let keep = points_in_aabb(&raw, crop);
    let points = raw
        .into_points()
        .into_iter()
        .filter(|p| keep.contains(&p.id))
        .enumerate()
        .map(|(i, p)| Point::new(i as PointId, p.position, p.color))
        .collect();
    Ok((PointCloud::from_points_unchecked(points), frames))
}

/// `samples` poses on a horizontal circle of `radius` around `center` at
/// `height` above it, each looking at `center`, one every 0.1 s.
pub fn orbit_trajectory(
    center: Vec3,
    radius: f64,
    height: f64,
    samples: usize,
) -> Result<Vec<TrajectorySample>, CaptureError> {
    (0..samples)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / samples as f64;
            let eye = center + Vec3::new(radius * a.cos(), radius * a.sin(), height);
            Ok(TrajectorySample {
                timestamp: i as f64 * 0.1,
                pose: Pose::look_at(eye, center, Vec3::z())?,
            })
        })
        .collect()
}
