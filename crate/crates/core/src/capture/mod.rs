//! Simulated LiDAR capture: a pinhole grid of rays cast into a mesh scene
//! from each trajectory pose, with per-material depth noise, mis-ranged
//! reflections and dropouts.

mod scan;
mod scene;

use thiserror::Error;

use crate::io::FormatError;
use crate::mesh::MeshError;
use crate::model::{GeometryError, Pose};
use crate::Vec3;

pub use scan::{capture_frame, orbit_trajectory, simulate_scan, FrameCapture};
pub use scene::{load_scene, parse_scene, CompiledScene, LoadedScene, MaterialModel, SceneObject, SceneSpec};

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("point is behind the camera")]
    BehindCamera,
    #[error("scene has no objects")]
    EmptyScene,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("scene file: {0}")]
    Scene(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Target inter-ray spacing at 1 m range, in meters.
pub const REFERENCE_SPACING: f64 = 0.0087;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraIntrinsics {
    /// A 500×400 sensor sampled by the default 50×40 grid every 10 pixels;
    /// `f = 10 / 0.0087` makes neighboring rays 8.7 mm apart at 1 m.
    fn default() -> Self {
        let f = 10.0 / REFERENCE_SPACING;
        Self {
            fx: f,
            fy: f,
            cx: 250.0,
            cy: 200.0,
            width: 500,
            height: 400,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), CaptureError> {
        let ok = self.fx.is_finite()
            && self.fy.is_finite()
            && self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cx < f64::from(self.width)
            && self.cy >= 0.0
            && self.cy < f64::from(self.height);
        if ok {
            Ok(())
        } else {
            Err(CaptureError::InvalidParams(format!("bad intrinsics {self:?}")))
        }
    }

    /// Camera-frame ray through pixel `(u, v)` scaled so its z component is 1.
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptureConfig {
    pub grid_cols: u32,
    pub grid_rows: u32,
    /// Meters.
    pub move_threshold: f64,
    /// Degrees.
    pub rotate_threshold: f64,
    /// Meters of depth.
    pub max_range: f64,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        Self {
            grid_cols: 50,
            grid_rows: 40,
            move_threshold: 0.01,
            rotate_threshold: 1.0,
            max_range: 5.0,
        }
    }
}

impl CaptureConfig {
    pub fn points_per_frame(&self) -> usize {
        self.grid_cols as usize * self.grid_rows as usize
    }

    pub fn validate(&self) -> Result<(), CaptureError> {
        if self.grid_cols == 0 || self.grid_rows == 0 {
            return Err(CaptureError::InvalidParams("grid dimensions must be at least 1".into()));
        }
        if !(self.move_threshold > 0.0 && self.rotate_threshold > 0.0) {
            return Err(CaptureError::InvalidParams("thresholds must be positive".into()));
        }
        if self.max_range.is_nan() || self.max_range <= 0.0 {
            return Err(CaptureError::InvalidParams("max_range must be positive".into()));
        }
        Ok(())
    }

    /// Pixel center sampled by grid cell `(col, row)`.
    pub fn pixel(&self, intr: &CameraIntrinsics, col: u32, row: u32) -> (f64, f64) {
        let u = (f64::from(col) + 0.5) * f64::from(intr.width) / f64::from(self.grid_cols);
        let v = (f64::from(row) + 0.5) * f64::from(intr.height) / f64::from(self.grid_rows);
        (u, v)
    }
}

/// True when the device moved at least `move_threshold` or turned at least
/// `rotate_threshold` since `prev`.
pub fn should_capture(prev: &Pose, curr: &Pose, cfg: &CaptureConfig) -> bool {
    let moved = (curr.translation - prev.translation).norm();
    let turned = prev.rotation_angle_to(curr).to_degrees();
    moved >= cfg.move_threshold || turned >= cfg.rotate_threshold
}

/// Camera-frame pinhole point at `depth` behind pixel `(u, v)`, mapped to
/// world through the camera-to-world `pose`.
pub fn backproject(
    pixel: (f64, f64),
    depth: f64,
    intr: &CameraIntrinsics,
    pose: &Pose,
) -> Result<Vec3, CaptureError> {
    if depth.is_nan() || depth <= 0.0 {
        return Err(CaptureError::NonPositiveDepth(depth));
    }
    Ok(pose.transform_point(&(intr.ray(pixel.0, pixel.1) * depth)))
}

/// Pixel coordinates and depth of a world point.
pub fn project(point: &Vec3, intr: &CameraIntrinsics, pose: &Pose) -> Result<((f64, f64), f64), CaptureError> {
    let c = pose.inverse().transform_point(point);
    if c.z.is_nan() || c.z <= 0.0 {
        return Err(CaptureError::BehindCamera);
    }
    Ok(((c.x / c.z * intr.fx + intr.cx, c.y / c.z * intr.fy + intr.cy), c.z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spacing_at_one_meter() {
        let intr = CameraIntrinsics::default();
        let cfg = CaptureConfig::default();
        assert_eq!(cfg.points_per_frame(), 2000);
        intr.validate().unwrap();
        let a = backproject(cfg.pixel(&intr, 10, 10), 1.0, &intr, &Pose::identity()).unwrap();
        let b = backproject(cfg.pixel(&intr, 11, 10), 1.0, &intr, &Pose::identity()).unwrap();
        assert!(((a - b).norm() - 0.0087).abs() < 1e-12);
    }

    #[test]
    fn principal_point_ray() {
        let intr = CameraIntrinsics::default();
        let p = backproject((intr.cx, intr.cy), 2.0, &intr, &Pose::identity()).unwrap();
        assert_eq!(p, Vec3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn pinhole_by_hand() {
        let intr = CameraIntrinsics { fx: 500.0, fy: 500.0, cx: 0.0, cy: 0.0, width: 1000, height: 1000 };
        let p = backproject((500.0, 0.0), 1.0, &intr, &Pose::identity()).unwrap();
        assert_eq!(p, Vec3::new(1.0, 0.0, 1.0));
        assert!(matches!(
            backproject((0.0, 0.0), 0.0, &intr, &Pose::identity()),
            Err(CaptureError::NonPositiveDepth(_))
        ));
    }

    #[test]
    fn project_inverts_backproject() {
        let intr = CameraIntrinsics::default();
        let pose = Pose::from_axis_angle(Vec3::new(0.3, 1.0, 0.2), 0.7, Vec3::new(1.0, -0.5, 0.3));
        let world = pose.transform_point(&Vec3::new(0.2, -0.1, 1.7));
        let (px, d) = project(&world, &intr, &pose).unwrap();
        let back = backproject(px, d, &intr, &pose).unwrap();
        assert!((back - world).norm() < 1e-9);
        let behind = pose.transform_point(&Vec3::new(0.0, 0.0, -1.0));
        assert!(matches!(project(&behind, &intr, &pose), Err(CaptureError::BehindCamera)));
    }

    #[test]
    fn capture_thresholds() {
        let cfg = CaptureConfig::default();
        let base = Pose::identity();
        let small = Pose::from_axis_angle(Vec3::z(), 0.5f64.to_radians(), Vec3::new(0.005, 0.0, 0.0));
        assert!(!should_capture(&base, &small, &cfg));
        assert!(should_capture(&base, &Pose::from_translation(Vec3::new(0.02, 0.0, 0.0)), &cfg));
        assert!(should_capture(&base, &Pose::from_translation(Vec3::new(0.0, 0.0, 0.01)), &cfg));
        let turn = Pose::from_axis_angle(Vec3::y(), 1.5f64.to_radians(), Vec3::zeros());
        assert!(should_capture(&base, &turn, &cfg));
        assert!(!should_capture(&base, &base, &cfg));
    }

    #[test]
    fn config_validation() {
        assert!(CaptureConfig { grid_cols: 0, ..Default::default() }.validate().is_err());
        assert!(CaptureConfig { move_threshold: 0.0, ..Default::default() }.validate().is_err());
        let bad = CameraIntrinsics { cx: 600.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
