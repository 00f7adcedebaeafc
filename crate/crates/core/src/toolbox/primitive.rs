//! Rectangular prism primitives sampled into surface points.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::plane::{SupportPlane, SurfaceKind};
use super::ToolError;
use crate::model::{Point, PointId, Pose};
use crate::Vec3;

/// Default sampling pitch, matching the capture resolution at 1 m.
pub const DEFAULT_SAMPLE_SPACING: f64 = 0.0087;

fn default_spacing() -> f64 {
    DEFAULT_SAMPLE_SPACING
}

fn default_color() -> [u8; 3] {
    [255, 255, 255]
}

/// A prism centered at `pose` with its local z axis normal to the surface it
/// rests on. `dimensions` are full edge lengths along the local axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveSpec {
    pub pose: Pose,
    pub dimensions: Vec3,
    #[serde(default = "default_spacing")]
    pub sample_spacing: f64,
    #[serde(default = "default_color")]
    pub color: [u8; 3],
}

impl PrimitiveSpec {
    pub fn validate(&self) -> Result<(), ToolError> {
        if !self.dimensions.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(ToolError::InvalidParams(format!(
                "primitive dimensions must be positive, got {:?}",
                self.dimensions
            )));
        }
        if !(self.sample_spacing.is_finite() && self.sample_spacing > 0.0) {
            return Err(ToolError::InvalidParams(format!(
                "sample spacing must be positive, got {}",
                self.sample_spacing
            )));
        }
        if !self.pose.is_valid() {
            return Err(ToolError::InvalidParams("primitive pose is not rigid".into()));
        }
        Ok(())
    }

    /// Prism standing on `plane`: bottom face on the plane, local z along the
    /// plane normal. On walls the local x axis is kept horizontal.
    pub fn resting_on(plane: &SupportPlane, dimensions: Vec3, color: [u8; 3]) -> Self {
        let z = plane.normal;
        let x = match plane.kind {
            SurfaceKind::Horizontal => Vec3::x() - z * z.x,
            SurfaceKind::Vertical => Vec3::z().cross(&z),
        }
        .normalize();
        let y = z.cross(&x);
        let m = nalgebra::Matrix3::from_columns(&[x, y, z]);
        let center = plane.point + z * (dimensions.z / 2.0);
        Self {
            pose: Pose::from_rotation_matrix(&m, center),
            dimensions,
            sample_spacing: DEFAULT_SAMPLE_SPACING,
            color,
        }
    }
}

/// Number of grid samples along an edge: `ceil(edge / spacing) + 1`. A
/// relative slack of 1e-9 keeps exact multiples (0.1 / 0.01) from rounding
/// up an extra step.
pub fn samples_per_edge(edge: f64, spacing: f64) -> usize {
    let steps = (edge / spacing - 1e-9).ceil().max(1.0);
    steps as usize + 1
}

fn axis_coords(half: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|i| half * (2.0 * i as f64 / last - 1.0)).collect()
}

/// Surface samples in the prism's local frame, deduplicated by exact
/// position and ordered face by face (-x, +x, -y, +y, -z, +z).
pub fn sample_prism_local(dimensions: Vec3, spacing: f64) -> Vec<Vec3> {
    let half = dimensions / 2.0;
    let coords: Vec<Vec<f64>> = (0..3)
        .map(|a| axis_coords(half[a], samples_per_edge(dimensions[a], spacing)))
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [-half[axis], half[axis]] {
            for &cu in &coords[u] {
                for &cv in &coords[v] {
                    let mut p = Vec3::zeros();
                    p[axis] = side;
                    p[u] = cu;
                    p[v] = cv;
                    // +0.0 and -0.0 are the same sample
                    let key = p.map(|c| (c + 0.0).to_bits());
                    if seen.insert((key.x, key.y, key.z)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Samples the prism surface and assigns fresh ids from `first_id`.
pub fn sample_primitive(spec: &PrimitiveSpec, first_id: PointId) -> Result<Vec<Point>, ToolError> {
    spec.validate()?;
    Ok(sample_prism_local(spec.dimensions, spec.sample_spacing)
        .into_iter()
        .enumerate()
        .map(|(i, p)| Point::new(first_id + i as PointId, spec.pose.transform_point(&p), spec.color))
        .collect())
}
