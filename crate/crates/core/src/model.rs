//! Core geometric types: points, clouds, rigid poses and selection volumes.

use std::collections::{BTreeSet, HashSet};

use nalgebra::{Matrix3, Quaternion, Rotation3, Unit, UnitQuaternion, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec3;

/// Stable point identifier. Assigned once and never reused within a session.
pub type PointId = u64;

/// Tolerance on rotation orthonormality and unit-vector norms.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("too few points: need more than {needed}, have {available}")]
    TooFewPoints { needed: usize, available: usize },
    #[error("duplicate point id {0}")]
    DuplicateId(PointId),
    #[error("point {0} has a non-finite position")]
    NonFinitePosition(PointId),
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("unknown point id {0}")]
    UnknownPoint(PointId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub id: PointId,
    pub position: Vec3,
    pub color: [u8; 3],
}

impl Point {
    pub fn new(id: PointId, position: Vec3, color: [u8; 3]) -> Self {
        Self { id, position, color }
    }
}

/// Ordered collection of points with distinct ids and finite positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !p.position.iter().all(|c| c.is_finite()) {
                return Err(GeometryError::NonFinitePosition(p.id));
            }
            if !seen.insert(p.id) {
                return Err(GeometryError::DuplicateId(p.id));
            }
        }
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a cloud with ids `0..n` and a uniform color.
    pub fn from_positions(positions: &[Vec3], color: [u8; 3]) -> Result<Self, GeometryError> {
        Self::new(
            positions
                .iter()
                .enumerate()
                .map(|(i, p)| Point::new(i as PointId, *p, color))
                .collect(),
        )
    }

    /// Caller guarantees the invariants (distinct ids, finite positions).
    pub(crate) fn from_points_unchecked(points: Vec<Point>) -> Self {
        debug_assert!(Self::new(points.clone()).is_ok());
        Self { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.points.iter().map(|p| p.position).collect()
    }

    pub fn ids(&self) -> Vec<PointId> {
        self.points.iter().map(|p| p.id).collect()
    }

    pub fn get(&self, id: PointId) -> Option<&Point> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn max_id(&self) -> Option<PointId> {
        self.points.iter().map(|p| p.id).max()
    }

    pub fn bounds(&self) -> Option<Aabb> {
        Aabb::fit(self.points.iter().map(|p| p.position))
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Keeps the points whose id is not in `removed`, preserving order.
    pub fn without(&self, removed: &BTreeSet<PointId>) -> PointCloud {
        Self {
            points: self
                .points
                .iter()
                .filter(|p| !removed.contains(&p.id))
                .copied()
                .collect(),
        }
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Rigid transform mapping a local frame into the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vec3,
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    translation: [f64; 3],
    /// w, x, y, z
    rotation: [f64; 4],
}

impl TryFrom<PoseRepr> for Pose {
    type Error = GeometryError;

    fn try_from(r: PoseRepr) -> Result<Self, Self::Error> {
        let [w, x, y, z] = r.rotation;
        Pose::from_wxyz(w, x, y, z, Vector3::from(r.translation), UNIT_TOLERANCE)
    }
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        let q = p.rotation.quaternion();
        PoseRepr {
            translation: [p.translation.x, p.translation.y, p.translation.z],
            rotation: [q.w, q.i, q.j, q.k],
        }
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(UnitQuaternion::identity(), translation)
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vec3, angle: f64, translation: Vec3) -> Self {
        let rotation = match Unit::try_new(axis, 1e-15) {
            Some(a) => UnitQuaternion::from_axis_angle(&a, angle),
            None => UnitQuaternion::identity(),
        };
        Self::new(rotation, translation)
    }

    /// Builds a pose from a w,x,y,z quaternion. Quaternions whose norm is
    /// within `tolerance` of 1 are accepted; they are renormalized unless
    /// already unit to within 1e-9 (so serialized poses read back unchanged).
    pub fn from_wxyz(
        w: f64,
        x: f64,
        y: f64,
        z: f64,
        translation: Vec3,
        tolerance: f64,
    ) -> Result<Self, GeometryError> {
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > tolerance {
            return Err(GeometryError::InvalidPose(format!(
                "quaternion norm {norm} is not within {tolerance} of 1"
            )));
        }
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidPose("non-finite translation".into()));
        }
        let rotation = if (norm - 1.0).abs() <= UNIT_TOLERANCE {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::new_normalize(q)
        };
        Ok(Self::new(rotation, translation))
    }

    pub fn from_rotation_matrix(m: &Matrix3<f64>, translation: Vec3) -> Self {
        let rot = Rotation3::from_matrix_unchecked(*m);
        Self::new(UnitQuaternion::from_rotation_matrix(&rot), translation)
    }

    /// Camera-style pose at `eye` looking at `target`: local +z points at the
    /// target, +y points "down" relative to `up`, +x to the right.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Result<Self, GeometryError> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| GeometryError::InvalidPose("eye coincides with target".into()))?;
        let right = forward
            .cross(&up)
            .try_normalize(1e-12)
            .ok_or_else(|| GeometryError::InvalidPose("view direction parallel to up".into()))?;
        let down = forward.cross(&right);
        let m = Matrix3::from_columns(&[right, down, forward]);
        Ok(Self::from_rotation_matrix(&m, eye))
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn rotate_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.inverse();
        Pose::new(inv, -(inv * self.translation))
    }

    /// Geodesic angle in radians between the two rotations.
    pub fn rotation_angle_to(&self, other: &Pose) -> f64 {
        let rel = self.rotation.inverse() * other.rotation;
        let q = rel.quaternion();
        2.0 * q.imag().norm().atan2(q.w.abs())
    }

    pub fn is_valid(&self) -> bool {
        (self.rotation.quaternion().norm() - 1.0).abs() <= UNIT_TOLERANCE
            && self.translation.iter().all(|c| c.is_finite())
    }
}

/// Applies `pose` to every position; ids, colors and order are unchanged.
pub fn transform_cloud(cloud: &PointCloud, pose: &Pose) -> PointCloud {
    let r = pose.rotation_matrix();
    let t = pose.translation;
    PointCloud::from_points_unchecked(
        cloud
            .points
            .iter()
            .map(|p| Point::new(p.id, r * p.position + t, p.color))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self, GeometryError> {
        if !(min.iter().chain(max.iter()).all(|c| c.is_finite())) {
            return Err(GeometryError::InvalidVolume("non-finite box corner".into()));
        }
        if (0..3).any(|i| min[i] > max[i]) {
            return Err(GeometryError::InvalidVolume(format!(
                "box min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    /// Tightest box around the given positions; `None` when there are none.
    pub fn fit(positions: impl IntoIterator<Item = Vec3>) -> Option<Aabb> {
        let mut it = positions.into_iter();
        let first = it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), p| (lo.inf(&p), hi.sup(&p)));
        Some(Aabb { min, max })
    }

    pub fn expanded(&self, margin: f64) -> Aabb {
        let m = Vec3::repeat(margin);
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub pose: Pose,
    pub half_extents: Vec3,
}

impl OrientedBox {
    pub fn new(pose: Pose, half_extents: Vec3) -> Result<Self, GeometryError> {
        if !half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(GeometryError::InvalidVolume(format!(
                "half extents must be positive, got {half_extents:?}"
            )));
        }
        if !pose.is_valid() {
            return Err(GeometryError::InvalidPose("box pose is not rigid".into()));
        }
        Ok(Self { pose, half_extents })
    }

    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        let local = self.pose.rotation.inverse_transform_vector(&(p - self.pose.translation));
        (0..3).all(|i| local[i].abs() <= self.half_extents[i])
    }
}

/// Solid cone with its apex at `apex`, opening along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub apex: Vec3,
    pub axis: Vec3,
    pub height: f64,
    pub base_radius: f64,
}

impl Cone {
    pub fn new(apex: Vec3, axis: Vec3, height: f64, base_radius: f64) -> Result<Self, GeometryError> {
        if (axis.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GeometryError::InvalidVolume("cone axis must be a unit vector".into()));
        }
        if !(height > 0.0 && height.is_finite()) || !(base_radius > 0.0 && base_radius.is_finite())
        {
            return Err(GeometryError::InvalidVolume(
                "cone height and radius must be positive".into(),
            ));
        }
        if !apex.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidVolume("non-finite cone apex".into()));
        }
        Ok(Self {
            apex,
            axis,
            height,
            base_radius,
        })
    }

    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = p - self.apex;
        let t = d.dot(&self.axis);
        if !(0.0..=self.height).contains(&t) {
            return false;
        }
        let radial = (d - self.axis * t).norm();
        radial <= self.base_radius * t / self.height
    }
}

fn select(cloud: &PointCloud, pred: impl Fn(&Vec3) -> bool + Sync) -> BTreeSet<PointId> {
    cloud
        .points
        .par_iter()
        .filter(|p| pred(&p.position))
        .map(|p| p.id)
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Ids inside the box, boundary inclusive.
pub fn points_in_aabb(cloud: &PointCloud, aabb: &Aabb) -> BTreeSet<PointId> {
    select(cloud, |p| aabb.contains(p))
}

pub fn points_in_oriented_box(cloud: &PointCloud, obb: &OrientedBox) -> BTreeSet<PointId> {
    select(cloud, |p| obb.contains(p))
}

pub fn points_in_cone(cloud: &PointCloud, cone: &Cone) -> BTreeSet<PointId> {
    select(cloud, |p| cone.contains(p))
}
