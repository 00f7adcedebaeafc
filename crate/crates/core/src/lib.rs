//! Point cloud workcell sketching: simulated LiDAR capture of mesh scenes,
//! an interactive-style editing toolbox with preview/commit semantics, and
//! cloud-to-mesh accuracy evaluation.
//!
//! Module map:
//!
//! - [`model`]: points, clouds, rigid poses and selection volumes
//! - [`index`]: k-d tree snapshot for neighbor queries
//! - [`mesh`] / [`bvh`]: triangle meshes and their bounding-volume hierarchy
//! - [`io`]: PLY, OBJ, trajectory, script and correspondence files
//! - [`capture`]: ray-cast capture simulation with material noise
//! - [`toolbox`]: editing tools and the [`toolbox::EditSession`]
//! - [`eval`]: alignment, ICP, cloud/mesh distances and heat maps

pub mod bvh;
pub mod capture;
pub mod eval;
pub mod index;
pub mod io;
pub mod mesh;
pub mod model;
pub mod toolbox;

pub use model::{Aabb, Cone, GeometryError, OrientedBox, Point, PointCloud, PointId, Pose};

/// Shorthand for the 3-vector type used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;
