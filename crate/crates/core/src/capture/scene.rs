//! Scenes: posed meshes with a material and color, plus the RNG seed. On
//! disk a scene is TOML:
//!
//! ```toml
//! seed = 7
//!
//! [[object]]
//! mesh = "cube.obj"            # relative to the scene file
//! color = [200, 80, 40]
//! translation = [0.0, 0.0, 0.25]
//! rotation = [1.0, 0.0, 0.0, 0.0]   # w x y z
//!
//! [object.material]
//! depth_noise_sigma = 0.003
//! outlier_prob = 0.02
//! outlier_scale = 0.5
//! dropout_prob = 0.0
//!
//! [camera]    # optional, defaults to CameraIntrinsics::default()
//! [capture]   # optional, defaults to CaptureConfig::default()
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{CameraIntrinsics, CaptureConfig, CaptureError};
use crate::bvh::TriangleBvh;
use crate::io::read_obj;
use crate::mesh::TriangleMesh;
use crate::model::Pose;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialModel {
    /// Standard deviation of the Gaussian depth error, meters.
    pub depth_noise_sigma: f64,
    /// Chance a return is mis-ranged by a reflection.
    pub outlier_prob: f64,
    /// Upper bound of the extra range of a mis-ranged return, meters.
    pub outlier_scale: f64,
    /// Chance a return is lost entirely.
    pub dropout_prob: f64,
}

/// Smallest extra range of a mis-ranged return.
pub const MIN_OUTLIER_OFFSET: f64 = 0.1;

impl MaterialModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), CaptureError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !(self.depth_noise_sigma >= 0.0 && self.depth_noise_sigma.is_finite()) {
            return Err(CaptureError::InvalidParams("depth_noise_sigma must be non-negative".into()));
        }
        if !prob(self.outlier_prob) || !prob(self.dropout_prob) {
            return Err(CaptureError::InvalidParams("probabilities must lie in [0, 1]".into()));
        }
        if self.outlier_prob > 0.0 && !(self.outlier_scale >= MIN_OUTLIER_OFFSET && self.outlier_scale.is_finite()) {
            return Err(CaptureError::InvalidParams(format!(
                "outlier_scale must be at least {MIN_OUTLIER_OFFSET} m"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    /// Geometry in the object's own frame.
    pub mesh: TriangleMesh,
    pub pose: Pose,
    pub material: MaterialModel,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub objects: Vec<SceneObject>,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(objects: Vec<SceneObject>, seed: u64) -> Self {
        Self { objects, seed }
    }

    pub fn compile(&self) -> Result<CompiledScene, CaptureError> {
        CompiledScene::new(self)
    }

    /// All objects merged into one world-frame mesh.
    pub fn world_mesh(&self) -> TriangleMesh {
        let mut mesh = TriangleMesh::default();
        for o in &self.objects {
            mesh.merge(&o.mesh.transformed(&o.pose));
        }
        mesh
    }
}

/// World-frame scene ready for ray casting.
#[derive(Debug, Clone)]
pub struct CompiledScene {
    pub(crate) bvh: TriangleBvh,
    /// First merged triangle index of each object.
    offsets: Vec<usize>,
    pub(crate) materials: Vec<MaterialModel>,
    pub(crate) colors: Vec<[u8; 3]>,
}

impl CompiledScene {
    pub fn new(scene: &SceneSpec) -> Result<Self, CaptureError> {
        if scene.objects.is_empty() {
            return Err(CaptureError::EmptyScene);
        }
        let mut offsets = Vec::with_capacity(scene.objects.len());
        let mut total = 0;
        for o in &scene.objects {
            o.material.validate()?;
            if !o.pose.is_valid() {
                return Err(CaptureError::InvalidParams("object pose is not a rigid transform".into()));
            }
            offsets.push(total);
            total += o.mesh.triangle_count();
        }
        Ok(Self {
            bvh: TriangleBvh::new(&scene.world_mesh())?,
            offsets,
            materials: scene.objects.iter().map(|o| o.material).collect(),
            colors: scene.objects.iter().map(|o| o.color).collect(),
        })
    }

    pub fn bvh(&self) -> &TriangleBvh {
        &self.bvh
    }

    /// Object owning merged triangle `triangle`.
    pub fn object_of(&self, triangle: usize) -> usize {
        self.offsets.partition_point(|&o| o <= triangle) - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScene {
    pub scene: SceneSpec,
    pub intrinsics: CameraIntrinsics,
    pub capture: CaptureConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default)]
    seed: u64,
    #[serde(rename = "object", default)]
    objects: Vec<ObjectEntry>,
    #[serde(default)]
    camera: Option<CameraIntrinsics>,
    #[serde(default)]
    capture: Option<CaptureConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectEntry {
    mesh: String,
    #[serde(default = "white")]
    color: [u8; 3],
    #[serde(default)]
    translation: [f64; 3],
    #[serde(default = "identity_wxyz")]
    rotation: [f64; 4],
    #[serde(default)]
    material: MaterialModel,
}

fn white() -> [u8; 3] {
    [255, 255, 255]
}

fn identity_wxyz() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

/// Parses scene TOML; mesh paths resolve against `base_dir`.
pub fn parse_scene(text: &str, base_dir: &Path) -> Result<LoadedScene, CaptureError> {
    let file: SceneFile = toml::from_str(text).map_err(|e| CaptureError::Scene(e.to_string()))?;
    if file.objects.is_empty() {
        return Err(CaptureError::EmptyScene);
    }
    let mut objects = Vec::with_capacity(file.objects.len());
    for entry in file.objects {
        let [w, x, y, z] = entry.rotation;
        let pose = Pose::from_wxyz(w, x, y, z, Vec3::from(entry.translation), 1e-6)
            .map_err(|e| CaptureError::Scene(format!("object {:?}: {e}", entry.mesh)))?;
        entry.material.validate()?;
        objects.push(SceneObject {
            mesh: read_obj(base_dir.join(&entry.mesh))?,
            pose,
            material: entry.material,
            color: entry.color,
        });
    }
    let intrinsics = file.camera.unwrap_or_default();
    intrinsics.validate()?;
    let capture = file.capture.unwrap_or_default();
    capture.validate()?;
    Ok(LoadedScene {
        scene: SceneSpec::new(objects, file.seed),
        intrinsics,
        capture,
    })
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<LoadedScene, CaptureError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CaptureError::Format(e.into()))?;
    parse_scene(&text, path.parent().unwrap_or(Path::new(".")))
}
