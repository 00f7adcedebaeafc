use super::{
    align_from_correspondences, colorize_heatmap, icp_refine_points, point_to_mesh_distance,
    sample_mesh_points, CorrespondenceSet, DistanceReport, EvalError, IcpConfig, IcpResult,
};
use crate::bvh::TriangleBvh;
use crate::index::KdTree;
use crate::mesh::TriangleMesh;
use crate::model::{transform_cloud, PointCloud, Pose};

pub const DEFAULT_MESH_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub mesh_samples: usize,
    pub seed: u64,
    pub icp: IcpConfig,
    pub heatmap_saturation: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mesh_samples: DEFAULT_MESH_SAMPLES,
            seed: 0,
            icp: IcpConfig::default(),
            heatmap_saturation: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub coarse_pose: Pose,
    pub icp: IcpResult,
    /// Distances of the cloud after applying `icp.pose`.
    pub report: DistanceReport,
    pub heatmap: PointCloud,
}

/// Coarse alignment (identity without correspondences), ICP against mesh
/// samples, then distances of the aligned cloud to the mesh.
pub fn evaluate(
    cloud: &PointCloud,
    mesh: &TriangleMesh,
    correspondences: Option<&CorrespondenceSet>,
    cfg: &EvalConfig,
) -> Result<Evaluation, EvalError> {
    if cloud.is_empty() {
        return Err(EvalError::EmptyCloud);
    }
    let bvh = TriangleBvh::new(mesh)?;
    let coarse_pose = match correspondences {
        Some(c) => align_from_correspondences(c, cloud)?,
        None => Pose::identity(),
    };
    let samples = KdTree::new(sample_mesh_points(mesh, cfg.mesh_samples, cfg.seed)?);
    let icp = icp_refine_points(&cloud.positions(), &samples, &coarse_pose, &cfg.icp)?;
    let aligned = transform_cloud(cloud, &icp.pose);
    let report = point_to_mesh_distance(&aligned, &bvh)?;
    let heatmap = colorize_heatmap(&aligned, &report, cfg.heatmap_saturation)?;
    Ok(Evaluation {
        coarse_pose,
        icp,
        report,
        heatmap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::sample_mesh;
    use crate::Vec3;

    #[test]
    fn recovers_displaced_cube_samples() {
        let mesh = TriangleMesh::cuboid(Vec3::new(0.25, 0.15, 0.1));
        let truth = Pose::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.5, Vec3::new(0.3, 0.2, -0.1));
        let cloud = transform_cloud(&sample_mesh(&mesh, 3000, 11).unwrap(), &truth.inverse());
        let corr = CorrespondenceSet::new(
            [0u64, 500, 1000, 1500, 2000]
                .iter()
                .map(|&id| (id, truth.transform_point(&cloud.get(id).unwrap().position)))
                .collect(),
        );
        let cfg = EvalConfig { mesh_samples: 20_000, ..Default::default() };
        let e = evaluate(&cloud, &mesh, Some(&corr), &cfg).unwrap();
        assert!(e.coarse_pose.rotation_angle_to(&truth) < 1e-9);
        // ICP pulls toward discrete mesh samples, so the residual is small
        // but not zero
        assert!(e.report.summary.mean < 5e-4, "{:?}", e.report.summary);
        assert!(e.icp.pose.rotation_angle_to(&truth) < 1e-2);
        assert_eq!(e.heatmap.len(), cloud.len());
    }

    #[test]
    fn cloud_of_the_same_samples_scores_zero() {
        let mesh = TriangleMesh::cuboid(Vec3::new(0.2, 0.3, 0.1));
        let cfg = EvalConfig { mesh_samples: 5000, seed: 8, ..Default::default() };
        let cloud = sample_mesh(&mesh, cfg.mesh_samples, cfg.seed).unwrap();
        let corr = CorrespondenceSet::new(
            [0u64, 1, 2, 3].iter().map(|&id| (id, cloud.get(id).unwrap().position)).collect(),
        );
        let e = evaluate(&cloud, &mesh, Some(&corr), &cfg).unwrap();
        assert!(e.report.summary.mean < 1e-6);
        assert!(e.icp.rmse < 1e-9);
    }

    #[test]
    fn empty_inputs() {
        let cloud = PointCloud::from_positions(&[Vec3::zeros()], [0; 3]).unwrap();
        assert_eq!(
            evaluate(&PointCloud::empty(), &TriangleMesh::unit_cube(), None, &EvalConfig::default()).unwrap_err(),
            EvalError::EmptyCloud
        );
        assert_eq!(
            evaluate(&cloud, &TriangleMesh::default(), None, &EvalConfig::default()).unwrap_err(),
            EvalError::EmptyMesh
        );
    }
}
