use rayon::prelude::*;

use super::align::rigid_fit;
use super::EvalError;
use crate::index::KdTree;
use crate::model::{PointCloud, Pose};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpConfig {
    pub max_iterations: usize,
    /// Pairs farther apart than this are ignored.
    pub max_correspondence_distance: f64,
    /// Stop once an iteration improves the inlier RMSE by less than this.
    pub convergence_delta: f64,
}

impl Default for IcpConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            max_correspondence_distance: 0.05,
            convergence_delta: 1e-7,
        }
    }
}

impl IcpConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.max_iterations == 0 {
            return Err(EvalError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.max_correspondence_distance.is_finite() && self.max_correspondence_distance > 0.0) {
            return Err(EvalError::InvalidConfig(
                "max_correspondence_distance must be positive".into(),
            ));
        }
        if self.convergence_delta.is_nan() || self.convergence_delta < 0.0 {
            return Err(EvalError::InvalidConfig("convergence_delta must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpIteration {
    pub inliers: usize,
    /// Inlier RMSE before the update.
    pub rmse_before: f64,
    /// RMSE of the same pairs after the update.
    pub rmse_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    pub pose: Pose,
    /// Inlier RMSE at the final pose with fresh correspondences.
    pub rmse: f64,
    pub inliers: usize,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IcpIteration>,
}

/// Source index paired with target index, gated by distance.
fn correspondences(
    source: &[Vec3],
    target: &KdTree,
    pose: &Pose,
    gate: f64,
) -> Vec<(usize, usize)> {
    source
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let moved = pose.transform_point(p);
            target
                .nearest(&moved)
                .filter(|&(_, d)| d <= gate)
                .map(|(j, _)| (i, j))
        })
        .collect()
}

fn rmse(source: &[Vec3], target: &KdTree, pose: &Pose, pairs: &[(usize, usize)]) -> f64 {
    let sum: f64 = pairs
        .iter()
        .map(|&(i, j)| (pose.transform_point(&source[i]) - target.position(j)).norm_squared())
        .sum();
    (sum / pairs.len() as f64).sqrt()
}

/// Point-to-point ICP of `source` onto the points held by `target`,
/// starting from `init`.
pub fn icp_refine_points(
    source: &[Vec3],
    target: &KdTree,
    init: &Pose,
    cfg: &IcpConfig,
) -> Result<IcpResult, EvalError> {
    cfg.validate()?;
    if source.is_empty() || target.is_empty() {
        return Err(EvalError::EmptyCloud);
    }
    let gate = cfg.max_correspondence_distance;
    let mut pose = *init;
    let mut history = Vec::new();
    let mut converged = false;
    for iteration in 0..cfg.max_iterations {
        let pairs = correspondences(source, target, &pose, gate);
        if pairs.is_empty() {
            return Err(EvalError::NoCorrespondences { iteration });
        }
        let before = rmse(source, target, &pose, &pairs);
        let src: Vec<Vec3> = pairs.iter().map(|&(i, _)| pose.transform_point(&source[i])).collect();
        let dst: Vec<Vec3> = pairs.iter().map(|&(_, j)| *target.position(j)).collect();
        let step = rigid_fit(&src, &dst);
        let next = step.compose(&pose);
        let after = rmse(source, target, &next, &pairs);
        debug_assert!(after <= before + 1e-12, "ICP step increased RMSE: {before} -> {after}");
        history.push(IcpIteration {
            inliers: pairs.len(),
            rmse_before: before,
            rmse_after: after,
        });
        pose = next;
        if before - after < cfg.convergence_delta {
            converged = true;
            break;
        }
    }
    let pairs = correspondences(source, target, &pose, gate);
    if pairs.is_empty() {
        return Err(EvalError::NoCorrespondences {
            iteration: history.len(),
        });
    }
    Ok(IcpResult {
        pose,
        rmse: rmse(source, target, &pose, &pairs),
        inliers: pairs.len(),
        iterations: history.len(),
        converged,
        history,
    })
}

pub fn icp_refine(
    source: &PointCloud,
    target: &PointCloud,
    init: &Pose,
    cfg: &IcpConfig,
) -> Result<IcpResult, EvalError> {
    let tree = KdTree::new(target.positions());
    icp_refine_points(&source.positions(), &tree, init, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob(n: usize, seed: u64) -> Vec<Vec3> {
        // anisotropic so no rotation symmetry
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-0.4..0.4),
                    rng.random_range(-0.2..0.2),
                    rng.random_range(-0.1..0.1),
                )
            })
            .collect()
    }

    #[test]
    fn converges_on_small_offset() {
        let target = blob(3000, 1);
        let truth = Pose::from_axis_angle(Vec3::new(0.1, 0.3, 1.0), 0.03, Vec3::new(0.01, -0.005, 0.008));
        let source: Vec<Vec3> = target.iter().map(|p| truth.inverse().transform_point(p)).collect();
        let tree = KdTree::new(target);
        let cfg = IcpConfig { max_iterations: 200, convergence_delta: 1e-12, ..Default::default() };
        let r = icp_refine_points(&source, &tree, &Pose::identity(), &cfg).unwrap();
        assert!(r.rmse < 1e-6, "rmse {}", r.rmse);
        assert!(r.pose.rotation_angle_to(&truth) < 1e-5);
        for h in &r.history {
            assert!(h.rmse_after <= h.rmse_before + 1e-12);
        }
    }

    #[test]
    fn perfect_overlap_converges_immediately() {
        let pts = blob(200, 2);
        let tree = KdTree::new(pts.clone());
        let r = icp_refine_points(&pts, &tree, &Pose::identity(), &IcpConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.rmse < 1e-12);
    }

    #[test]
    fn far_clouds_have_no_correspondences() {
        let pts = blob(100, 3);
        let far: Vec<Vec3> = pts.iter().map(|p| p + Vec3::new(10.0, 0.0, 0.0)).collect();
        let tree = KdTree::new(pts);
        assert_eq!(
            icp_refine_points(&far, &tree, &Pose::identity(), &IcpConfig::default()),
            Err(EvalError::NoCorrespondences { iteration: 0 })
        );
    }

    #[test]
    fn config_is_validated() {
        let tree = KdTree::new(blob(10, 4));
        let bad = IcpConfig { max_correspondence_distance: 0.0, ..Default::default() };
        assert!(matches!(
            icp_refine_points(&blob(10, 4), &tree, &Pose::identity(), &bad),
            Err(EvalError::InvalidConfig(_))
        ));
    }
}
