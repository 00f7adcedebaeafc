use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen};

use super::{CorrespondenceSet, EvalError};
use crate::model::{PointCloud, Pose};
use crate::Vec3;

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().sum::<Vec3>() / points.len() as f64
}

/// Least-squares rigid transform (unit scale) taking `src[i]` onto
/// `dst[i]`: centroid subtraction, SVD of the cross-covariance, and a sign
/// fix so the result is a proper rotation.
pub fn rigid_fit(src: &[Vec3], dst: &[Vec3]) -> Pose {
    assert_eq!(src.len(), dst.len());
    assert!(!src.is_empty());
    let cs = centroid(src);
    let cd = centroid(dst);
    let mut h = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s - cs) * (d - cd).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V^T").transpose();
    let d = (v * u.transpose()).determinant().signum();
    let r = v * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * u.transpose();
    let pose = Pose::from_rotation_matrix(&r, Vec3::zeros());
    let t = cd - pose.rotate_vector(&cs);
    Pose::new(pose.rotation, t)
}

/// True when the points span less than a plane's worth of directions.
fn collinear(points: &[Vec3]) -> bool {
    let c = centroid(points);
    let mut cov = Matrix3::zeros();
    for p in points {
        cov += (p - c) * (p - c).transpose();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev[0] <= 0.0 || ev[1] <= 1e-12 * ev[0]
}

/// Rigid pose mapping the cloud frame onto the mesh frame from picked
/// point pairs.
pub fn align_from_correspondences(
    corr: &CorrespondenceSet,
    cloud: &PointCloud,
) -> Result<Pose, EvalError> {
    if corr.len() < 3 {
        return Err(EvalError::DegenerateCorrespondences(format!(
            "need at least 3 pairs, got {}",
            corr.len()
        )));
    }
    let lookup: HashMap<_, _> = cloud.iter().map(|p| (p.id, p.position)).collect();
    let src = corr
        .pairs
        .iter()
        .map(|(id, _)| lookup.get(id).copied().ok_or(EvalError::UnknownPoint(*id)))
        .collect::<Result<Vec<_>, _>>()?;
    let dst: Vec<Vec3> = corr.pairs.iter().map(|(_, q)| *q).collect();
    if collinear(&src) || collinear(&dst) {
        return Err(EvalError::DegenerateCorrespondences(
            "points are collinear".into(),
        ));
    }
    Ok(rigid_fit(&src, &dst))
}
