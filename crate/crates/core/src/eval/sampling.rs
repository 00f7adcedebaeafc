use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::mesh::TriangleMesh;
use crate::model::{PointCloud, PointId, Point};
use crate::Vec3;

const SAMPLE_COLOR: [u8; 3] = [200, 200, 200];

/// `n` area-weighted surface samples: a triangle is chosen by inverting the
/// cumulative area, then a point uniformly inside it.
pub fn sample_mesh_points(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<Vec<Vec3>, EvalError> {
    if mesh.is_empty() {
        return Err(EvalError::EmptyMesh);
    }
    if n == 0 {
        return Err(EvalError::InvalidConfig("sample count must be at least 1".into()));
    }
    let triangles: Vec<_> = mesh.triangles().collect();
    let mut cumulative = Vec::with_capacity(triangles.len());
    let mut total = 0.0;
    for t in &triangles {
        total += t.area();
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let target = rng.random::<f64>() * total;
            let ti = cumulative
                .partition_point(|&c| c <= target)
                .min(triangles.len() - 1);
            let t = &triangles[ti];
            let s = rng.random::<f64>().sqrt();
            let r = rng.random::<f64>();
            t.a * (1.0 - s) + t.b * (s * (1.0 - r)) + t.c * (s * r)
        })
        .collect())
}

pub fn sample_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud, EvalError> {
    let points = sample_mesh_points(mesh, n, seed)?
        .into_iter()
        .enumerate()
        .map(|(i, p)| Point::new(i as PointId, p, SAMPLE_COLOR))
        .collect();
    Ok(PointCloud::from_points_unchecked(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvh::TriangleBvh;

    #[test]
    fn samples_stay_inside_a_single_triangle() {
        let mesh = TriangleMesh::new(
            vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(2.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        for p in sample_mesh_points(&mesh, 1000, 4).unwrap() {
            // barycentric coordinates of (x, y) in this right triangle
            let (u, v) = (p.x / 2.0, p.y);
            let w = 1.0 - u - v;
            assert!(u >= 0.0 && v >= 0.0 && w >= -1e-15, "{p:?}");
            assert!((p.z - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let mesh = TriangleMesh::unit_cube();
        assert_eq!(sample_mesh(&mesh, 500, 1).unwrap(), sample_mesh(&mesh, 500, 1).unwrap());
        assert_ne!(sample_mesh(&mesh, 500, 1).unwrap(), sample_mesh(&mesh, 500, 2).unwrap());
    }

    #[test]
    fn samples_lie_on_surface() {
        let mesh = TriangleMesh::cuboid(Vec3::new(0.3, 0.2, 0.7));
        let bvh = TriangleBvh::new(&mesh).unwrap();
        for p in sample_mesh_points(&mesh, 5000, 9).unwrap() {
            assert!(bvh.distance(&p) <= 1e-12);
        }
    }

    #[test]
    fn counts_follow_area_ratio() {
        // areas 4.5 and 0.5
        let mesh = TriangleMesh::new(
            vec![
                Vec3::zeros(),
                Vec3::new(3.0, 0.0, 0.0),
                Vec3::new(0.0, 3.0, 0.0),
                Vec3::new(10.0, 0.0, 0.0),
                Vec3::new(11.0, 0.0, 0.0),
                Vec3::new(10.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let n = 100_000;
        let big = sample_mesh_points(&mesh, n, 3)
            .unwrap()
            .iter()
            .filter(|p| p.x < 5.0)
            .count() as f64;
        let expected = 0.9 * n as f64;
        let sd = (n as f64 * 0.9 * 0.1).sqrt();
        assert!((big - expected).abs() <= 3.0 * sd, "{big}");
    }

    #[test]
    fn errors() {
        assert_eq!(
            sample_mesh_points(&TriangleMesh::default(), 10, 0).unwrap_err(),
            EvalError::EmptyMesh
        );
        assert!(sample_mesh_points(&TriangleMesh::unit_cube(), 0, 0).is_err());
    }
}
