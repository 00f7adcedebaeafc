use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;

use workcell_core::bvh::TriangleBvh;
use workcell_core::capture::{should_capture, CaptureConfig};
use workcell_core::eval::{icp_refine, point_to_mesh_distance, IcpConfig};
use workcell_core::io::{parse_obj, read_ply_from, write_ply_to, PlyFormat};
use workcell_core::mesh::TriangleMesh;
use workcell_core::model::{points_in_cone, points_in_oriented_box, transform_cloud};
use workcell_core::{Cone, OrientedBox, PointCloud, Pose};

type V = Vector3<f64>;

fn vec3(r: f64) -> impl Strategy<Value = V> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| V::new(x, y, z))
}

fn pose(r: f64) -> impl Strategy<Value = Pose> {
    (vec3(1.0), -3.1..3.1f64, vec3(r)).prop_filter_map("zero axis", |(axis, angle, t)| {
        (axis.norm() > 1e-3).then(|| Pose::from_axis_angle(axis, angle, t))
    })
}

fn cloud(max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(vec3(2.0), 1..max)
        .prop_map(|ps| PointCloud::from_positions(&ps, [10, 20, 30]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rigid_transform_preserves_distances(c in cloud(40), p in pose(5.0)) {
        let moved = transform_cloud(&c, &p);
        let a = c.positions();
        let b = moved.positions();
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                prop_assert!(((a[i] - a[j]).norm() - (b[i] - b[j]).norm()).abs() < 1e-12);
            }
        }
        prop_assert_eq!(moved.ids(), c.ids());
    }

    #[test]
    fn selections_move_with_the_scene(
        c in cloud(300),
        p in pose(1.0),
        box_pose in pose(1.0),
        half in (0.1..1.0f64, 0.1..1.0f64, 0.1..1.0f64),
        cone_axis in vec3(1.0),
    ) {
        prop_assume!(cone_axis.norm() > 1e-3);
        let obb = OrientedBox::new(box_pose, V::new(half.0, half.1, half.2)).unwrap();
        let moved_obb = OrientedBox::new(p.compose(&box_pose), obb.half_extents).unwrap();
        let cone = Cone::new(V::zeros(), cone_axis.normalize(), 2.0, 1.0).unwrap();
        let moved_cone = Cone::new(p.translation, p.rotate_vector(&cone.axis), 2.0, 1.0).unwrap();
        let moved = transform_cloud(&c, &p);
        // boundary-straddling points can flip by rounding; compare away from it
        let margin_ok = |a: &std::collections::BTreeSet<u64>, b: &std::collections::BTreeSet<u64>| {
            a.symmetric_difference(b).count() <= 1
        };
        prop_assert!(margin_ok(&points_in_oriented_box(&c, &obb), &points_in_oriented_box(&moved, &moved_obb)));
        prop_assert!(margin_ok(&points_in_cone(&c, &cone), &points_in_cone(&moved, &moved_cone)));
    }

    #[test]
    fn distance_report_is_rigid_invariant(c in cloud(200), p in pose(3.0), half in vec3(1.0)) {
        let mesh = TriangleMesh::cuboid(half.abs().add_scalar(0.05));
        let before = point_to_mesh_distance(&c, &TriangleBvh::new(&mesh).unwrap()).unwrap();
        let after = point_to_mesh_distance(
            &transform_cloud(&c, &p),
            &TriangleBvh::new(&mesh.transformed(&p)).unwrap(),
        )
        .unwrap();
        let (a, b) = (before.summary, after.summary);
        for (x, y) in [(a.mean, b.mean), (a.median, b.median), (a.std, b.std), (a.min, b.min), (a.max, b.max)] {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn icp_from_exact_pose_never_worsens(c in cloud(200), p in pose(0.5), noise in 0.0..0.01f64) {
        prop_assume!(c.len() >= 3);
        // perturb the target so the exact pose is not a perfect fit
        let target_positions: Vec<V> = c
            .positions()
            .iter()
            .enumerate()
            .map(|(i, q)| p.transform_point(q) + V::new(noise * ((i * 7919) % 13) as f64 / 13.0, 0.0, 0.0))
            .collect();
        let target = PointCloud::from_positions(&target_positions, [0; 3]).unwrap();
        let cfg = IcpConfig { max_correspondence_distance: 1.0, ..Default::default() };
        let r = icp_refine(&c, &target, &p, &cfg).unwrap();
        let start = r.history[0].rmse_before;
        prop_assert!(r.history.iter().all(|h| h.rmse_after <= h.rmse_before + 1e-12));
        prop_assert!(r.history.last().unwrap().rmse_after <= start + 1e-12);
    }

    #[test]
    fn capture_trigger_is_monotone(
        dt in 0.0..0.03f64,
        dtheta in 0.0..3.0f64,
        s in 0.0..=1.0f64,
        r in 0.0..=1.0f64,
        dir in vec3(1.0),
        axis in vec3(1.0),
    ) {
        prop_assume!(dir.norm() > 1e-3 && axis.norm() > 1e-3);
        let cfg = CaptureConfig::default();
        let make = |dt: f64, dtheta: f64| {
            Pose::new(
                UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), dtheta.to_radians()),
                dir.normalize() * dt,
            )
        };
        let o = Pose::identity();
        if !should_capture(&o, &make(dt, dtheta), &cfg) {
            prop_assert!(!should_capture(&o, &make(dt * s, dtheta * r), &cfg));
        }
    }

    #[test]
    fn ply_round_trip(c in cloud(200), ascii in any::<bool>()) {
        let format = if ascii { PlyFormat::Ascii } else { PlyFormat::BinaryLittleEndian };
        let mut bytes = Vec::new();
        write_ply_to(&c, &mut bytes, format).unwrap();
        let back = read_ply_from(&bytes).unwrap();
        prop_assert_eq!(back.ids(), c.ids());
        for (a, b) in c.iter().zip(back.iter()) {
            prop_assert_eq!(b.position, a.position.map(|v| v as f32 as f64));
            prop_assert_eq!(a.color, b.color);
        }
    }

    #[test]
    fn obj_fan_triangle_count(faces in prop::collection::vec(3usize..8, 1..20)) {
        // each face gets its own regular polygon so nothing is degenerate
        let mut text = String::new();
        let mut next = 1;
        for (f, &n) in faces.iter().enumerate() {
            for k in 0..n {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                text.push_str(&format!("v {} {} {}\n", a.cos(), a.sin(), f));
            }
            let idx: Vec<String> = (next..next + n).map(|i| i.to_string()).collect();
            text.push_str(&format!("f {}\n", idx.join(" ")));
            next += n;
        }
        let mesh = parse_obj(&text).unwrap();
        prop_assert_eq!(mesh.triangle_count(), faces.iter().map(|n| n - 2).sum::<usize>());
    }
}
