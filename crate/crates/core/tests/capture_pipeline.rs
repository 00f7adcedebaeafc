use std::fs;

use nalgebra::Vector3;

use workcell_core::bvh::TriangleBvh;
use workcell_core::capture::{
    capture_frame, load_scene, orbit_trajectory, simulate_scan, CameraIntrinsics, CaptureConfig,
    MaterialModel, SceneObject, SceneSpec,
};
use workcell_core::eval::point_to_mesh_distance;
use workcell_core::io::{parse_script, read_ply, write_ply, write_trajectory, read_trajectory, PlyFormat};
use workcell_core::mesh::TriangleMesh;
use workcell_core::toolbox::EditSession;
use workcell_core::Pose;

type V = Vector3<f64>;

fn cube_scene(material: MaterialModel) -> SceneSpec {
    SceneSpec::new(
        vec![SceneObject {
            mesh: TriangleMesh::unit_cube(),
            pose: Pose::identity(),
            material,
            color: [255, 0, 0],
        }],
        11,
    )
}

#[test]
fn noiseless_orbit_lies_on_the_cube() {
    let scene = cube_scene(MaterialModel::noiseless());
    let traj = orbit_trajectory(V::zeros(), 2.5, 1.0, 24).unwrap();
    let (cloud, frames) = simulate_scan(
        &scene,
        &traj,
        &CameraIntrinsics::default(),
        &CaptureConfig::default(),
        None,
    )
    .unwrap();
    assert_eq!(frames, 24);
    assert!(cloud.len() > 10_000);
    let bvh = TriangleBvh::new(&scene.world_mesh()).unwrap();
    let report = point_to_mesh_distance(&cloud, &bvh).unwrap();
    assert!(report.summary.max <= 1e-6, "{:?}", report.summary);
}

#[test]
fn scans_are_deterministic() {
    let m = MaterialModel {
        depth_noise_sigma: 0.004,
        outlier_prob: 0.05,
        outlier_scale: 0.4,
        dropout_prob: 0.1,
    };
    let traj = orbit_trajectory(V::zeros(), 2.0, 0.5, 8).unwrap();
    let run = || {
        simulate_scan(
            &cube_scene(m),
            &traj,
            &CameraIntrinsics::default(),
            &CaptureConfig::default(),
            None,
        )
        .unwrap()
        .0
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let bits = |c: &workcell_core::PointCloud| -> Vec<u64> {
        c.iter().flat_map(|p| p.position.iter().map(|v| v.to_bits()).collect::<Vec<_>>()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn frame_never_exceeds_the_grid() {
    let m = MaterialModel { depth_noise_sigma: 0.01, outlier_prob: 0.3, outlier_scale: 1.0, dropout_prob: 0.2 };
    let compiled = cube_scene(m).compile().unwrap();
    let cfg = CaptureConfig { grid_cols: 17, grid_rows: 9, ..Default::default() };
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    for pose in orbit_trajectory(V::zeros(), 1.2, 0.3, 10).unwrap() {
        let f = capture_frame(&compiled, &pose.pose, &CameraIntrinsics::default(), &cfg, &mut rng);
        assert!(f.points.len() <= 17 * 9);
        assert_eq!(f.points.len() + f.dropped, f.hits);
    }
}

#[test]
fn scene_files_drive_a_scan_and_a_script() {
    let dir = tempfile::tempdir().unwrap();
    let cube = "v -0.5 -0.5 -0.5\nv 0.5 -0.5 -0.5\nv 0.5 0.5 -0.5\nv -0.5 0.5 -0.5\n\
                v -0.5 -0.5 0.5\nv 0.5 -0.5 0.5\nv 0.5 0.5 0.5\nv -0.5 0.5 0.5\n\
                f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8\n";
    fs::write(dir.path().join("cube.obj"), cube).unwrap();
    fs::write(
        dir.path().join("scene.toml"),
        "seed = 3\n[[object]]\nmesh = \"cube.obj\"\ncolor = [0, 128, 255]\ntranslation = [0, 0, 0.5]\n\
         [object.material]\ndepth_noise_sigma = 0.002\n",
    )
    .unwrap();
    let loaded = load_scene(dir.path().join("scene.toml")).unwrap();
    assert_eq!(loaded.scene.objects[0].mesh.triangle_count(), 12);

    let traj_path = dir.path().join("traj.txt");
    write_trajectory(&orbit_trajectory(V::new(0.0, 0.0, 0.5), 2.0, 0.5, 6).unwrap(), &traj_path).unwrap();
    let traj = read_trajectory(&traj_path).unwrap();
    let (cloud, _) = simulate_scan(&loaded.scene, &traj, &loaded.intrinsics, &loaded.capture, None).unwrap();
    assert!(cloud.iter().all(|p| p.color == [0, 128, 255]));

    let ply = dir.path().join("scan.ply");
    write_ply(&cloud, &ply, PlyFormat::BinaryLittleEndian).unwrap();
    let script = parse_script("{\"tool\":\"downsample\",\"strength\":\"strong\"}\n").unwrap();
    let mut session = EditSession::new(read_ply(&ply).unwrap());
    session.apply_script(&script).unwrap();
    assert!(session.committed().len() < cloud.len());
    assert_eq!(session.history_len(), 1);
}
