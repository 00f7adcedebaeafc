use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use serde_json::{json, Value};

use workcell_core::toolbox::{EditSession, ToolInvocation};
use workcell_core::{Point, PointCloud, Vec3};
use workcell_service::protocol::{decode_points, encode_points, read_frame, write_frame, MAX_CHUNK_POINTS};
use workcell_service::server::serve_listener;
use workcell_service::{ErrorCode, Response, Service};

fn grid(n: usize) -> PointCloud {
    let ps: Vec<Vec3> = (0..n * n)
        .map(|i| Vec3::new((i % n) as f64 * 0.01, (i / n) as f64 * 0.01, 0.0))
        .collect();
    PointCloud::from_positions(&ps, [10, 20, 30]).unwrap()
}

/// A grid with a handful of stray points hovering above it.
fn grid_with_strays(n: usize) -> PointCloud {
    let mut ps = grid(n).positions();
    ps.extend((0..5).map(|i| Vec3::new(i as f64 * 0.05, 0.1, 0.3 + i as f64 * 0.1)));
    PointCloud::from_positions(&ps, [10, 20, 30]).unwrap()
}

struct Client {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    next_id: u64,
}

impl Client {
    fn connect(service: Service) -> (Self, thread::JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = thread::spawn(move || {
            let mut service = service;
            serve_listener(&listener, &mut service).unwrap();
        });
        let stream = TcpStream::connect(addr).unwrap();
        let client = Self {
            reader: BufReader::new(stream.try_clone().unwrap()),
            writer: BufWriter::new(stream),
            next_id: 1,
        };
        (client, handle)
    }

    fn raw(&mut self, bytes: &[u8]) -> Response {
        write_frame(&mut self.writer, bytes).unwrap();
        self.writer.flush().unwrap();
        let frame = read_frame(&mut self.reader).unwrap().unwrap();
        serde_json::from_slice(&frame).unwrap()
    }

    /// Sends one request and collects its binary chunks as points.
    fn call(&mut self, verb: &str, params: Value) -> (Response, Vec<Point>) {
        let id = self.next_id;
        self.next_id += 1;
        let body = json!({ "id": id, "verb": verb, "params": params });
        let r = self.raw(&serde_json::to_vec(&body).unwrap());
        assert_eq!(r.id, Some(id));
        let chunks = r
            .payload
            .as_ref()
            .and_then(|p| p.get("chunks"))
            .and_then(Value::as_u64)
            .unwrap_or(0);
        let mut points = Vec::new();
        for _ in 0..chunks {
            let frame = read_frame(&mut self.reader).unwrap().unwrap();
            points.extend(decode_points(&frame).unwrap());
        }
        (r, points)
    }
}

#[test]
fn discard_restores_the_cloud_over_tcp() {
    let cloud = grid_with_strays(30);
    let (mut c, server) = Client::connect(Service::with_cloud(cloud.clone()));

    let (r, before) = c.call("get_cloud", Value::Null);
    assert!(r.ok);
    let expected = decode_points(&encode_points(cloud.points())).unwrap();
    assert_eq!(before, expected);

    let (r, _) = c.call("tool", json!({"tool": "remove_outliers", "strength": "medium"}));
    assert!(r.ok, "{r:?}");
    assert!(r.payload.unwrap()["removed"].as_u64().unwrap() > 0);
    let (r, _) = c.call("discard", Value::Null);
    assert!(r.ok);

    let (_, after) = c.call("get_cloud", Value::Null);
    assert_eq!(after, before);

    let (r, _) = c.call("commit", Value::Null);
    assert_eq!(r.error_code(), Some(ErrorCode::NoPending));

    drop(c);
    server.join().unwrap();
}

#[test]
fn preview_diff_matches_the_library() {
    // 4 mm spacing so the weak voxel merges neighbours
    let ps: Vec<Vec3> = grid(40).positions().iter().map(|p| p * 0.4).collect();
    let cloud = PointCloud::from_positions(&ps, [10, 20, 30]).unwrap();
    let tool = json!({"tool": "downsample", "strength": "weak"});
    let mut lib = EditSession::new(cloud.clone());
    let expected = lib
        .preview(serde_json::from_value::<ToolInvocation>(tool.clone()).unwrap())
        .unwrap()
        .clone();

    let (mut c, server) = Client::connect(Service::with_cloud(cloud));
    c.call("tool", tool);
    let (r, added) = c.call("preview_diff", Value::Null);
    let payload = r.payload.unwrap();
    assert_eq!(payload["added"].as_u64().unwrap() as usize, expected.added.len());
    assert_eq!(added, decode_points(&encode_points(&expected.added)).unwrap());
    let removed: Vec<u64> = serde_json::from_value(payload["removed"].clone()).unwrap();
    assert_eq!(removed, expected.removed.iter().copied().collect::<Vec<_>>());
    assert!(!removed.is_empty());

    let (r, _) = c.call("commit", Value::Null);
    let count = r.payload.unwrap()["count"].as_u64().unwrap() as usize;
    assert_eq!(count, 1600 - removed.len() + added.len());
    let (r, _) = c.call("undo", Value::Null);
    assert_eq!(r.payload.unwrap()["count"], 1600);

    drop(c);
    server.join().unwrap();
}

#[test]
fn large_primitives_arrive_in_capped_chunks() {
    let (mut c, server) = Client::connect(Service::with_cloud(grid(3)));
    // a 1 m cube sampled every 2 mm has far more than one chunk of points
    let (r, _) = c.call(
        "tool",
        json!({"tool": "create_primitive", "primitive": {
            "pose": {"translation": [0, 0, 0], "rotation": [1, 0, 0, 0]},
            "dimensions": [1.0, 1.0, 1.0],
            "sample_spacing": 0.002
        }}),
    );
    assert!(r.ok, "{r:?}");
    let added = r.payload.unwrap()["added"].as_u64().unwrap() as usize;
    assert!(added > MAX_CHUNK_POINTS);

    let (r, points) = c.call("preview_diff", Value::Null);
    let chunks = r.payload.unwrap()["chunks"].as_u64().unwrap() as usize;
    assert_eq!(chunks, added.div_ceil(MAX_CHUNK_POINTS));
    assert_eq!(points.len(), added);

    drop(c);
    server.join().unwrap();
}

#[test]
fn bad_ids_and_garbage_keep_the_connection_alive() {
    let (mut c, server) = Client::connect(Service::with_cloud(grid(4)));
    assert!(c.raw(br#"{"id": 10, "verb": "stats"}"#).ok);
    assert_eq!(c.raw(br#"{"id": 3, "verb": "stats"}"#).error_code(), Some(ErrorCode::BadId));
    let r = c.raw(b"\xff\xfe");
    assert_eq!((r.id, r.error_code()), (None, Some(ErrorCode::BadRequest)));
    let r = c.raw(br#"{"id": 11, "verb": "stats"}"#);
    assert_eq!(r.payload.unwrap()["count"], 16);
    drop(c);
    server.join().unwrap();
}
