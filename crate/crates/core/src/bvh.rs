//! Bounding-volume hierarchy over mesh triangles, used for closest-point
//! distance queries and for ray casting in the capture simulator.

use crate::mesh::{MeshError, Triangle, TriangleMesh};
use crate::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    kind: NodeKind,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestHit {
    /// Index of the triangle in the source mesh.
    pub triangle: usize,
    pub point: Vec3,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub triangle: usize,
    /// Ray parameter: hit point is `origin + t·dir`.
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct TriangleBvh {
    triangles: Vec<Triangle>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl TriangleBvh {
    pub fn new(mesh: &TriangleMesh) -> Result<Self, MeshError> {
        if mesh.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        let triangles: Vec<Triangle> = mesh.triangles().collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| t.centroid()).collect();
        let mut bvh = Self {
            order: (0..triangles.len()).collect(),
            triangles,
            nodes: Vec::new(),
        };
        bvh.build(0, bvh.triangles.len(), &centroids);
        Ok(bvh)
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> &Triangle {
        &self.triangles[i]
    }

    fn build(&mut self, start: usize, end: usize, centroids: &[Vec3]) -> usize {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        let mut clo = lo;
        let mut chi = hi;
        for &i in &self.order[start..end] {
            let t = &self.triangles[i];
            for v in [t.a, t.b, t.c] {
                lo = lo.inf(&v);
                hi = hi.sup(&v);
            }
            clo = clo.inf(&centroids[i]);
            chi = chi.sup(&centroids[i]);
        }
        let index = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            kind: NodeKind::Leaf { start, end },
        });
        if end - start <= LEAF_SIZE {
            return index;
        }
        let axis = (chi - clo).imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis]
                .total_cmp(&centroids[b][axis])
                .then(a.cmp(&b))
        });
        let left = self.build(start, mid, centroids);
        let right = self.build(mid, end, centroids);
        self.nodes[index].kind = NodeKind::Inner { left, right };
        index
    }

    fn box_distance2(node: &Node, p: &Vec3) -> f64 {
        let d = (node.lo - p).sup(&Vec3::zeros()).sup(&(p - node.hi));
        d.norm_squared()
    }

    /// Closest point on the mesh surface to `p`. Ties between triangles at
    /// the same distance resolve to the lowest triangle index.
    pub fn closest_point(&self, p: &Vec3) -> ClosestHit {
        let mut best = ClosestHit {
            triangle: usize::MAX,
            point: Vec3::zeros(),
            distance: f64::INFINITY,
        };
        let mut best_d2 = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if Self::box_distance2(node, p) > best_d2 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for &ti in &self.order[start..end] {
                        let q = self.triangles[ti].closest_point(p);
                        let d2 = (q - p).norm_squared();
                        if d2 < best_d2 || (d2 == best_d2 && ti < best.triangle) {
                            best_d2 = d2;
                            best = ClosestHit {
                                triangle: ti,
                                point: q,
                                distance: 0.0,
                            };
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = Self::box_distance2(&self.nodes[left], p);
                    let dr = Self::box_distance2(&self.nodes[right], p);
                    // push the farther child first so the nearer is visited first
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best.distance = (best.point - p).norm();
        best
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        self.closest_point(p).distance
    }

    fn ray_box(node: &Node, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for i in 0..3 {
            if inv_dir[i].is_infinite() {
                if origin[i] < node.lo[i] || origin[i] > node.hi[i] {
                    return None;
                }
                continue;
            }
            let a = (node.lo[i] - origin[i]) * inv_dir[i];
            let b = (node.hi[i] - origin[i]) * inv_dir[i];
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    /// First hit along `origin + t·dir` with `0 < t ≤ t_max`. Ties resolve to
    /// the lowest triangle index.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<RayHit> {
        let inv_dir = dir.map(|c| 1.0 / c);
        let mut best: Option<RayHit> = None;
        let mut limit = t_max;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let Some(enter) = Self::ray_box(node, origin, &inv_dir, limit) else {
                continue;
            };
            if enter > limit {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for &ti in &self.order[start..end] {
                        if let Some(t) = self.triangles[ti].intersect_ray(origin, dir) {
                            let better = match best {
                                None => t <= limit,
                                Some(b) => t < b.t || (t == b.t && ti < b.triangle),
                            };
                            if better {
                                best = Some(RayHit { triangle: ti, t });
                                limit = t;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }
}
