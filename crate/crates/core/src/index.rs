//! Immutable k-d tree snapshot over a point cloud.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::model::{GeometryError, PointCloud, PointId};
use crate::Vec3;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Neighbor candidate ordered by (squared distance, slot); the slot
/// tie-break makes every query deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    slot: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.slot.cmp(&other.slot))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// k-d tree over bare positions. Query results are indices into the slice
/// the tree was built from.
#[derive(Debug, Clone)]
pub struct KdTree {
    positions: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(positions: Vec<Vec3>) -> Self {
        let mut tree = KdTree {
            order: (0..positions.len()).collect(),
            positions,
            nodes: Vec::new(),
        };
        if !tree.positions.is_empty() {
            tree.build(0, tree.positions.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, index: usize) -> &Vec3 {
        &self.positions[index]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let node_index = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return node_index;
        }
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &i in &self.order[start..end] {
            lo = lo.inf(&self.positions[i]);
            hi = hi.sup(&self.positions[i]);
        }
        let axis = (hi - lo).imax();
        let mid = (start + end) / 2;
        let positions = &self.positions;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            positions[a][axis].total_cmp(&positions[b][axis])
        });
        let value = positions[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[node_index] = Node::Split { axis, value, left, right };
        node_index
    }

    /// The `k` nearest positions to `query` as `(index, distance)`, closest
    /// first. Returns fewer than `k` when the tree is smaller.
    pub fn knn(&self, query: &Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_visit(0, query, k, &mut heap);
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| (c.slot, c.dist2.sqrt()))
            .collect()
    }

    fn knn_visit(&self, node: usize, q: &Vec3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        dist2: (self.positions[i] - q).norm_squared(),
                        slot: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_visit(near, q, k, heap);
                if heap.len() < k || diff * diff <= heap.peek().expect("nonempty").dist2 {
                    self.knn_visit(far, q, k, heap);
                }
            }
        }
    }

    pub fn nearest(&self, query: &Vec3) -> Option<(usize, f64)> {
        self.knn(query, 1).into_iter().next()
    }

    /// Indices of all positions within `radius` (inclusive), ascending.
    pub fn within_radius(&self, query: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.is_empty() {
            self.radius_visit(0, query, radius * radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn radius_visit(&self, node: usize, q: &Vec3, r2: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => out.extend(
                self.order[start..end]
                    .iter()
                    .copied()
                    .filter(|&i| (self.positions[i] - q).norm_squared() <= r2),
            ),
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                if diff <= 0.0 || diff * diff <= r2 {
                    self.radius_visit(left, q, r2, out);
                }
                if diff >= 0.0 || diff * diff <= r2 {
                    self.radius_visit(right, q, r2, out);
                }
            }
        }
    }
}

/// Neighbor index over a snapshot of a [`PointCloud`]. Later edits to the
/// cloud do not affect the index.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    tree: KdTree,
    ids: Vec<PointId>,
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self, GeometryError> {
        if cloud.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        Ok(Self {
            tree: KdTree::new(cloud.positions()),
            ids: cloud.ids(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ids in snapshot order.
    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn position_at(&self, slot: usize) -> &Vec3 {
        self.tree.position(slot)
    }

    pub fn slot_of(&self, id: PointId) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    /// `(id, distance)` of the `k` nearest points, closest first.
    pub fn knn(&self, query: &Vec3, k: usize) -> Vec<(PointId, f64)> {
        self.tree
            .knn(query, k)
            .into_iter()
            .map(|(slot, d)| (self.ids[slot], d))
            .collect()
    }

    pub fn within_radius(&self, query: &Vec3, radius: f64) -> Vec<PointId> {
        self.tree
            .within_radius(query, radius)
            .into_iter()
            .map(|slot| self.ids[slot])
            .collect()
    }

    fn mean_distance_at_slot(&self, slot: usize, k: usize) -> f64 {
        // The k+1 nearest always include one zero-distance entry standing in
        // for the point itself (itself, or an exact duplicate).
        let hits = self.tree.knn(self.tree.position(slot), k + 1);
        hits[1..].iter().map(|(_, d)| d).sum::<f64>() / k as f64
    }

    /// Mean distance to the `k` nearest other points, for every point in
    /// snapshot order.
    pub fn all_knn_mean_distances(&self, k: usize) -> Result<Vec<f64>, GeometryError> {
        self.check_k(k)?;
        Ok((0..self.len())
            .into_par_iter()
            .map(|slot| self.mean_distance_at_slot(slot, k))
            .collect())
    }

    fn check_k(&self, k: usize) -> Result<(), GeometryError> {
        if k == 0 || self.len() <= k {
            return Err(GeometryError::TooFewPoints {
                needed: k,
                available: self.len(),
            });
        }
        Ok(())
    }
}

/// Mean Euclidean distance from `point_id` to its `k` nearest other points.
pub fn knn_mean_distance(
    index: &SpatialIndex,
    point_id: PointId,
    k: usize,
) -> Result<f64, GeometryError> {
    index.check_k(k)?;
    let slot = index
        .slot_of(point_id)
        .ok_or(GeometryError::UnknownPoint(point_id))?;
    Ok(index.mean_distance_at_slot(slot, k))
}
