//! Exact k-nearest-neighbour search over a KD-tree.
//!
//! Nodes split on the dimension of largest spread at the lower median.
//! Every node keeps the tight bounding box of its points; a subtree is
//! skipped only when the distance from the query to the box is strictly
//! greater than the current k-th best distance. The box distance is the
//! metric distance to the clamped query, so it never exceeds the distance
//! to any point inside the box, for every Minkowski exponent.
//!
//! Results are ordered by `(distance, row index)`; among equal distances at
//! the k-boundary the smaller row index wins.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dataset::Matrix;
use crate::distance::Metric;
use crate::error::{Error, Result};

pub const DEFAULT_LEAF_CAPACITY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    kind: NodeKind,
}

/// KD-tree over the rows of a point matrix. The index stores row numbers
/// only; queries take the same matrix it was built from.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    dim: usize,
    n_points: usize,
    leaf_capacity: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl NeighborIndex {
    pub fn build(points: &Matrix, leaf_capacity: usize) -> Result<Self> {
        if points.n_rows() == 0 {
            return Err(Error::Empty("neighbour index needs at least one point"));
        }
        if points.n_cols() == 0 {
            return Err(Error::Empty("neighbour index needs at least one dimension"));
        }
        if leaf_capacity == 0 {
            return Err(Error::InvalidParameter("leaf capacity must be positive".into()));
        }
        let mut index = NeighborIndex {
            dim: points.n_cols(),
            n_points: points.n_rows(),
            leaf_capacity,
            order: (0..points.n_rows()).collect(),
            nodes: Vec::new(),
        };
        index.build_node(points, 0, points.n_rows());
        Ok(index)
    }

    fn build_node(&mut self, points: &Matrix, start: usize, end: usize) -> usize {
        let (lo, hi) = bounding_box(points, &self.order[start..end], self.dim);
        let (dim, spread) = (0..self.dim)
            .map(|j| (j, hi[j] - lo[j]))
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });

        let id = self.nodes.len();
        if end - start <= self.leaf_capacity || spread <= 0.0 {
            self.nodes.push(Node {
                lo,
                hi,
                kind: NodeKind::Leaf { start, end },
            });
            return id;
        }

        self.order[start..end].sort_by(|&a, &b| {
            points.row(a)[dim]
                .total_cmp(&points.row(b)[dim])
                .then(a.cmp(&b))
        });
        let median = start + (end - start - 1) / 2;
        let value = points.row(self.order[median])[dim];
        // placeholder, children are filled in below
        self.nodes.push(Node {
            lo,
            hi,
            kind: NodeKind::Leaf { start, end },
        });
        let left = self.build_node(points, start, median + 1);
        let right = self.build_node(points, median + 1, end);
        self.nodes[id].kind = NodeKind::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match nodes[id].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Row indices grouped by leaf, in tree order.
    pub fn leaves(&self) -> Vec<&[usize]> {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Leaf { start, end } => Some(&self.order[start..end]),
                NodeKind::Split { .. } => None,
            })
            .collect()
    }

    /// Checks the partition property of every split node against `points`.
    pub fn is_valid_partition(&self, points: &Matrix) -> bool {
        fn rows(index: &NeighborIndex, id: usize, out: &mut Vec<usize>) {
            match index.nodes[id].kind {
                NodeKind::Leaf { start, end } => out.extend_from_slice(&index.order[start..end]),
                NodeKind::Split { left, right, .. } => {
                    rows(index, left, out);
                    rows(index, right, out);
                }
            }
        }
        self.nodes.iter().all(|n| match n.kind {
            NodeKind::Leaf { .. } => true,
            NodeKind::Split {
                dim,
                value,
                left,
                right,
            } => {
                let (mut l, mut r) = (Vec::new(), Vec::new());
                rows(self, left, &mut l);
                rows(self, right, &mut r);
                l.iter().all(|&i| points.row(i)[dim] <= value)
                    && r.iter().all(|&i| points.row(i)[dim] >= value)
            }
        })
    }

    /// The `k` nearest rows of `points` to `x`, ascending by (distance, index).
    pub fn query(
        &self,
        points: &Matrix,
        x: &[f64],
        k: usize,
        metric: &Metric,
    ) -> Result<Vec<Neighbor>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if points.n_rows() != self.n_points || points.n_cols() != self.dim {
            return Err(Error::InvalidParameter(
                "point set does not match the index".into(),
            ));
        }
        if k == 0 || k > self.n_points {
            return Err(Error::InvalidParameter(format!(
                "k={k} must be in 1..={}",
                self.n_points
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("query has non-finite entries".into()));
        }

        let mut search = Search {
            index: self,
            points,
            x,
            k,
            metric,
            heap: BinaryHeap::with_capacity(k + 1),
            scratch: vec![0.0; self.dim],
        };
        search.visit(0);
        let mut found: Vec<Neighbor> = search
            .heap
            .into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.distance,
            })
            .collect();
        found.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then(a.index.cmp(&b.index))
        });
        Ok(found)
    }
}

fn bounding_box(points: &Matrix, rows: &[usize], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &i in rows {
        for (j, &v) in points.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    distance: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

struct Search<'a> {
    index: &'a NeighborIndex,
    points: &'a Matrix,
    x: &'a [f64],
    k: usize,
    metric: &'a Metric,
    // max-heap: the top is the current worst of the best k
    heap: BinaryHeap<Candidate>,
    scratch: Vec<f64>,
}

impl Search<'_> {
    fn box_distance(&mut self, node: &Node) -> f64 {
        for (j, z) in self.scratch.iter_mut().enumerate() {
            *z = self.x[j].clamp(node.lo[j], node.hi[j]);
        }
        self.metric.distance_unchecked(self.x, &self.scratch)
    }

    fn offer(&mut self, candidate: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(candidate);
        } else if let Some(worst) = self.heap.peek() {
            if candidate < *worst {
                self.heap.pop();
                self.heap.push(candidate);
            }
        }
    }

    fn visit(&mut self, id: usize) {
        let index = self.index;
        let node = &index.nodes[id];
        if self.heap.len() == self.k {
            let bound = self.box_distance(node);
            if bound > self.heap.peek().map_or(f64::INFINITY, |w| w.distance) {
                return;
            }
        }
        match node.kind {
            NodeKind::Leaf { start, end } => {
                for &i in &index.order[start..end] {
                    let distance = self.metric.distance_unchecked(self.x, self.points.row(i));
                    self.offer(Candidate { distance, index: i });
                }
            }
            NodeKind::Split {
                dim,
                value,
                left,
                right,
            } => {
                let (near, far) = if self.x[dim] <= value {
                    (left, right)
                } else {
                    (right, left)
                };
                self.visit(near);
                self.visit(far);
            }
        }
    }
}
