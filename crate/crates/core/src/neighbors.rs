//! Exact Euclidean k-nearest-neighbour search.
//!
//! Brute force is the reference. The kd-tree computes squared distances with
//! the same arithmetic, visits candidates in a different order and keeps the
//! same `(distance, index)` ordering, so both paths return identical results,
//! ties included.

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    BruteForce,
    KdTree,
    /// kd-tree for low dimensions and enough points, brute force otherwise.
    #[default]
    Auto,
}

const LEAF_SIZE: usize = 12;

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[derive(Debug, Clone)]
enum Node {
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
struct KdTree {
    nodes: Vec<Node>,
    /// Point ids in leaf order.
    order: Vec<usize>,
}

/// Immutable point set answering exact kNN queries.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Vec<f64>,
    dim: usize,
    len: usize,
    tree: Option<KdTree>,
}

/// Bounded candidate list ordered by `(squared distance, index)`.
struct Candidates {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl Candidates {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn cmp(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    }

    /// Squared radius beyond which nothing can enter; `inf` until full.
    fn bound(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    fn offer(&mut self, d2: f64, idx: usize) {
        let cand = (d2, idx);
        if self.items.len() == self.k
            && Self::cmp(&cand, &self.items[self.k - 1]) != Ordering::Less
        {
            return;
        }
        let pos = self
            .items
            .partition_point(|x| Self::cmp(x, &cand) == Ordering::Less);
        self.items.insert(pos, cand);
        self.items.truncate(self.k);
    }
}

impl NeighborIndex {
    /// Builds an index over `points`, a row-major buffer of `dim` columns.
    pub fn build(points: Vec<f64>, dim: usize) -> Result<Self> {
        Self::build_with(points, dim, SearchStrategy::Auto)
    }

    pub fn build_with(points: Vec<f64>, dim: usize, strategy: SearchStrategy) -> Result<Self> {
        let len = points
            .len()
            .checked_div(dim)
            .ok_or_else(|| Error::InvalidParameter("neighbour index needs at least one feature".into()))?;
        if len == 0 {
            return Err(Error::InvalidDataset("empty point set".into()));
        }
        if points.len() != len * dim {
            return Err(Error::InvalidDataset(format!(
                "{} values is not a multiple of dimension {dim}",
                points.len()
            )));
        }
        let use_tree = match strategy {
            SearchStrategy::BruteForce => false,
            SearchStrategy::KdTree => true,
            SearchStrategy::Auto => len > 4 * LEAF_SIZE && dim <= 12,
        };
        let mut idx = Self {
            points,
            dim,
            len,
            tree: None,
        };
        if use_tree {
            idx.tree = Some(idx.build_tree());
        }
        Ok(idx)
    }

    /// Index over the listed rows of a dataset. Result indices are positions
    /// within `rows`, not dataset row ids.
    pub fn over_rows(d: &crate::LabeledDataset, rows: &[usize]) -> Result<Self> {
        Self::build(d.gather(rows), d.n_features())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn has_tree(&self) -> bool {
        self.tree.is_some()
    }

    fn build_tree(&self) -> KdTree {
        let mut order: Vec<usize> = (0..self.len).collect();
        let mut nodes = Vec::new();
        self.build_node(&mut order, 0, self.len, &mut nodes);
        KdTree { nodes, order }
    }

    fn build_node(&self, order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
        let id = nodes.len();
        nodes.push(Node::Leaf { start, end });
        if end - start <= LEAF_SIZE {
            return id;
        }
        // Split the widest dimension at the median.
        let slice = &mut order[start..end];
        let (dim, spread) = (0..self.dim)
            .map(|j| {
                let (lo, hi) = slice.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let v = self.points[i * self.dim + j];
                    (lo.min(v), hi.max(v))
                });
                (j, hi - lo)
            })
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if spread <= 0.0 {
            return id;
        }
        let mid = slice.len() / 2;
        let key = |i: &usize| self.points[i * self.dim + dim];
        slice.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)));
        let value = key(&slice[mid]);
        let left = self.build_node(order, start, start + mid, nodes);
        let right = self.build_node(order, start + mid, end, nodes);
        nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest indexed points to `query`, nearest first, ties broken by
    /// lower index. `exclude` skips one indexed point by identity.
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Result<Vec<Neighbor>> {
        let available = self.len - usize::from(exclude.is_some_and(|e| e < self.len));
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if k > available {
            return Err(Error::TooFewCandidates { k, available });
        }
        debug_assert_eq!(query.len(), self.dim);
        let mut cands = Candidates::new(k);
        match &self.tree {
            None => {
                for i in 0..self.len {
                    if Some(i) != exclude {
                        cands.offer(squared_distance(query, self.point(i)), i);
                    }
                }
            }
            Some(tree) => self.search(tree, 0, query, exclude, &mut cands),
        }
        Ok(cands
            .items
            .into_iter()
            .map(|(d2, index)| Neighbor {
                index,
                distance: d2.sqrt(),
            })
            .collect())
    }

    /// Neighbours of indexed point `i`, excluding itself.
    pub fn knn_of(&self, i: usize, k: usize) -> Result<Vec<Neighbor>> {
        self.knn(self.point(i), k, Some(i))
    }

    fn search(&self, tree: &KdTree, node: usize, q: &[f64], exclude: Option<usize>, cands: &mut Candidates) {
        match tree.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &tree.order[start..end] {
                    if Some(i) != exclude {
                        cands.offer(squared_distance(q, self.point(i)), i);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(tree, near, q, exclude, cands);
                // Points equal to the split value may sit on either side, so a
                // tie at the bound still has to be visited.
                if diff * diff <= cands.bound() {
                    self.search(tree, far, q, exclude, cands);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn brute(points: &[f64], dim: usize, q: &[f64], k: usize, exclude: Option<usize>) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = points
            .chunks(dim)
            .enumerate()
            .filter(|(i, _)| Some(*i) != exclude)
            .map(|(i, p)| (squared_distance(q, p), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|x| x.1).collect()
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(NeighborIndex::build(vec![], 2).is_err());
    }

    #[test]
    fn single_point() {
        let idx = NeighborIndex::build(vec![1.0, 2.0], 2).unwrap();
        assert_eq!(idx.len(), 1);
        let nn = idx.knn(&[0.0, 0.0], 1, None).unwrap();
        assert_eq!(nn[0].index, 0);
    }

    #[test]
    fn line_query_with_self_exclusion() {
        let idx = NeighborIndex::build(vec![0.0, 1.0, 2.0, 10.0], 1).unwrap();
        let nn = idx.knn_of(0, 2).unwrap();
        assert_eq!(nn.iter().map(|n| n.index).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn duplicates_are_both_found() {
        let idx = NeighborIndex::build(vec![3.0, 3.0, 7.0], 1).unwrap();
        let nn = idx.knn(&[3.0], 1, None).unwrap();
        assert_eq!(nn[0].distance, 0.0);
        // Self-exclusion is by identity: the duplicate stays a neighbour.
        let nn = idx.knn_of(0, 1).unwrap();
        assert_eq!((nn[0].index, nn[0].distance), (1, 0.0));
    }

    #[test]
    fn ties_prefer_lower_index() {
        let idx = NeighborIndex::build(vec![1.0, -1.0, 0.0], 1).unwrap();
        let nn = idx.knn(&[0.0], 2, Some(2)).unwrap();
        assert_eq!(nn[0].index, 0);
        assert_eq!(nn[1].index, 1);
        let idx = NeighborIndex::build(vec![-1.0, 1.0], 1).unwrap();
        assert_eq!(idx.knn(&[0.0], 1, None).unwrap()[0].index, 0);
    }

    #[test]
    fn too_large_k_names_counts() {
        let idx = NeighborIndex::build(vec![0.0, 1.0, 2.0], 1).unwrap();
        match idx.knn_of(0, 3) {
            Err(Error::TooFewCandidates { k, available }) => assert_eq!((k, available), (3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tree_matches_brute_on_gridded_ties() {
        // Integer grid forces many equal distances.
        let mut pts = Vec::new();
        for x in 0..15 {
            for y in 0..15 {
                pts.extend([x as f64, y as f64]);
            }
        }
        let tree = NeighborIndex::build_with(pts.clone(), 2, SearchStrategy::KdTree).unwrap();
        assert!(tree.has_tree());
        for i in 0..tree.len() {
            for k in [1, 4, 9] {
                let got: Vec<usize> = tree.knn_of(i, k).unwrap().iter().map(|n| n.index).collect();
                assert_eq!(got, brute(&pts, 2, tree.point(i), k, Some(i)));
            }
        }
    }

    proptest! {
        #[test]
        fn tree_equals_brute_force(seed: u64, n in 1usize..500, dim in 1usize..8, k in 1usize..12, coarse: bool) {
            let mut rng = crate::rng::seeded(seed);
            let pts: Vec<f64> = (0..n * dim)
                .map(|_| if coarse { rng.random_range(0..4) as f64 } else { rng.random::<f64>() })
                .collect();
            let tree = NeighborIndex::build_with(pts.clone(), dim, SearchStrategy::KdTree).unwrap();
            let flat = NeighborIndex::build_with(pts.clone(), dim, SearchStrategy::BruteForce).unwrap();
            for qi in (0..n).step_by(7) {
                let q = tree.point(qi).to_vec();
                let k = k.min(n - 1);
                if k == 0 { continue; }
                let a = tree.knn(&q, k, Some(qi)).unwrap();
                let b = flat.knn(&q, k, Some(qi)).unwrap();
                prop_assert_eq!(&a, &b);
                prop_assert_eq!(a.iter().map(|x| x.index).collect::<Vec<_>>(), brute(&pts, dim, &q, k, Some(qi)));
                for w in a.windows(2) {
                    prop_assert!(w[0].distance <= w[1].distance);
                }
                for nb in &a {
                    prop_assert!((nb.distance - distance(&q, tree.point(nb.index))).abs() <= 1e-12);
                }
            }
        }
    }
}
