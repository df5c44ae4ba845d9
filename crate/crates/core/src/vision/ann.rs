//! Randomized kd-tree forest for approximate nearest-neighbour search over
//! SIFT descriptors.
//!
//! Each tree splits on a dimension drawn at random from the few dimensions
//! with the highest variance (estimated on a sample of the node's points),
//! at the sample mean. Queries descend every tree, then keep expanding the
//! globally closest unexplored branch until the leaf-check budget is spent.
//! Branch bounds are exact lower bounds on the squared distance, so with a
//! budget of at least the index size the result equals a linear scan.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::matching::Match;
use super::sift::{Descriptor, DESCRIPTOR_LEN};
use crate::error::{Error, Result};
use crate::hash::{stable_hash, CounterRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnParams {
    pub trees: usize,
    /// Distinct indexed points examined per query.
    pub checks: usize,
    /// Split dimension is drawn from this many highest-variance dimensions.
    pub top_variance_dims: usize,
    /// Points used to estimate per-node mean and variance.
    pub variance_sample: usize,
}

impl Default for AnnParams {
    fn default() -> Self {
        Self {
            trees: 4,
            checks: 32,
            top_variance_dims: 5,
            variance_sample: 100,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(u32),
    Split {
        dim: u16,
        value: f32,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
    root: u32,
}

#[derive(Debug, Clone)]
pub struct AnnIndex {
    data: Vec<Descriptor>,
    trees: Vec<Tree>,
    params: AnnParams,
}

struct Builder<'a> {
    data: &'a [Descriptor],
    params: AnnParams,
    rng: CounterRng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn build(&mut self, ids: &mut [u32]) -> u32 {
        if ids.len() == 1 {
            self.nodes.push(Node::Leaf(ids[0]));
            return (self.nodes.len() - 1) as u32;
        }
        let sample = &ids[..ids.len().min(self.params.variance_sample)];
        let mut mean = [0.0f64; DESCRIPTOR_LEN];
        for &i in sample {
            for (m, v) in mean.iter_mut().zip(self.data[i as usize].0.iter()) {
                *m += f64::from(*v);
            }
        }
        let cnt = sample.len() as f64;
        mean.iter_mut().for_each(|m| *m /= cnt);
        let mut var = [0.0f64; DESCRIPTOR_LEN];
        for &i in sample {
            for ((s, v), m) in var.iter_mut().zip(self.data[i as usize].0.iter()).zip(mean.iter()) {
                let d = f64::from(*v) - m;
                *s += d * d;
            }
        }
        let mut dims: Vec<usize> = (0..DESCRIPTOR_LEN).collect();
        dims.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
        let top = self.params.top_variance_dims.clamp(1, DESCRIPTOR_LEN);
        let dim = dims[self.rng.below(top)];
        let value = mean[dim] as f32;

        // partition: left < value <= right
        let mut split = 0;
        for k in 0..ids.len() {
            if self.data[ids[k] as usize].0[dim] < value {
                ids.swap(k, split);
                split += 1;
            }
        }
        if split == 0 || split == ids.len() {
            split = ids.len() / 2;
        }
        let (l, r) = ids.split_at_mut(split);
        let left = self.build(l);
        let right = self.build(r);
        self.nodes.push(Node::Split {
            dim: dim as u16,
            value,
            left,
            right,
        });
        (self.nodes.len() - 1) as u32
    }
}

#[derive(Clone, Copy)]
struct Branch {
    bound: f32,
    tree: u32,
    node: u32,
    /// Index into the per-query offset chain; `u32::MAX` is the empty chain.
    chain: u32,
}

impl PartialEq for Branch {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Branch {}
impl PartialOrd for Branch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Branch {
    // min-heap on bound, deterministic tie-break
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.tree.cmp(&self.tree))
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.chain.cmp(&self.chain))
    }
}

/// Up to two best `(distance², index)` pairs ordered lexicographically.
#[derive(Default)]
struct Best2 {
    items: [(f32, u32); 2],
    len: usize,
}

impl Best2 {
    fn worst(&self) -> f32 {
        if self.len < 2 {
            f32::INFINITY
        } else {
            self.items[1].0
        }
    }

    fn offer(&mut self, d: f32, idx: u32) {
        let cand = (d, idx);
        let less = |a: (f32, u32), b: (f32, u32)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        match self.len {
            0 => {
                self.items[0] = cand;
                self.len = 1;
            }
            1 => {
                if less(cand, self.items[0]) {
                    self.items[1] = self.items[0];
                    self.items[0] = cand;
                } else {
                    self.items[1] = cand;
                }
                self.len = 2;
            }
            _ => {
                if less(cand, self.items[0]) {
                    self.items[1] = self.items[0];
                    self.items[0] = cand;
                } else if less(cand, self.items[1]) {
                    self.items[1] = cand;
                }
            }
        }
    }
}

impl AnnIndex {
    pub fn build(descriptors: &[Descriptor], params: AnnParams) -> Result<Self> {
        if descriptors.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if params.trees == 0 || params.checks == 0 {
            return Err(Error::InvalidArgument("ann trees and checks must be positive"));
        }
        let mut seed_bytes = Vec::with_capacity(8 * 4);
        seed_bytes.extend_from_slice(&(descriptors.len() as u64).to_le_bytes());
        for d in descriptors.iter().take(8) {
            for v in d.0.iter().take(4) {
                seed_bytes.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
        let seed = stable_hash(&[b"ann-forest", &seed_bytes]);
        let mut trees = Vec::with_capacity(params.trees);
        for t in 0..params.trees {
            let mut ids: Vec<u32> = (0..descriptors.len() as u32).collect();
            let mut b = Builder {
                data: descriptors,
                params,
                rng: CounterRng::new(seed ^ (t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                nodes: Vec::with_capacity(2 * descriptors.len()),
            };
            let root = b.build(&mut ids);
            trees.push(Tree { nodes: b.nodes, root });
        }
        Ok(Self {
            data: descriptors.to_vec(),
            trees,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn params(&self) -> AnnParams {
        self.params
    }

    /// Up to two nearest indexed descriptors using the index's check budget.
    pub fn knn2(&self, query: &Descriptor) -> Vec<Match> {
        self.knn2_with_checks(query, self.params.checks)
    }

    pub fn knn2_with_checks(&self, query: &Descriptor, checks: usize) -> Vec<Match> {
        let mut visited = vec![false; self.data.len()];
        let mut best = Best2::default();
        let mut heap = BinaryHeap::new();
        // (dim, offset, parent) chain entries
        let mut chain: Vec<(u16, f32, u32)> = Vec::new();
        let mut checked = 0usize;

        for (t, tree) in self.trees.iter().enumerate() {
            self.descend(query, t as u32, tree.root, 0.0, u32::MAX, &mut heap, &mut chain, &mut best, &mut visited, &mut checked);
        }
        while let Some(b) = heap.pop() {
            if checked >= checks && best.len == 2 {
                break;
            }
            if b.bound > best.worst() {
                continue;
            }
            self.descend(query, b.tree, b.node, b.bound, b.chain, &mut heap, &mut chain, &mut best, &mut visited, &mut checked);
        }
        best.items[..best.len]
            .iter()
            .map(|&(d2, idx)| Match {
                query_idx: 0,
                train_idx: idx as usize,
                distance: libm::sqrtf(d2),
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        query: &Descriptor,
        tree: u32,
        mut node: u32,
        bound: f32,
        link: u32,
        heap: &mut BinaryHeap<Branch>,
        chain: &mut Vec<(u16, f32, u32)>,
        best: &mut Best2,
        visited: &mut [bool],
        checked: &mut usize,
    ) {
        let nodes = &self.trees[tree as usize].nodes;
        loop {
            match nodes[node as usize] {
                Node::Leaf(idx) => {
                    if !visited[idx as usize] {
                        visited[idx as usize] = true;
                        *checked += 1;
                        best.offer(query.distance_sq(&self.data[idx as usize]), idx);
                    }
                    return;
                }
                Node::Split { dim, value, left, right } => {
                    let q = query.0[dim as usize];
                    let diff = q - value;
                    let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                    // Replace the query's previous offset along `dim` with the
                    // offset to this cutting plane.
                    let mut prev = 0.0f32;
                    let mut cur = link;
                    while cur != u32::MAX {
                        let (d, off, parent) = chain[cur as usize];
                        if d == dim {
                            prev = off;
                            break;
                        }
                        cur = parent;
                    }
                    let far_bound = (bound - prev * prev + diff * diff).max(bound);
                    if far_bound <= best.worst() {
                        chain.push((dim, diff.abs(), link));
                        heap.push(Branch {
                            bound: far_bound,
                            tree,
                            node: far,
                            chain: (chain.len() - 1) as u32,
                        });
                    }
                    node = near;
                }
            }
        }
    }
}

/// Exhaustive 2-NN scan with the same tie-breaking as the forest.
pub fn brute_force_knn2(data: &[Descriptor], query: &Descriptor) -> Vec<Match> {
    let mut best = Best2::default();
    for (i, d) in data.iter().enumerate() {
        best.offer(query.distance_sq(d), i as u32);
    }
    best.items[..best.len]
        .iter()
        .map(|&(d2, idx)| Match {
            query_idx: 0,
            train_idx: idx as usize,
            distance: libm::sqrtf(d2),
        })
        .collect()
}
