//! Random-walk agglomeration (Walktrap) over a connected weighted graph.
//!
//! Every node starts as its own community with the distribution of a t-step
//! random walk rooted at it, where a step moves along an incident edge with
//! probability proportional to its weight (P_ij = A_ij / k_i). Two
//! communities are close when their walk distributions, coordinate-scaled by
//! 1/sqrt(k), are close in L2. The pair of adjacent communities whose merge
//! costs least is merged repeatedly until one community remains; cutting the
//! resulting merge sequence at maximum modularity yields the detected
//! partition.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use super::{dense_renumber, modularity, CommunityError, Partition, WeightedGraph};

/// One agglomeration step: `left` and `right` fuse into community `into`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// The variance increase paid by this merge; non-negative.
    pub cost: f64,
    pub into: usize,
}

/// The full merge sequence. Leaves are communities 0..num_leaves; merge k
/// creates community num_leaves + k. A connected n-node graph yields exactly
/// n - 1 merges.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    num_leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn num_leaves(&self) -> usize {
        self.num_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Number of cut levels, from all-singletons (level 0) to the level
    /// after the final merge.
    pub fn num_levels(&self) -> usize {
        self.merges.len() + 1
    }

    /// The partition after applying the first `level` merges, with community
    /// labels renumbered densely in order of first appearance.
    pub fn assignment_at(&self, level: usize) -> Vec<usize> {
        assert!(level < self.num_levels(), "cut level out of range");
        let mut parent: Vec<usize> = (0..self.num_leaves + self.merges.len()).collect();
        for m in &self.merges[..level] {
            parent[m.left] = m.into;
            parent[m.right] = m.into;
        }
        let mut labels = Vec::with_capacity(self.num_leaves);
        for leaf in 0..self.num_leaves {
            let mut root = leaf;
            while parent[root] != root {
                root = parent[root];
            }
            // Path compression keeps repeated lookups cheap.
            let mut walk = leaf;
            while parent[walk] != root {
                let up = parent[walk];
                parent[walk] = root;
                walk = up;
            }
            labels.push(root);
        }
        dense_renumber(&labels).0
    }
}

/// A live community during agglomeration.
struct Community {
    size: usize,
    /// Mean t-step walk distribution over member nodes.
    prob: Vec<f64>,
    /// Adjacent live communities.
    neighbors: BTreeSet<usize>,
}

/// Candidate merge ordered by (cost, smaller id, larger id); the heap pops
/// the lowest, which fixes tie-breaking deterministically.
struct Candidate {
    cost: f64,
    a: usize,
    b: usize,
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
        // Reversed so the std max-heap pops the smallest candidate.
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.a.cmp(&self.a))
            .then(other.b.cmp(&self.b))
    }
}

/// Distribution of a t-step walk from `start`.
fn walk_distribution(graph: &WeightedGraph, start: usize, t: usize) -> Vec<f64> {
    let n = graph.node_count();
    let mut cur = vec![0.0; n];
    cur[start] = 1.0;
    let mut next = vec![0.0; n];
    for _ in 0..t {
        next.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..n {
            let mass = cur[k];
            if mass != 0.0 {
                let degree = graph.degree(k);
                for &(j, w) in graph.neighbors(k) {
                    next[j] += mass * (w / degree);
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Squared walk distance between two community distributions: the L2 gap
/// with each coordinate scaled by 1/k_j.
fn distance_sq(graph: &WeightedGraph, p1: &[f64], p2: &[f64]) -> f64 {
    p1.iter()
        .zip(p2)
        .enumerate()
        .map(|(j, (a, b))| {
            let d = a - b;
            d * d / graph.degree(j)
        })
        .sum()
}

/// Ward-style merge cost: the increase in mean squared node-to-centroid walk
/// distance caused by fusing the two communities.
fn merge_cost(graph: &WeightedGraph, a: &Community, b: &Community) -> f64 {
    let n = graph.node_count() as f64;
    let sa = a.size as f64;
    let sb = b.size as f64;
    (sa * sb) / ((sa + sb) * n) * distance_sq(graph, &a.prob, &b.prob)
}

/// Runs the agglomeration on a connected graph with positive total weight.
///
/// Walk probabilities follow edge weights; merges always fuse adjacent
/// communities, choosing the minimum-cost pair with ties broken by the
/// (smaller, larger) community-id order. Deterministic: identical inputs
/// give identical merge sequences on every platform.
pub fn walktrap_dendrogram(
    graph: &WeightedGraph,
    t: usize,
) -> Result<Dendrogram, CommunityError> {
    if t == 0 {
        return Err(CommunityError::InvalidWalkLength);
    }
    let n = graph.node_count();
    if n == 0 {
        return Err(CommunityError::EmptyNet);
    }
    if graph.degree_total() <= 0.0 {
        return Err(CommunityError::ZeroTotalWeight);
    }
    if !graph.is_connected() {
        return Err(CommunityError::Disconnected);
    }

    let mut communities: Vec<Option<Community>> = (0..n)
        .map(|i| {
            Some(Community {
                size: 1,
                prob: walk_distribution(graph, i, t),
                neighbors: graph.neighbors(i).iter().map(|&(j, _)| j).collect(),
            })
        })
        .collect();

    let mut heap = BinaryHeap::new();
    for i in 0..n {
        for &(j, _) in graph.neighbors(i) {
            if i < j {
                let cost = merge_cost(
                    graph,
                    communities[i].as_ref().unwrap(),
                    communities[j].as_ref().unwrap(),
                );
                heap.push(Candidate { cost, a: i, b: j });
            }
        }
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        // Skip stale entries naming dead communities; a candidate with both
        // sides alive carries a current cost because live communities never
        // change.
        let Candidate { cost, a, b } = loop {
            match heap.pop() {
                Some(c) if communities[c.a].is_some() && communities[c.b].is_some() => break c,
                Some(_) => continue,
                None => unreachable!("connected graph exhausts candidates only at one community"),
            }
        };
        let into = n + step;
        let left = communities[a].take().unwrap();
        let right = communities[b].take().unwrap();
        let size = left.size + right.size;
        let prob: Vec<f64> = left
            .prob
            .iter()
            .zip(&right.prob)
            .map(|(x, y)| (left.size as f64 * x + right.size as f64 * y) / size as f64)
            .collect();
        let mut neighbors: BTreeSet<usize> =
            left.neighbors.union(&right.neighbors).copied().collect();
        neighbors.remove(&a);
        neighbors.remove(&b);
        let merged = Community {
            size,
            prob,
            neighbors,
        };
        for &x in &merged.neighbors {
            let other = communities[x].as_mut().expect("neighbor sets track live ids");
            other.neighbors.remove(&a);
            other.neighbors.remove(&b);
            other.neighbors.insert(into);
        }
        for &x in &merged.neighbors {
            let cost = merge_cost(graph, communities[x].as_ref().unwrap(), &merged);
            heap.push(Candidate { cost, a: x, b: into });
        }
        communities.push(Some(merged));
        merges.push(Merge {
            left: a,
            right: b,
            cost,
            into,
        });
    }

    Ok(Dendrogram {
        num_leaves: n,
        merges,
    })
}

/// Evaluates modularity at every cut of the merge sequence and returns the
/// maximizing partition; equal Q prefers the coarser (later) cut.
///
/// Panics if the dendrogram does not belong to `graph`.
pub fn best_partition(graph: &WeightedGraph, dendrogram: &Dendrogram) -> Partition {
    assert_eq!(
        dendrogram.num_leaves(),
        graph.node_count(),
        "dendrogram was built from a different graph"
    );
    let n = graph.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut best_q = modularity(graph, &labels).expect("agglomerated graphs have positive weight");
    let mut best_labels = labels.clone();
    for m in dendrogram.merges() {
        for l in labels.iter_mut() {
            if *l == m.left || *l == m.right {
                *l = m.into;
            }
        }
        let q = modularity(graph, &labels).expect("agglomerated graphs have positive weight");
        if q >= best_q {
            best_q = q;
            best_labels = labels.clone();
        }
    }
    let (assignment, num_communities) = dense_renumber(&best_labels);
    Partition::from_dense_parts(assignment, num_communities, best_q)
}
