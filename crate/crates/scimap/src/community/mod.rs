//! Community detection: Walktrap agglomeration cut at maximum modularity.
//!
//! The detection pipeline symmetrizes the multinet, splits it into connected
//! components, runs random-walk agglomeration per component, and cuts each
//! merge tree at the partition maximizing Newman modularity
//!
//! ```text
//! Q = (1/2m) * sum_ij [A_ij - k_i k_j / 2m] * delta(c_i, c_j)
//! ```
//!
//! with weighted adjacency A, weighted degrees k, and total weight m.

mod walktrap;

pub use walktrap::{best_partition, walktrap_dendrogram, Dendrogram, Merge};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::layers::Node;
use crate::multinet::{self, MultiNet};

/// Default random-walk length.
pub const DEFAULT_WALK_LENGTH: usize = 4;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("modularity is undefined on a graph with zero total weight")]
    ZeroTotalWeight,
    #[error("partition covers {got} nodes but the graph has {expected}")]
    PartitionSizeMismatch { expected: usize, got: usize },
    #[error("graph is disconnected; invoke walktrap per connected component")]
    Disconnected,
    #[error("walk length must be at least 1")]
    InvalidWalkLength,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("edge endpoint {node} out of range for {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },
    #[error("empty network")]
    EmptyNet,
}

/// Undirected weighted simple graph over dense node indices.
///
/// Loop-free by construction; parallel edge entries are summed. Weighted
/// degree k_i is the sum of incident weights and the total weight m is half
/// the degree sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
    degree_sum: f64,
}

impl WeightedGraph {
    /// Builds a graph on `n` nodes from undirected weighted edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, CommunityError> {
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(CommunityError::NodeOutOfRange {
                    node: u.max(v),
                    nodes: n,
                });
            }
            if u == v {
                return Err(CommunityError::SelfLoop(u));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(CommunityError::InvalidWeight(w));
            }
            *maps[u].entry(v).or_insert(0.0) += w;
            *maps[v].entry(u).or_insert(0.0) += w;
        }
        let adj: Vec<Vec<(usize, f64)>> = maps
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let degrees: Vec<f64> = adj
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(_, w)| w).sum())
            .collect();
        let degree_sum = degrees.iter().sum();
        Ok(WeightedGraph {
            adj,
            degrees,
            degree_sum,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Weighted degree k_i.
    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    /// Neighbors of `i` with edge weights, ascending by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    /// Total weight m = half the degree sum.
    pub fn total_weight(&self) -> f64 {
        self.degree_sum / 2.0
    }

    pub(crate) fn degree_total(&self) -> f64 {
        self.degree_sum
    }

    /// Connected components as sorted index lists, ordered by smallest
    /// member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut members = Vec::new();
            seen[start] = true;
            while let Some(u) = stack.pop() {
                members.push(u);
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() <= 1 || self.components().len() == 1
    }

    /// Graph induced on `members` (sorted indices); local index i maps to
    /// `members[i]`.
    pub fn subgraph(&self, members: &[usize]) -> WeightedGraph {
        let local: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let mut edges = Vec::new();
        for (i, &g) in members.iter().enumerate() {
            for &(v, w) in &self.adj[g] {
                if let Some(&j) = local.get(&v) {
                    if i < j {
                        edges.push((i, j, w));
                    }
                }
            }
        }
        WeightedGraph::from_edges(members.len(), &edges)
            .expect("subgraph of a valid graph is valid")
    }
}

/// A node-to-community assignment with its modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_communities: usize,
    q: f64,
}

impl Partition {
    /// Builds a partition from arbitrary labels, renumbering them densely in
    /// order of first appearance and computing Q on `graph`.
    pub fn from_labels(graph: &WeightedGraph, labels: &[usize]) -> Result<Self, CommunityError> {
        let q = modularity(graph, labels)?;
        let (assignment, num_communities) = dense_renumber(labels);
        Ok(Partition {
            assignment,
            num_communities,
            q,
        })
    }

    pub(crate) fn from_dense_parts(assignment: Vec<usize>, num_communities: usize, q: f64) -> Self {
        Partition {
            assignment,
            num_communities,
            q,
        }
    }

    /// Community index per node, dense in 0..num_communities.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

pub(crate) fn dense_renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let mut next = 0usize;
    let assignment = labels
        .iter()
        .map(|&l| {
            *map.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect();
    (assignment, next)
}

/// Newman modularity of a labeling.
///
/// Computed per community as W_c/2m - (K_c/2m)^2 where W_c sums the intra-
/// community adjacency (ordered pairs) and K_c the member degrees. Summation
/// follows node order so that the one-community partition yields exactly 0.
pub fn modularity(graph: &WeightedGraph, assignment: &[usize]) -> Result<f64, CommunityError> {
    if assignment.len() != graph.node_count() {
        return Err(CommunityError::PartitionSizeMismatch {
            expected: graph.node_count(),
            got: assignment.len(),
        });
    }
    let two_m = graph.degree_total();
    if two_m <= 0.0 {
        return Err(CommunityError::ZeroTotalWeight);
    }
    let mut intra: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for i in 0..graph.node_count() {
        let c = assignment[i];
        let row: f64 = graph
            .neighbors(i)
            .iter()
            .filter(|&&(j, _)| assignment[j] == c)
            .map(|&(_, w)| w)
            .sum();
        *intra.entry(c).or_insert(0.0) += row;
        *degree.entry(c).or_insert(0.0) += graph.degree(i);
    }
    let q = intra
        .iter()
        .map(|(c, w)| {
            let k = degree[c];
            w / two_m - (k / two_m) * (k / two_m)
        })
        .sum();
    Ok(q)
}

/// A partition over node identities, as produced on a whole multinet.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulePartition {
    assignment: BTreeMap<Node, usize>,
    num_communities: usize,
    q: f64,
}

impl ModulePartition {
    pub fn new(assignment: BTreeMap<Node, usize>, q: f64) -> Self {
        let num_communities = assignment
            .values()
            .copied()
            .max()
            .map_or(0, |m| m + 1);
        ModulePartition {
            assignment,
            num_communities,
            q,
        }
    }

    pub fn assignment(&self) -> &BTreeMap<Node, usize> {
        &self.assignment
    }

    pub fn community_of(&self, node: &Node) -> Option<usize> {
        self.assignment.get(node).copied()
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Members of one community, in node order.
    pub fn members(&self, community: usize) -> Vec<&Node> {
        self.assignment
            .iter()
            .filter(|(_, &c)| c == community)
            .map(|(n, _)| n)
            .collect()
    }
}

/// Runs the full detection step on a normalized (and optionally filtered)
/// multinet: symmetrize, split into components, agglomerate each, cut every
/// merge tree at maximum Q, and recompute the global Q over the union.
///
/// Isolated nodes become singleton communities; they contribute nothing to Q
/// through their zero degree.
pub fn detect_modules(net: &MultiNet, walk_length: usize) -> Result<ModulePartition, CommunityError> {
    if net.is_empty() {
        return Err(CommunityError::EmptyNet);
    }
    let sym = multinet::symmetrize(net);
    let graph = &sym.graph;
    if graph.degree_total() <= 0.0 {
        return Err(CommunityError::ZeroTotalWeight);
    }
    let mut labels = vec![0usize; graph.node_count()];
    let mut next = 0usize;
    for component in graph.components() {
        if component.len() == 1 {
            labels[component[0]] = next;
            next += 1;
            continue;
        }
        let sub = graph.subgraph(&component);
        let dendrogram = walktrap_dendrogram(&sub, walk_length)?;
        let partition = best_partition(&sub, &dendrogram);
        for (local, &global) in component.iter().enumerate() {
            labels[global] = next + partition.community_of(local);
        }
        next += partition.num_communities();
    }
    let q = modularity(graph, &labels)?;
    let assignment = sym
        .nodes
        .iter()
        .cloned()
        .zip(labels.iter().copied())
        .collect();
    Ok(ModulePartition {
        assignment,
        num_communities: next,
        q,
    })
}
