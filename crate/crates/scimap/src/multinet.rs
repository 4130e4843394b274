//! Set-theoretic union of the constituent layers.
//!
//! Layers are unified along common (kind, label) nodes, edge weights are
//! normalized to (0, 1] within each layer individually (so that, e.g., heavy
//! keyword-keyword counts cannot suppress the weaker author-keyword
//! couplings), then filtered and symmetrized into the single weighted graph
//! community detection consumes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::WeightedGraph;
use crate::layers::{Layer, LayerTag, Node};

#[derive(Debug, Error)]
pub enum MultiNetError {
    #[error("{layer} edge {source} -> {target} violates the layer's node-kind constraint")]
    KindViolation {
        layer: &'static str,
        source: String,
        target: String,
    },
    #[error("edge {source} -> {target} has non-positive weight {weight}")]
    InvalidWeight {
        source: String,
        target: String,
        weight: f64,
    },
    #[error("edge endpoint {0} is not in the node set")]
    UnknownEndpoint(String),
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("node labels must be non-empty")]
    EmptyLabel,
}

/// One edge of the multinetwork, tagged with its layer of origin.
///
/// `raw_weight` is the layer count; `weight` is the per-layer normalized
/// value (equal to `raw_weight` until [`normalize`] runs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiEdge {
    pub source: Node,
    pub target: Node,
    pub layer: LayerTag,
    pub raw_weight: f64,
    pub weight: f64,
    pub directed: bool,
}

/// The unified multinetwork: merged node set plus the per-layer edge lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiNet {
    nodes: BTreeSet<Node>,
    edges: Vec<MultiEdge>,
}

impl MultiNet {
    /// Builds a net from explicit parts, validating layer constraints.
    /// Edge order is preserved.
    pub fn from_parts(
        nodes: BTreeSet<Node>,
        edges: Vec<MultiEdge>,
    ) -> Result<MultiNet, MultiNetError> {
        if nodes.iter().any(|n| n.label.is_empty()) {
            return Err(MultiNetError::EmptyLabel);
        }
        for e in &edges {
            check_edge_kinds(e.layer, &e.source, &e.target)?;
            if e.source == e.target {
                return Err(MultiNetError::SelfLoop(e.source.to_string()));
            }
            if !(e.raw_weight > 0.0) || !(e.weight > 0.0) {
                return Err(MultiNetError::InvalidWeight {
                    source: e.source.to_string(),
                    target: e.target.to_string(),
                    weight: e.raw_weight.min(e.weight),
                });
            }
            for endpoint in [&e.source, &e.target] {
                if !nodes.contains(endpoint) {
                    return Err(MultiNetError::UnknownEndpoint(endpoint.to_string()));
                }
            }
        }
        Ok(MultiNet { nodes, edges })
    }

    pub fn nodes(&self) -> &BTreeSet<Node> {
        &self.nodes
    }

    pub fn edges(&self) -> &[MultiEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Edges belonging to one layer, in stored order.
    pub fn layer_edges(&self, tag: LayerTag) -> impl Iterator<Item = &MultiEdge> {
        self.edges.iter().filter(move |e| e.layer == tag)
    }
}

fn check_edge_kinds(tag: LayerTag, source: &Node, target: &Node) -> Result<(), MultiNetError> {
    if tag.admits(source.kind, target.kind) {
        Ok(())
    } else {
        Err(MultiNetError::KindViolation {
            layer: tag.as_str(),
            source: source.to_string(),
            target: target.to_string(),
        })
    }
}

/// Unifies the three layers along common nodes. Edge weights are untouched;
/// `weight` starts equal to `raw_weight`.
pub fn unify(
    author_citation: &Layer,
    keyword_citation: &Layer,
    author_keyword: &Layer,
) -> Result<MultiNet, MultiNetError> {
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for layer in [author_citation, keyword_citation, author_keyword] {
        for (source, target, raw) in layer.edges() {
            check_edge_kinds(layer.tag, source, target)?;
            nodes.insert(source.clone());
            nodes.insert(target.clone());
            edges.push(MultiEdge {
                source: source.clone(),
                target: target.clone(),
                layer: layer.tag,
                raw_weight: raw,
                weight: raw,
                directed: layer.directed,
            });
        }
    }
    Ok(MultiNet { nodes, edges })
}

/// Rescales each layer's weights by that layer's maximum raw weight, so every
/// non-empty layer tops out at exactly 1. Weight order within a layer is
/// preserved; applying it twice changes nothing.
pub fn normalize(mut net: MultiNet) -> MultiNet {
    let mut max_raw: BTreeMap<LayerTag, f64> = BTreeMap::new();
    for e in &net.edges {
        let m = max_raw.entry(e.layer).or_insert(0.0);
        if e.raw_weight > *m {
            *m = e.raw_weight;
        }
    }
    for e in &mut net.edges {
        e.weight = e.raw_weight / max_raw[&e.layer];
    }
    net
}

/// What [`filter`] removes: light edges first, then low-degree nodes, then
/// everything outside the largest connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    /// Per-layer minimum normalized edge weight; edges at the threshold
    /// survive.
    pub min_weight_author_citation: f64,
    pub min_weight_keyword_citation: f64,
    pub min_weight_author_keyword: f64,
    /// Minimum number of incident surviving edges per node.
    pub min_node_degree: usize,
    pub keep_largest_component: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            min_weight_author_citation: 0.0,
            min_weight_keyword_citation: 0.0,
            min_weight_author_keyword: 0.0,
            min_node_degree: 1,
            keep_largest_component: true,
        }
    }
}

impl FilterSpec {
    pub fn min_weight_for(&self, tag: LayerTag) -> f64 {
        match tag {
            LayerTag::AuthorCitation => self.min_weight_author_citation,
            LayerTag::KeywordCitation => self.min_weight_keyword_citation,
            LayerTag::AuthorKeyword => self.min_weight_author_keyword,
        }
    }
}

/// Applies the filter pipeline in fixed order: edge thresholds, then node
/// degree, then (optionally) the largest component of the symmetrized graph.
/// Weights are never rescaled here.
pub fn filter(net: MultiNet, spec: &FilterSpec) -> MultiNet {
    let MultiNet { nodes, edges } = net;
    let edges: Vec<MultiEdge> = edges
        .into_iter()
        .filter(|e| e.weight >= spec.min_weight_for(e.layer))
        .collect();

    let mut degree: BTreeMap<&Node, usize> = nodes.iter().map(|n| (n, 0)).collect();
    for e in &edges {
        *degree.get_mut(&e.source).expect("endpoint in node set") += 1;
        *degree.get_mut(&e.target).expect("endpoint in node set") += 1;
    }
    let kept: BTreeSet<Node> = nodes
        .iter()
        .filter(|n| degree[*n] >= spec.min_node_degree)
        .cloned()
        .collect();
    let edges: Vec<MultiEdge> = edges
        .into_iter()
        .filter(|e| kept.contains(&e.source) && kept.contains(&e.target))
        .collect();
    let net = MultiNet { nodes: kept, edges };

    if spec.keep_largest_component {
        largest_component(net)
    } else {
        net
    }
}

fn largest_component(net: MultiNet) -> MultiNet {
    if net.nodes.is_empty() {
        return net;
    }
    let mut adjacency: BTreeMap<&Node, Vec<&Node>> =
        net.nodes.iter().map(|n| (n, Vec::new())).collect();
    for e in &net.edges {
        adjacency.get_mut(&e.source).unwrap().push(&e.target);
        adjacency.get_mut(&e.target).unwrap().push(&e.source);
    }
    // Scan in node order so the first maximal component (the one holding the
    // smallest node) wins ties.
    let mut best: BTreeSet<Node> = BTreeSet::new();
    let mut visited: BTreeSet<&Node> = BTreeSet::new();
    for start in net.nodes.iter() {
        if visited.contains(start) {
            continue;
        }
        let mut component = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        visited.insert(start);
        while let Some(n) = queue.pop_front() {
            component.insert(n.clone());
            for next in &adjacency[n] {
                if visited.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        if component.len() > best.len() {
            best = component;
        }
    }
    let edges = net
        .edges
        .into_iter()
        .filter(|e| best.contains(&e.source) && best.contains(&e.target))
        .collect();
    MultiNet { nodes: best, edges }
}

/// The symmetrized view of a multinet: one undirected weighted simple graph
/// plus the node identity for each graph index.
#[derive(Debug, Clone)]
pub struct Symmetrized {
    pub graph: WeightedGraph,
    pub nodes: Vec<Node>,
}

impl Symmetrized {
    pub fn index_of(&self, node: &Node) -> Option<usize> {
        self.nodes.binary_search(node).ok()
    }
}

/// Collapses the multinet into an undirected simple graph: the weight between
/// u and v is the sum of normalized weights of every edge u->v, v->u, or u-v
/// across all layers.
pub fn symmetrize(net: &MultiNet) -> Symmetrized {
    let nodes: Vec<Node> = net.nodes.iter().cloned().collect();
    let index: BTreeMap<&Node, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in &net.edges {
        let u = index[&e.source];
        let v = index[&e.target];
        let key = (u.min(v), u.max(v));
        *weights.entry(key).or_insert(0.0) += e.weight;
    }
    let edges: Vec<(usize, usize, f64)> =
        weights.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    let graph = WeightedGraph::from_edges(nodes.len(), &edges)
        .expect("multinet edges are loop-free with positive weights");
    Symmetrized { graph, nodes }
}
