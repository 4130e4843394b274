//! Module characterization: PageRank rankings, reduced subgraphs, reports.
//!
//! Centrality is computed once on the full directed multinet by default (a
//! per-module variant exists behind a pipeline flag), members are ranked
//! within each detected module, and each module's subgraph can be reduced to
//! its best-connected nodes for readable display.

mod export;
mod files;
mod pipeline;

pub use export::{
    export_graph, from_graphml, import_graphml_file, to_dot, to_edge_list_csv, to_graphml,
    ExportError, GraphFormat,
};
pub use files::{partition_from_csv, partition_to_csv, rankings_to_csv, reports_to_json, FilesError};
pub use pipeline::{
    run_pipeline, write_pipeline_outputs, PipelineConfig, PipelineError, PipelineOutput,
    ReductionCriterion,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::community::ModulePartition;
use crate::layers::{Node, NodeKind};
use crate::multinet::{MultiEdge, MultiNet};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("empty network")]
    EmptyNet,
    #[error("damping must lie strictly between 0 and 1, got {0}")]
    InvalidDamping(f64),
    #[error("keep fraction must lie in (0, 1], got {0}")]
    InvalidKeepFraction(f64),
    #[error("unknown module id {0}")]
    UnknownModule(usize),
}

/// PageRank scores over every node of a multinet.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    scores: BTreeMap<Node, f64>,
    pub damping: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl CentralityScores {
    pub fn scores(&self) -> &BTreeMap<Node, f64> {
        &self.scores
    }

    pub fn score_of(&self, node: &Node) -> Option<f64> {
        self.scores.get(node).copied()
    }
}

/// Power-iteration PageRank on the directed multinet.
///
/// Undirected (bipartite) edges walk both ways, parallel cross-layer edges
/// pool their weights into one transition proportion, and the rank of
/// dangling nodes is redistributed uniformly. Iteration stops once the L1
/// change drops to `tolerance`; hitting `max_iter` first flags the result as
/// non-converged.
pub fn pagerank(
    net: &MultiNet,
    damping: f64,
    tolerance: f64,
    max_iter: usize,
) -> Result<CentralityScores, AnalyticsError> {
    if net.is_empty() {
        return Err(AnalyticsError::EmptyNet);
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(AnalyticsError::InvalidDamping(damping));
    }
    let nodes: Vec<&Node> = net.nodes().iter().collect();
    let index: BTreeMap<&Node, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = nodes.len();

    let mut out: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for e in net.edges() {
        let u = index[&e.source];
        let v = index[&e.target];
        *out[u].entry(v).or_insert(0.0) += e.weight;
        if !e.directed {
            *out[v].entry(u).or_insert(0.0) += e.weight;
        }
    }
    let out_weight: Vec<f64> = out.iter().map(|m| m.values().sum()).collect();
    // Incoming transition proportions per target, built in source order.
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (u, targets) in out.iter().enumerate() {
        for (&v, &w) in targets {
            incoming[v].push((u, w / out_weight[u]));
        }
    }

    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        let dangling: f64 = (0..n)
            .filter(|&u| out_weight[u] == 0.0)
            .map(|u| rank[u])
            .sum();
        let base = (1.0 - damping) * uniform + damping * dangling * uniform;
        for v in 0..n {
            let flow: f64 = incoming[v].iter().map(|&(u, p)| rank[u] * p).sum();
            next[v] = base + damping * flow;
        }
        residual = rank
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut rank, &mut next);
        iterations += 1;
        if residual <= tolerance {
            converged = true;
            break;
        }
    }

    let scores = nodes
        .into_iter()
        .cloned()
        .zip(rank.iter().copied())
        .collect();
    Ok(CentralityScores {
        scores,
        damping,
        iterations,
        residual,
        converged,
    })
}

/// One node with its centrality, as reported in rankings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedNode {
    pub node: Node,
    pub score: f64,
}

/// The ranked members of one module.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleRanking {
    pub module: usize,
    pub entries: Vec<RankedNode>,
}

/// Sorts each module's members by score descending (ties by kind then
/// label) and truncates to `top_n`. Modules appear in id order.
pub fn rank_within_modules(
    scores: &CentralityScores,
    partition: &ModulePartition,
    top_n: usize,
) -> Vec<ModuleRanking> {
    let mut grouped: BTreeMap<usize, Vec<RankedNode>> = BTreeMap::new();
    for (node, &module) in partition.assignment() {
        let score = scores
            .score_of(node)
            .expect("scores and partition cover the same node set");
        grouped.entry(module).or_default().push(RankedNode {
            node: node.clone(),
            score,
        });
    }
    grouped
        .into_iter()
        .map(|(module, mut entries)| {
            entries.sort_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then_with(|| a.node.cmp(&b.node))
            });
            entries.truncate(top_n);
            ModuleRanking { module, entries }
        })
        .collect()
}

/// Restricts the net to one module and keeps the ceil(q * size) nodes with
/// the highest within-module weighted degree; surviving-endpoint edges stay.
/// Degree ties favor the lexicographically greater node.
pub fn reduced_graph(
    net: &MultiNet,
    partition: &ModulePartition,
    module: usize,
    keep_fraction: f64,
) -> Result<MultiNet, AnalyticsError> {
    reduced_graph_by_degree(net, partition, module, keep_fraction)
}

fn module_nodes(
    net: &MultiNet,
    partition: &ModulePartition,
    module: usize,
) -> Result<BTreeSet<Node>, AnalyticsError> {
    if module >= partition.num_communities() {
        return Err(AnalyticsError::UnknownModule(module));
    }
    Ok(partition
        .assignment()
        .iter()
        .filter(|&(node, &c)| c == module && net.nodes().contains(node))
        .map(|(node, _)| node.clone())
        .collect())
}

fn restrict_edges(net: &MultiNet, members: &BTreeSet<Node>) -> Vec<MultiEdge> {
    net.edges()
        .iter()
        .filter(|e| members.contains(&e.source) && members.contains(&e.target))
        .cloned()
        .collect()
}

fn keep_top(
    members: &BTreeSet<Node>,
    rank_key: impl Fn(&Node) -> f64,
    keep_fraction: f64,
) -> Result<BTreeSet<Node>, AnalyticsError> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(AnalyticsError::InvalidKeepFraction(keep_fraction));
    }
    let keep = (keep_fraction * members.len() as f64).ceil() as usize;
    let mut ordered: Vec<&Node> = members.iter().collect();
    ordered.sort_by(|a, b| {
        rank_key(b)
            .total_cmp(&rank_key(a))
            .then_with(|| b.cmp(a))
    });
    Ok(ordered.into_iter().take(keep).cloned().collect())
}

fn reduced_graph_by_degree(
    net: &MultiNet,
    partition: &ModulePartition,
    module: usize,
    keep_fraction: f64,
) -> Result<MultiNet, AnalyticsError> {
    let members = module_nodes(net, partition, module)?;
    let edges = restrict_edges(net, &members);
    let mut degree: BTreeMap<&Node, f64> = members.iter().map(|n| (n, 0.0)).collect();
    for e in &edges {
        *degree.get_mut(&e.source).unwrap() += e.weight;
        *degree.get_mut(&e.target).unwrap() += e.weight;
    }
    let kept = keep_top(&members, |n| degree[n], keep_fraction)?;
    let edges = edges
        .into_iter()
        .filter(|e| kept.contains(&e.source) && kept.contains(&e.target))
        .collect();
    Ok(MultiNet::from_parts(kept, edges).expect("restriction of a valid net is valid"))
}

/// Variant of [`reduced_graph`] that ranks nodes by PageRank instead of
/// within-module degree.
pub fn reduced_graph_by_pagerank(
    net: &MultiNet,
    partition: &ModulePartition,
    module: usize,
    keep_fraction: f64,
    scores: &CentralityScores,
) -> Result<MultiNet, AnalyticsError> {
    let members = module_nodes(net, partition, module)?;
    let kept = keep_top(&members, |n| scores.score_of(n).unwrap_or(0.0), keep_fraction)?;
    let edges = net
        .edges()
        .iter()
        .filter(|e| kept.contains(&e.source) && kept.contains(&e.target))
        .cloned()
        .collect();
    Ok(MultiNet::from_parts(kept, edges).expect("restriction of a valid net is valid"))
}

/// Everything reported about one detected module: size, member counts by
/// kind, the top-ranked members, and the reduced subgraph's edge list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleReport {
    pub module: usize,
    pub size: usize,
    pub author_count: usize,
    pub keyword_count: usize,
    pub top_nodes: Vec<RankedNode>,
    pub reduced_edges: Vec<MultiEdge>,
}

/// Builds the full per-module reports, ordered by size descending (module id
/// breaking ties).
pub fn build_module_reports(
    net: &MultiNet,
    partition: &ModulePartition,
    scores: &CentralityScores,
    top_n: usize,
    keep_fraction: f64,
) -> Result<Vec<ModuleReport>, AnalyticsError> {
    let rankings = rank_within_modules(scores, partition, top_n);
    let mut reports = Vec::with_capacity(rankings.len());
    for ranking in rankings {
        let members = partition.members(ranking.module);
        let author_count = members
            .iter()
            .filter(|n| n.kind == NodeKind::Author)
            .count();
        let reduced = reduced_graph(net, partition, ranking.module, keep_fraction)?;
        reports.push(ModuleReport {
            module: ranking.module,
            size: members.len(),
            author_count,
            keyword_count: members.len() - author_count,
            top_nodes: ranking.entries,
            reduced_edges: reduced.edges().to_vec(),
        });
    }
    reports.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.module.cmp(&b.module)));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::detect_modules;
    use crate::layers::{Layer, LayerTag};
    use crate::multinet::{normalize, unify};

    fn empty(tag: LayerTag) -> Layer {
        Layer::new(tag)
    }

    fn author_net(edges: &[(&str, &str, f64)]) -> MultiNet {
        let ac = Layer::from_edges(
            LayerTag::AuthorCitation,
            edges
                .iter()
                .map(|(s, t, w)| (Node::author(*s), Node::author(*t), *w)),
        )
        .unwrap();
        normalize(unify(&ac, &empty(LayerTag::KeywordCitation), &empty(LayerTag::AuthorKeyword)).unwrap())
    }

    fn bipartite_net(edges: &[(&str, &str, f64)]) -> MultiNet {
        let ak = Layer::from_edges(
            LayerTag::AuthorKeyword,
            edges
                .iter()
                .map(|(s, t, w)| (Node::author(*s), Node::keyword(*t), *w)),
        )
        .unwrap();
        normalize(unify(&empty(LayerTag::AuthorCitation), &empty(LayerTag::KeywordCitation), &ak).unwrap())
    }

    #[test]
    fn isolated_single_node_scores_one() {
        let nodes = BTreeSet::from([Node::author("solo")]);
        let net = MultiNet::from_parts(nodes, Vec::new()).unwrap();
        let scores = pagerank(&net, 0.85, 1e-12, 10_000).unwrap();
        assert_eq!(scores.score_of(&Node::author("solo")), Some(1.0));
        assert!(scores.converged);
    }

    #[test]
    fn directed_cycle_is_uniform() {
        let net = author_net(&[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]);
        let scores = pagerank(&net, 0.85, 1e-14, 10_000).unwrap();
        for (_, &s) in scores.scores() {
            assert!((s - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(scores.converged);
    }

    #[test]
    fn single_edge_with_dangling_matches_fixed_point() {
        let net = author_net(&[("a", "b", 1.0)]);
        let scores = pagerank(&net, 0.85, 1e-13, 10_000).unwrap();
        // Fixed point of the two-node chain with uniform dangling
        // redistribution: p_a = 0.5 / 1.425.
        let pa = scores.score_of(&Node::author("a")).unwrap();
        let pb = scores.score_of(&Node::author("b")).unwrap();
        assert!((pa - 0.35087719298245615).abs() < 1e-10);
        assert!((pb - 0.6491228070175439).abs() < 1e-10);
    }

    #[test]
    fn bipartite_edges_walk_both_ways() {
        let net = bipartite_net(&[("a", "x", 1.0)]);
        let scores = pagerank(&net, 0.85, 1e-13, 10_000).unwrap();
        assert!((scores.score_of(&Node::author("a")).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn max_iter_flags_non_convergence() {
        let net = author_net(&[("a", "b", 1.0), ("b", "a", 1.0), ("b", "c", 2.0)]);
        let scores = pagerank(&net, 0.85, 1e-30, 3).unwrap();
        assert!(!scores.converged);
        assert_eq!(scores.iterations, 3);
    }

    #[test]
    fn invalid_damping_is_rejected() {
        let net = author_net(&[("a", "b", 1.0)]);
        assert!(matches!(
            pagerank(&net, 1.0, 1e-10, 10),
            Err(AnalyticsError::InvalidDamping(_))
        ));
    }

    fn three_node_module() -> (MultiNet, ModulePartition, CentralityScores) {
        let net = author_net(&[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]);
        let partition = detect_modules(&net, 4).unwrap();
        let scores = pagerank(&net, 0.85, 1e-12, 10_000).unwrap();
        (net, partition, scores)
    }

    #[test]
    fn ranking_truncates_to_top_n() {
        let (_, partition, scores) = three_node_module();
        let rankings = rank_within_modules(&scores, &partition, 2);
        assert_eq!(rankings.len(), 1);
        assert_eq!(rankings[0].entries.len(), 2);
        assert!(rankings[0].entries[0].score >= rankings[0].entries[1].score);
    }

    #[test]
    fn top_n_beyond_module_size_returns_everything() {
        let (_, partition, scores) = three_node_module();
        let rankings = rank_within_modules(&scores, &partition, 10);
        assert_eq!(rankings[0].entries.len(), 3);
    }

    #[test]
    fn equal_scores_rank_lexicographically() {
        let (_, partition, scores) = three_node_module();
        // The symmetric cycle gives all nodes the same score.
        let rankings = rank_within_modules(&scores, &partition, 3);
        let labels: Vec<&str> = rankings[0]
            .entries
            .iter()
            .map(|e| e.node.label.as_str())
            .collect();
        assert_eq!(labels, vec!["a", "b", "c"]);
    }

    #[test]
    fn full_keep_fraction_is_identity_on_the_module() {
        let (net, partition, _) = three_node_module();
        let sub = reduced_graph(&net, &partition, 0, 1.0).unwrap();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 3);
    }

    #[test]
    fn chain_reduction_keeps_center_and_higher_label() {
        let net = author_net(&[("a", "b", 1.0), ("b", "c", 1.0)]);
        let partition = detect_modules(&net, 4).unwrap();
        assert_eq!(partition.num_communities(), 1);
        let sub = reduced_graph(&net, &partition, 0, 2.0 / 3.0).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert!(sub.nodes().contains(&Node::author("b")));
        assert!(sub.nodes().contains(&Node::author("c")));
        assert_eq!(sub.edge_count(), 1);
    }

    #[test]
    fn tiny_keep_fraction_leaves_one_node_without_edges() {
        let (net, partition, _) = three_node_module();
        let sub = reduced_graph(&net, &partition, 0, 0.01).unwrap();
        assert_eq!(sub.node_count(), 1);
        assert_eq!(sub.edge_count(), 0);
    }

    #[test]
    fn unknown_module_is_an_error() {
        let (net, partition, _) = three_node_module();
        assert!(matches!(
            reduced_graph(&net, &partition, 9, 0.5),
            Err(AnalyticsError::UnknownModule(9))
        ));
    }

    #[test]
    fn reduction_is_monotone_in_keep_fraction() {
        let net = author_net(&[
            ("a", "b", 1.0),
            ("b", "c", 2.0),
            ("c", "d", 3.0),
            ("d", "a", 1.0),
            ("a", "c", 1.0),
        ]);
        let partition = detect_modules(&net, 4).unwrap();
        let mut previous: BTreeSet<Node> = BTreeSet::new();
        for keep in [0.25, 0.5, 0.75, 1.0] {
            let sub = reduced_graph(&net, &partition, 0, keep).unwrap();
            assert!(previous.is_subset(sub.nodes()));
            previous = sub.nodes().clone();
        }
    }

    #[test]
    fn reports_sort_by_size_descending() {
        let net = author_net(&[
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
            ("x", "y", 1.0),
            ("y", "x", 1.0),
        ]);
        let partition = detect_modules(&net, 4).unwrap();
        let scores = pagerank(&net, 0.85, 1e-10, 10_000).unwrap();
        let reports = build_module_reports(&net, &partition, &scores, 5, 1.0).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports[0].size >= reports[1].size);
        assert_eq!(reports[0].size, 3);
        assert_eq!(reports[0].author_count, 3);
        assert_eq!(reports[0].keyword_count, 0);
    }
}
