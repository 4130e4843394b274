//! The three constituent graphs of a science map.
//!
//! From a citation-resolved corpus this module builds the author-citation
//! layer (who cites whom, directed), the keyword-citation layer (which
//! concepts descend from which, directed, following document citations), and
//! the bipartite author-keyword coupling. Node identity is (kind, label) and
//! is shared across layers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use thiserror::Error;

use crate::corpus::Corpus;

#[derive(Debug, Error)]
pub enum LayerError {
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("{layer} edge {source} -> {target} violates the layer's node-kind constraint")]
    KindViolation {
        layer: &'static str,
        source: String,
        target: String,
    },
    #[error("edge {source} -> {target} must have positive finite weight, got {weight}")]
    InvalidWeight {
        source: String,
        target: String,
        weight: f64,
    },
}

/// Node kind: the two indicator sets coupled by the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Author,
    Keyword,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Author => "author",
            NodeKind::Keyword => "keyword",
        }
    }

    pub fn parse(s: &str) -> Option<NodeKind> {
        match s {
            "author" => Some(NodeKind::Author),
            "keyword" => Some(NodeKind::Keyword),
            _ => None,
        }
    }
}

/// A graph node; `(kind, label)` is its identity everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub label: String,
}

impl Node {
    pub fn author(label: impl Into<String>) -> Node {
        Node {
            kind: NodeKind::Author,
            label: label.into(),
        }
    }

    pub fn keyword(label: impl Into<String>) -> Node {
        Node {
            kind: NodeKind::Keyword,
            label: label.into(),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.as_str(), self.label)
    }
}

/// Which constituent graph an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerTag {
    AuthorCitation,
    KeywordCitation,
    AuthorKeyword,
}

impl LayerTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerTag::AuthorCitation => "author_citation",
            LayerTag::KeywordCitation => "keyword_citation",
            LayerTag::AuthorKeyword => "author_keyword",
        }
    }

    pub fn parse(s: &str) -> Option<LayerTag> {
        match s {
            "author_citation" => Some(LayerTag::AuthorCitation),
            "keyword_citation" => Some(LayerTag::KeywordCitation),
            "author_keyword" => Some(LayerTag::AuthorKeyword),
            _ => None,
        }
    }

    /// Citation layers are directed; the bipartite coupling is not.
    pub fn directed(self) -> bool {
        !matches!(self, LayerTag::AuthorKeyword)
    }

    /// Whether an edge between these node kinds belongs in this layer.
    pub fn admits(self, source: NodeKind, target: NodeKind) -> bool {
        match self {
            LayerTag::AuthorCitation => {
                source == NodeKind::Author && target == NodeKind::Author
            }
            LayerTag::KeywordCitation => {
                source == NodeKind::Keyword && target == NodeKind::Keyword
            }
            LayerTag::AuthorKeyword => {
                source == NodeKind::Author && target == NodeKind::Keyword
            }
        }
    }

    pub const ALL: [LayerTag; 3] = [
        LayerTag::AuthorCitation,
        LayerTag::KeywordCitation,
        LayerTag::AuthorKeyword,
    ];
}

/// How much weight one document (pair) contributes to a layer edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountingScheme {
    /// Each qualifying pair counts 1.
    #[default]
    Full,
    /// Each citation (or document) distributes a total weight of 1 over the
    /// pairs it induces.
    Fractional,
}

/// One constituent graph: typed nodes and positively weighted edges.
///
/// No self-loops. Citation layers hold only same-kind nodes; the
/// author-keyword layer holds exactly one author and one keyword per edge,
/// stored author-first.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub tag: LayerTag,
    pub directed: bool,
    edges: BTreeMap<(Node, Node), f64>,
}

impl Layer {
    pub fn new(tag: LayerTag) -> Layer {
        Layer {
            tag,
            directed: tag.directed(),
            edges: BTreeMap::new(),
        }
    }

    /// Builds a layer from explicit weighted edges, validating the layer's
    /// node-kind constraint, loop-freeness, and weight positivity. Parallel
    /// entries for the same node pair are summed.
    pub fn from_edges(
        tag: LayerTag,
        edges: impl IntoIterator<Item = (Node, Node, f64)>,
    ) -> Result<Layer, LayerError> {
        let mut layer = Layer::new(tag);
        for (source, target, weight) in edges {
            if source == target {
                return Err(LayerError::SelfLoop(source.to_string()));
            }
            if !tag.admits(source.kind, target.kind) {
                return Err(LayerError::KindViolation {
                    layer: tag.as_str(),
                    source: source.to_string(),
                    target: target.to_string(),
                });
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(LayerError::InvalidWeight {
                    source: source.to_string(),
                    target: target.to_string(),
                    weight,
                });
            }
            layer.add(source, target, weight);
        }
        Ok(layer)
    }

    fn add(&mut self, source: Node, target: Node, weight: f64) {
        debug_assert!(source != target, "layers never hold self-loops");
        *self.edges.entry((source, target)).or_insert(0.0) += weight;
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, source: &Node, target: &Node) -> Option<f64> {
        self.edges.get(&(source.clone(), target.clone())).copied()
    }

    /// Edges in deterministic (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (&Node, &Node, f64)> {
        self.edges.iter().map(|((s, t), w)| (s, t, *w))
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }
}

/// Directed author-citation layer: for every citation (d1, d2), every author
/// of d1 points at every distinct author of d2.
pub fn build_author_citation(corpus: &Corpus) -> Layer {
    build_author_citation_with(corpus, CountingScheme::Full)
}

pub fn build_author_citation_with(corpus: &Corpus, scheme: CountingScheme) -> Layer {
    let mut layer = Layer::new(LayerTag::AuthorCitation);
    for (citing, cited) in corpus.citation_edges() {
        let src = &corpus.get(citing).expect("edge endpoint in corpus").authors;
        let dst = &corpus.get(cited).expect("edge endpoint in corpus").authors;
        if src.is_empty() || dst.is_empty() {
            continue;
        }
        let w = match scheme {
            CountingScheme::Full => 1.0,
            CountingScheme::Fractional => 1.0 / (src.len() as f64 * dst.len() as f64),
        };
        for a in src {
            for b in dst {
                if a != b {
                    layer.add(Node::author(a.clone()), Node::author(b.clone()), w);
                }
            }
        }
    }
    layer
}

/// Directed keyword-citation layer: keywords of a citing document point at
/// the distinct keywords of the cited document. Documents without keywords
/// contribute nothing.
pub fn build_keyword_citation(corpus: &Corpus) -> Layer {
    build_keyword_citation_with(corpus, CountingScheme::Full)
}

pub fn build_keyword_citation_with(corpus: &Corpus, scheme: CountingScheme) -> Layer {
    let mut layer = Layer::new(LayerTag::KeywordCitation);
    for (citing, cited) in corpus.citation_edges() {
        let src = &corpus.get(citing).expect("edge endpoint in corpus").keywords;
        let dst = &corpus.get(cited).expect("edge endpoint in corpus").keywords;
        if src.is_empty() || dst.is_empty() {
            continue;
        }
        let w = match scheme {
            CountingScheme::Full => 1.0,
            CountingScheme::Fractional => 1.0 / (src.len() as f64 * dst.len() as f64),
        };
        for k1 in src {
            for k2 in dst {
                if k1 != k2 {
                    layer.add(Node::keyword(k1.clone()), Node::keyword(k2.clone()), w);
                }
            }
        }
    }
    layer
}

/// Undirected bipartite author-keyword layer: edge weight is the number of
/// documents coupling the author with the keyword.
pub fn build_author_keyword(corpus: &Corpus) -> Layer {
    build_author_keyword_with(corpus, CountingScheme::Full)
}

pub fn build_author_keyword_with(corpus: &Corpus, scheme: CountingScheme) -> Layer {
    let mut layer = Layer::new(LayerTag::AuthorKeyword);
    for doc in corpus.documents() {
        if doc.authors.is_empty() || doc.keywords.is_empty() {
            continue;
        }
        let w = match scheme {
            CountingScheme::Full => 1.0,
            CountingScheme::Fractional => 1.0 / (doc.authors.len() as f64 * doc.keywords.len() as f64),
        };
        for a in &doc.authors {
            for k in &doc.keywords {
                layer.add(Node::author(a.clone()), Node::keyword(k.clone()), w);
            }
        }
    }
    layer
}

/// Builds all three layers from the same corpus.
pub fn build_layers(corpus: &Corpus, scheme: CountingScheme) -> [Layer; 3] {
    [
        build_author_citation_with(corpus, scheme),
        build_keyword_citation_with(corpus, scheme),
        build_author_keyword_with(corpus, scheme),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{resolve_citations, Corpus, Document};

    fn doc(id: &str, authors: &[&str], keywords: &[&str], refs: &[&str]) -> Document {
        Document {
            id: id.into(),
            title: String::new(),
            year: 0,
            authors: authors.iter().map(|s| s.to_string()).collect(),
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
            references: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn corpus(docs: Vec<Document>) -> Corpus {
        resolve_citations(Corpus::from_documents(docs))
    }

    #[test]
    fn author_citation_unrolls_author_pairs() {
        let c = corpus(vec![
            doc("d1", &["a", "b"], &[], &["d2"]),
            doc("d2", &["c"], &[], &[]),
        ]);
        let layer = build_author_citation(&c);
        assert_eq!(layer.weight(&Node::author("a"), &Node::author("c")), Some(1.0));
        assert_eq!(layer.weight(&Node::author("b"), &Node::author("c")), Some(1.0));
        assert_eq!(layer.edge_count(), 2);
    }

    #[test]
    fn author_self_citation_produces_no_loop() {
        let c = corpus(vec![
            doc("d1", &["a"], &[], &["d2"]),
            doc("d2", &["a"], &[], &[]),
        ]);
        assert!(build_author_citation(&c).is_empty());
    }

    #[test]
    fn author_citation_counts_add_up() {
        let c = corpus(vec![
            doc("d1", &["a"], &[], &["d3"]),
            doc("d2", &["a"], &[], &["d3"]),
            doc("d3", &["c"], &[], &[]),
        ]);
        let layer = build_author_citation(&c);
        assert_eq!(layer.weight(&Node::author("a"), &Node::author("c")), Some(2.0));
    }

    #[test]
    fn keyword_citation_drops_identical_pairs() {
        let c = corpus(vec![
            doc("d1", &[], &["x", "y"], &["d2"]),
            doc("d2", &[], &["y", "z"], &[]),
        ]);
        let layer = build_keyword_citation(&c);
        assert_eq!(layer.weight(&Node::keyword("x"), &Node::keyword("y")), Some(1.0));
        assert_eq!(layer.weight(&Node::keyword("x"), &Node::keyword("z")), Some(1.0));
        assert_eq!(layer.weight(&Node::keyword("y"), &Node::keyword("z")), Some(1.0));
        assert_eq!(layer.weight(&Node::keyword("y"), &Node::keyword("y")), None);
        assert_eq!(layer.edge_count(), 3);
    }

    #[test]
    fn citing_doc_without_keywords_contributes_nothing() {
        let c = corpus(vec![
            doc("d1", &[], &[], &["d2"]),
            doc("d2", &[], &["z"], &[]),
        ]);
        assert!(build_keyword_citation(&c).is_empty());
    }

    #[test]
    fn independent_citation_pairs_accumulate() {
        let c = corpus(vec![
            doc("d1", &[], &["x"], &["d2"]),
            doc("d2", &[], &["z"], &[]),
            doc("d3", &[], &["x"], &["d4"]),
            doc("d4", &[], &["z"], &[]),
        ]);
        let layer = build_keyword_citation(&c);
        assert_eq!(layer.weight(&Node::keyword("x"), &Node::keyword("z")), Some(2.0));
    }

    #[test]
    fn author_keyword_counts_documents() {
        let c = corpus(vec![
            doc("d1", &["a"], &["x"], &[]),
            doc("d2", &["a"], &["x"], &[]),
        ]);
        let layer = build_author_keyword(&c);
        assert_eq!(layer.weight(&Node::author("a"), &Node::keyword("x")), Some(2.0));
    }

    #[test]
    fn author_keyword_is_a_cross_product_per_document() {
        let c = corpus(vec![doc("d1", &["a", "b"], &["x", "y"], &[])]);
        let layer = build_author_keyword(&c);
        assert_eq!(layer.edge_count(), 4);
        for (_, _, w) in layer.edges() {
            assert_eq!(w, 1.0);
        }
    }

    #[test]
    fn degraded_documents_skip_author_keyword_layer() {
        let c = corpus(vec![doc("d1", &[], &["x"], &[])]);
        assert!(build_author_keyword(&c).is_empty());
    }

    #[test]
    fn fractional_counting_splits_credit() {
        let c = corpus(vec![
            doc("d1", &["a", "b"], &[], &["d2"]),
            doc("d2", &["c", "d"], &[], &[]),
        ]);
        let layer = build_author_citation_with(&c, CountingScheme::Fractional);
        assert_eq!(layer.weight(&Node::author("a"), &Node::author("c")), Some(0.25));
        let total: f64 = layer.edges().map(|(_, _, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_author_citation_weight_matches_recount() {
        // Brute-force recount: sum over citation edges of |authors(d1)| *
        // |authors(d2)| minus same-author pairs.
        let c = corpus(vec![
            doc("d1", &["a", "b"], &[], &["d2", "d3"]),
            doc("d2", &["b", "c"], &[], &["d3"]),
            doc("d3", &["a"], &[], &[]),
        ]);
        let mut expected = 0.0;
        for (citing, cited) in c.citation_edges() {
            let src = &c.get(citing).unwrap().authors;
            let dst = &c.get(cited).unwrap().authors;
            for a in src {
                for b in dst {
                    if a != b {
                        expected += 1.0;
                    }
                }
            }
        }
        let layer = build_author_citation(&c);
        assert!((layer.total_weight() - expected).abs() < 1e-12);
    }

    #[test]
    fn bipartite_layer_endpoints_are_typed() {
        let c = corpus(vec![doc("d1", &["a"], &["x"], &[])]);
        let layer = build_author_keyword(&c);
        for (s, t, _) in layer.edges() {
            assert_eq!(s.kind, NodeKind::Author);
            assert_eq!(t.kind, NodeKind::Keyword);
        }
    }
}
