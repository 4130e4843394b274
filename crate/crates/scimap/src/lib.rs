//! Multidimensional science maps from bibliographic records.
//!
//! `scimap` turns a publication record (documents with authors, keywords and
//! references) into a multilayer network and decomposes it into research
//! modules:
//!
//! 1. [`corpus`] parses line-delimited records and resolves document-level
//!    citation edges.
//! 2. [`snowball`] grows a seed corpus into a citation-closed collection by
//!    iteratively promoting frequently cited references.
//! 3. [`layers`] builds the three constituent graphs: author-citation,
//!    keyword-citation, and the bipartite author-keyword coupling.
//! 4. [`multinet`] unifies the layers along common nodes, normalizes edge
//!    weights per layer to (0, 1], filters, and symmetrizes.
//! 5. [`community`] detects modules via Walktrap random-walk agglomeration,
//!    cutting the merge tree at the maximum-modularity partition.
//! 6. [`analytics`] ranks module members by PageRank centrality, reduces
//!    module subgraphs for display, exports graphs (GraphML, DOT, CSV), and
//!    hosts the end-to-end pipeline.
//! 7. [`synth`] generates planted-block benchmark corpora and scores
//!    recovered partitions with normalized mutual information.
//!
//! All operations are deterministic: identical inputs produce identical
//! outputs, byte-for-byte in every exported file.

pub mod analytics;
pub mod community;
pub mod config;
pub mod corpus;
pub mod layers;
pub mod multinet;
pub mod snowball;
pub mod synth;

pub use corpus::{Corpus, CorpusStats, Document};
pub use layers::{Layer, LayerTag, Node, NodeKind};
pub use multinet::{FilterSpec, MultiNet};
