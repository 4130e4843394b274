//! Bibliographic record model: documents, corpora, and citation resolution.
//!
//! A corpus is parsed from line-delimited records (one flat JSON object per
//! line) and holds the publication record every other module consumes.
//! Citation edges are resolved purely by exact reference-to-id matching;
//! references that name no in-corpus document are counted, never guessed at.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while parsing record files.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing id at line {line}")]
    MissingId { line: usize },
    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate id `{id}` at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("failed to read records from {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One bibliographic record: the unit element of a corpus.
///
/// Author and keyword strings are case-folded and whitespace-normalized at
/// parse time, so string equality is identity for them everywhere downstream.
/// Records without authors are degraded but retained; they contribute only to
/// the layers for which they have data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub year: i32,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub references: Vec<String>,
}

impl Document {
    /// A record with no authors; it cannot appear in author-based layers.
    pub fn is_degraded(&self) -> bool {
        self.authors.is_empty()
    }
}

/// Raw wire form of a record line, before validation.
#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    year: i32,
    #[serde(default)]
    authors: Vec<String>,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default)]
    references: Vec<String>,
}

/// Case-fold and collapse whitespace; the normal form used for author and
/// keyword identity.
pub(crate) fn normalize_term(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn dedup_preserving_order(items: Vec<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    items
        .into_iter()
        .filter(|s| !s.is_empty() && seen.insert(s.clone()))
        .collect()
}

/// A validated collection of documents with resolved citation edges.
///
/// Both ends of every citation edge exist in the document set, self-citations
/// are excluded, and the edge set is exactly what the reference lists derive
/// restricted to in-corpus ids. A completed corpus is immutable and safe to
/// share across threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: BTreeMap<String, Document>,
    citation_edges: BTreeSet<(String, String)>,
    unresolved_reference_count: usize,
    dropped_self_reference_count: usize,
}

impl Corpus {
    /// Builds a corpus from pre-validated documents. Citations are left
    /// unresolved; call [`resolve_citations`].
    pub fn from_documents(documents: impl IntoIterator<Item = Document>) -> Self {
        let documents = documents.into_iter().map(|d| (d.id.clone(), d)).collect();
        Corpus {
            documents,
            ..Corpus::default()
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.documents.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.get(id)
    }

    /// Documents in ascending id order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.documents.keys().map(String::as_str)
    }

    /// Resolved (citing, cited) document-id pairs.
    pub fn citation_edges(&self) -> &BTreeSet<(String, String)> {
        &self.citation_edges
    }

    /// Reference entries that matched no in-corpus document.
    pub fn unresolved_reference_count(&self) -> usize {
        self.unresolved_reference_count
    }

    /// Self-references dropped during resolution.
    pub fn dropped_self_reference_count(&self) -> usize {
        self.dropped_self_reference_count
    }
}

/// Aggregate counts over a corpus, mirroring the bookkeeping of iterative
/// corpus collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub n_documents: usize,
    /// Total reference entries, with multiplicity across documents.
    pub n_references: usize,
    /// Distinct reference strings across the corpus.
    pub n_unique_references: usize,
    /// Citation edges that resolved to an in-corpus document.
    pub n_resolved_edges: usize,
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "documents={} references={} unique_references={} resolved_edges={}",
            self.n_documents, self.n_references, self.n_unique_references, self.n_resolved_edges
        )
    }
}

/// Parses line-delimited records into a corpus with citations unresolved.
///
/// Each non-blank line must be a flat JSON object with a non-empty `id`.
/// Author and keyword strings are case-folded and whitespace-trimmed, and
/// duplicate entries within a document's lists are collapsed.
pub fn parse_records(input: &str) -> Result<Corpus, ParseError> {
    let mut documents = BTreeMap::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| ParseError::Malformed {
                line: line_no,
                reason: e.to_string(),
            })?;
        let id = match raw.id {
            Some(id) if !id.trim().is_empty() => id.trim().to_string(),
            _ => return Err(ParseError::MissingId { line: line_no }),
        };
        let doc = Document {
            id: id.clone(),
            title: raw.title.trim().to_string(),
            year: raw.year,
            authors: dedup_preserving_order(
                raw.authors.iter().map(|a| normalize_term(a)).collect(),
            ),
            keywords: dedup_preserving_order(
                raw.keywords.iter().map(|k| normalize_term(k)).collect(),
            ),
            references: dedup_preserving_order(
                raw.references.iter().map(|r| r.trim().to_string()).collect(),
            ),
        };
        if documents.insert(id.clone(), doc).is_some() {
            return Err(ParseError::DuplicateId { id, line: line_no });
        }
    }
    Ok(Corpus {
        documents,
        ..Corpus::default()
    })
}

/// Reads and parses a record file.
pub fn parse_records_file(path: impl AsRef<Path>) -> Result<Corpus, ParseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_records(&text)
}

/// Populates the citation edge set from the documents' reference lists.
///
/// An edge (a, b) exists iff document a lists b and b is in the corpus, with
/// self-references dropped. References with no in-corpus target are tallied
/// in `unresolved_reference_count`. Idempotent: the edge set is recomputed
/// from scratch on every call.
pub fn resolve_citations(mut corpus: Corpus) -> Corpus {
    let mut edges = BTreeSet::new();
    let mut unresolved = 0;
    let mut self_drops = 0;
    for doc in corpus.documents.values() {
        for reference in &doc.references {
            if *reference == doc.id {
                self_drops += 1;
            } else if corpus.documents.contains_key(reference) {
                edges.insert((doc.id.clone(), reference.clone()));
            } else {
                unresolved += 1;
            }
        }
    }
    corpus.citation_edges = edges;
    corpus.unresolved_reference_count = unresolved;
    corpus.dropped_self_reference_count = self_drops;
    corpus
}

/// Counts documents, references (with and without multiplicity), and
/// resolved edges.
pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let n_references = corpus.documents.values().map(|d| d.references.len()).sum();
    let unique: BTreeSet<&str> = corpus
        .documents
        .values()
        .flat_map(|d| d.references.iter().map(String::as_str))
        .collect();
    CorpusStats {
        n_documents: corpus.documents.len(),
        n_references,
        n_unique_references: unique.len(),
        n_resolved_edges: corpus.citation_edges.len(),
    }
}

/// Serializes a corpus back to the line-delimited record format, documents in
/// ascending id order. `parse_records` of the output reproduces the corpus.
pub fn serialize_records(corpus: &Corpus) -> String {
    let mut out = String::new();
    for doc in corpus.documents.values() {
        out.push_str(&serde_json::to_string(doc).expect("record serialization cannot fail"));
        out.push('\n');
    }
    out
}
