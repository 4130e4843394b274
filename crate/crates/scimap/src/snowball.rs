//! Iterative, threshold-filtered reference-snowball corpus collection.
//!
//! Starting from a topic-query seed, each iteration counts how often the
//! newest generation of documents cites each reference; references cited at
//! least `threshold` times are considered relevant and promoted into the
//! corpus when the store can retrieve them. Iteration stops at an explicit
//! fixpoint (a round adding nothing) or at the iteration cap, leaving a
//! collection fairly closed under the citing relation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::corpus::{self, Corpus, Document, ParseError};

#[derive(Debug, Error)]
pub enum SnowballError {
    #[error("query must contain at least one non-empty phrase")]
    EmptyQuery,
    #[error("threshold schedule must contain at least one value")]
    EmptyThresholds,
    #[error("threshold schedule must be non-decreasing, got {previous} before {next}")]
    DecreasingThresholds { previous: u32, next: u32 },
    #[error("thresholds must be at least 1")]
    ZeroThreshold,
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// An id-indexed universe of documents standing in for the bibliographic
/// databases a snowball would query. Unknown ids are absent, never errors.
#[derive(Debug, Clone, Default)]
pub struct CitationStore {
    documents: BTreeMap<String, Document>,
}

impl CitationStore {
    pub fn from_documents(documents: impl IntoIterator<Item = Document>) -> Self {
        CitationStore {
            documents: documents.into_iter().map(|d| (d.id.clone(), d)).collect(),
        }
    }

    /// Loads a store from a record file (same format as corpus records).
    pub fn from_records_file(path: impl AsRef<Path>) -> Result<Self, ParseError> {
        let parsed = corpus::parse_records_file(path)?;
        Ok(CitationStore {
            documents: parsed.documents().map(|d| (d.id.clone(), d.clone())).collect(),
        })
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.get(id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Ids of documents whose title or keywords contain any phrase,
    /// case-insensitively.
    pub fn topic_query(&self, phrases: &[String]) -> BTreeSet<String> {
        let needles: Vec<String> = phrases.iter().map(|p| p.to_lowercase()).collect();
        self.documents
            .values()
            .filter(|doc| {
                let title = doc.title.to_lowercase();
                needles.iter().any(|needle| {
                    title.contains(needle)
                        || doc.keywords.iter().any(|k| k.contains(needle))
                })
            })
            .map(|doc| doc.id.clone())
            .collect()
    }
}

/// Parameters of a snowball run.
///
/// `thresholds[i]` applies to iteration i, the last value repeating when the
/// run outlives the schedule; the schedule must be non-decreasing, mirroring
/// the assumption that later reference generations drift off-topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnowballConfig {
    pub queries: Vec<String>,
    pub thresholds: Vec<u32>,
    pub max_iterations: usize,
}

impl SnowballConfig {
    pub fn validate(&self) -> Result<(), SnowballError> {
        if self.queries.is_empty() || self.queries.iter().all(|q| q.trim().is_empty()) {
            return Err(SnowballError::EmptyQuery);
        }
        if self.thresholds.is_empty() {
            return Err(SnowballError::EmptyThresholds);
        }
        if self.thresholds.contains(&0) {
            return Err(SnowballError::ZeroThreshold);
        }
        for pair in self.thresholds.windows(2) {
            if pair[1] < pair[0] {
                return Err(SnowballError::DecreasingThresholds {
                    previous: pair[0],
                    next: pair[1],
                });
            }
        }
        if self.max_iterations == 0 {
            return Err(SnowballError::ZeroIterations);
        }
        Ok(())
    }
}

/// One row of the per-iteration report; the columns mirror the collection
/// statistics table of the procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRow {
    pub iteration: usize,
    pub n_source_documents: usize,
    pub n_references: usize,
    pub n_unique_references: usize,
    pub threshold: u32,
    pub n_relevant_retrievable: usize,
}

/// Outcome of a snowball run: the final citation-resolved corpus, the
/// per-iteration rows, and whether an explicit fixpoint was reached.
#[derive(Debug, Clone, PartialEq)]
pub struct SnowballResult {
    pub corpus: Corpus,
    pub rows: Vec<IterationRow>,
    pub converged: bool,
}

/// Retrieves the seed: every store document matching the topic query, with
/// citations resolved within the seed.
pub fn seed_corpus(store: &CitationStore, queries: &[String]) -> Result<Corpus, SnowballError> {
    if queries.is_empty() || queries.iter().all(|q| q.trim().is_empty()) {
        return Err(SnowballError::EmptyQuery);
    }
    let ids = store.topic_query(queries);
    let docs = ids.iter().map(|id| store.get(id).expect("queried id").clone());
    Ok(corpus::resolve_citations(Corpus::from_documents(docs)))
}

/// One snowball round over the newest generation.
///
/// Counts reference frequencies across the reference lists of `newest`,
/// promotes references cited at least `threshold` times that the store
/// retrieves and the corpus lacks, and reports the round. Relevant but
/// unretrievable references are excluded from the retrievable count.
pub fn snowball_iterate(
    current: &Corpus,
    newest: &BTreeSet<String>,
    store: &CitationStore,
    threshold: u32,
    iteration: usize,
) -> (Vec<Document>, IterationRow) {
    let mut frequency: BTreeMap<&str, u32> = BTreeMap::new();
    let mut n_references = 0usize;
    for id in newest {
        let doc = current.get(id).expect("newest generation ids are in the corpus");
        for reference in &doc.references {
            n_references += 1;
            *frequency.entry(reference.as_str()).or_insert(0) += 1;
        }
    }
    let added: Vec<Document> = frequency
        .iter()
        .filter(|&(_, &count)| count >= threshold)
        .filter(|&(reference, _)| !current.contains(reference))
        .filter_map(|(reference, _)| store.get(reference).cloned())
        .collect();
    let row = IterationRow {
        iteration,
        n_source_documents: newest.len(),
        n_references,
        n_unique_references: frequency.len(),
        threshold,
        n_relevant_retrievable: added.len(),
    };
    (added, row)
}

/// Runs the full procedure: seed, then iterate until a round adds zero
/// documents (converged) or the iteration cap is hit (not converged).
pub fn snowball_run(
    store: &CitationStore,
    config: &SnowballConfig,
) -> Result<SnowballResult, SnowballError> {
    config.validate()?;
    let mut current = seed_corpus(store, &config.queries)?;
    let mut newest: BTreeSet<String> = current.ids().map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut converged = false;
    for i in 0..config.max_iterations {
        let threshold = config.thresholds[i.min(config.thresholds.len() - 1)];
        let (added, row) = snowball_iterate(&current, &newest, store, threshold, i + 1);
        rows.push(row);
        if added.is_empty() {
            converged = true;
            break;
        }
        newest = added.iter().map(|d| d.id.clone()).collect();
        let docs: Vec<Document> = current.documents().cloned().chain(added).collect();
        current = corpus::resolve_citations(Corpus::from_documents(docs));
    }
    Ok(SnowballResult {
        corpus: current,
        rows,
        converged,
    })
}

/// Serializes the per-iteration report with the fixed column header.
pub fn write_report_csv(rows: &[IterationRow]) -> String {
    let mut out = String::from(
        "iteration,n_source_documents,n_references,n_unique_references,threshold,n_relevant_retrievable\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.iteration,
            row.n_source_documents,
            row.n_references,
            row.n_unique_references,
            row.threshold,
            row.n_relevant_retrievable
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, title: &str, keywords: &[&str], refs: &[&str]) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            year: 0,
            authors: vec!["author x".into()],
            keywords: keywords.iter().map(|k| k.to_string()).collect(),
            references: refs.iter().map(|r| r.to_string()).collect(),
        }
    }

    #[test]
    fn seed_matches_title_substring() {
        let store = CitationStore::from_documents([doc("d1", "On the species concept", &[], &[])]);
        let seed = seed_corpus(&store, &["species concept".into()]).unwrap();
        assert_eq!(seed.len(), 1);
        assert!(seed.contains("d1"));
    }

    #[test]
    fn seed_with_no_match_is_empty() {
        let store = CitationStore::from_documents([doc("d1", "Unrelated", &[], &[])]);
        let seed = seed_corpus(&store, &["species".into()]).unwrap();
        assert!(seed.is_empty());
    }

    #[test]
    fn seed_matches_keywords_too() {
        let store = CitationStore::from_documents([doc(
            "d1",
            "Morphometrics of beetles",
            &["species definition"],
            &[],
        )]);
        let seed = seed_corpus(&store, &["species definition".into()]).unwrap();
        assert_eq!(seed.len(), 1);
    }

    #[test]
    fn seed_query_is_case_insensitive() {
        let store = CitationStore::from_documents([doc("d1", "THE SPECIES PROBLEM", &[], &[])]);
        let seed = seed_corpus(&store, &["Species Problem".into()]).unwrap();
        assert_eq!(seed.len(), 1);
    }

    #[test]
    fn empty_query_is_an_error() {
        let store = CitationStore::default();
        assert!(matches!(
            seed_corpus(&store, &[]),
            Err(SnowballError::EmptyQuery)
        ));
        assert!(matches!(
            seed_corpus(&store, &["  ".into()]),
            Err(SnowballError::EmptyQuery)
        ));
    }

    #[test]
    fn iterate_promotes_references_at_threshold() {
        let store = CitationStore::from_documents([doc("r9", "Cited classic", &[], &[])]);
        let current = corpus::resolve_citations(Corpus::from_documents([
            doc("d1", "t", &[], &["r9"]),
            doc("d2", "t", &[], &["r9"]),
            doc("d3", "t", &[], &["r9"]),
        ]));
        let newest: BTreeSet<String> = current.ids().map(str::to_string).collect();
        let (added, row) = snowball_iterate(&current, &newest, &store, 3, 1);
        assert_eq!(added.len(), 1);
        assert_eq!(added[0].id, "r9");
        assert_eq!(row.n_relevant_retrievable, 1);
        assert_eq!(row.n_source_documents, 3);
        assert_eq!(row.n_references, 3);
        assert_eq!(row.n_unique_references, 1);
    }

    #[test]
    fn iterate_below_threshold_adds_nothing() {
        let store = CitationStore::from_documents([doc("r9", "Cited classic", &[], &[])]);
        let current = corpus::resolve_citations(Corpus::from_documents([
            doc("d1", "t", &[], &["r9"]),
            doc("d2", "t", &[], &["r9"]),
        ]));
        let newest: BTreeSet<String> = current.ids().map(str::to_string).collect();
        let (added, row) = snowball_iterate(&current, &newest, &store, 5, 1);
        assert!(added.is_empty());
        assert_eq!(row.n_relevant_retrievable, 0);
    }

    #[test]
    fn relevant_but_unretrievable_is_not_added() {
        let store = CitationStore::default();
        let current = corpus::resolve_citations(Corpus::from_documents([
            doc("d1", "t", &[], &["ghost"]),
            doc("d2", "t", &[], &["ghost"]),
        ]));
        let newest: BTreeSet<String> = current.ids().map(str::to_string).collect();
        let (added, row) = snowball_iterate(&current, &newest, &store, 2, 1);
        assert!(added.is_empty());
        assert_eq!(row.n_relevant_retrievable, 0);
        assert_eq!(row.n_unique_references, 1);
    }

    #[test]
    fn run_converges_immediately_on_a_quiet_seed() {
        let store = CitationStore::from_documents([
            doc("d1", "species problem review", &[], &["x", "y"]),
        ]);
        let config = SnowballConfig {
            queries: vec!["species problem".into()],
            thresholds: vec![3],
            max_iterations: 5,
        };
        let result = snowball_run(&store, &config).unwrap();
        assert!(result.converged);
        assert_eq!(result.rows.len(), 1);
        assert_eq!(result.corpus.len(), 1);
    }

    /// Store built to force per-iteration additions of 5, then 3, then 0.
    fn three_generation_store() -> (CitationStore, SnowballConfig) {
        let mut docs = Vec::new();
        // Seed: 4 documents each citing the same 5 first-generation targets.
        let gen1: Vec<String> = (0..5).map(|i| format!("g1_{i}")).collect();
        for s in 0..4 {
            docs.push(doc(
                &format!("seed{s}"),
                "species problem source",
                &[],
                &gen1.iter().map(String::as_str).collect::<Vec<_>>(),
            ));
        }
        // Generation 1: 5 documents each citing the same 3 second-generation
        // targets.
        let gen2: Vec<String> = (0..3).map(|i| format!("g2_{i}")).collect();
        for id in &gen1 {
            docs.push(doc(
                id,
                "first generation",
                &[],
                &gen2.iter().map(String::as_str).collect::<Vec<_>>(),
            ));
        }
        // Generation 2: 3 documents whose references never reach threshold.
        for (i, id) in gen2.iter().enumerate() {
            docs.push(doc(id, "second generation", &[], &[&format!("stray{i}")]));
        }
        let config = SnowballConfig {
            queries: vec!["species problem".into()],
            thresholds: vec![3, 3, 3],
            max_iterations: 10,
        };
        (CitationStore::from_documents(docs), config)
    }

    #[test]
    fn run_walks_three_generations_to_a_fixpoint() {
        let (store, config) = three_generation_store();
        let result = snowball_run(&store, &config).unwrap();
        assert!(result.converged);
        assert_eq!(result.rows.len(), 3);
        let additions: Vec<usize> = result
            .rows
            .iter()
            .map(|r| r.n_relevant_retrievable)
            .collect();
        assert_eq!(additions, vec![5, 3, 0]);
        assert_eq!(result.corpus.len(), 4 + 5 + 3);
        assert_eq!(result.rows[1].n_source_documents, 5);
        assert_eq!(result.rows[2].n_source_documents, 3);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let (store, config) = three_generation_store();
        let capped = SnowballConfig {
            max_iterations: 1,
            ..config
        };
        let result = snowball_run(&store, &capped).unwrap();
        assert!(!result.converged);
        assert_eq!(result.rows.len(), 1);
    }

    #[test]
    fn last_threshold_repeats_beyond_the_schedule() {
        let (store, config) = three_generation_store();
        let short = SnowballConfig {
            thresholds: vec![3],
            ..config
        };
        let result = snowball_run(&store, &short).unwrap();
        assert!(result.converged);
        assert_eq!(result.rows.iter().map(|r| r.threshold).collect::<Vec<_>>(), vec![3, 3, 3]);
    }

    #[test]
    fn decreasing_thresholds_are_rejected() {
        let config = SnowballConfig {
            queries: vec!["x".into()],
            thresholds: vec![10, 3],
            max_iterations: 2,
        };
        assert!(matches!(
            config.validate(),
            Err(SnowballError::DecreasingThresholds { .. })
        ));
    }

    #[test]
    fn report_has_the_fixed_header() {
        let (store, config) = three_generation_store();
        let result = snowball_run(&store, &config).unwrap();
        let csv = write_report_csv(&result.rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,n_source_documents,n_references,n_unique_references,threshold,n_relevant_retrievable"
        );
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn identical_runs_are_byte_identical() {
        let (store, config) = three_generation_store();
        let a = write_report_csv(&snowball_run(&store, &config).unwrap().rows);
        let b = write_report_csv(&snowball_run(&store, &config).unwrap().rows);
        assert_eq!(a, b);
    }
}
