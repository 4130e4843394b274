//! End-to-end pipeline: records in, partition + rankings + reports out.

use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{
    build_module_reports, export, files, pagerank, rank_within_modules, reduced_graph_by_pagerank,
    CentralityScores, GraphFormat, ModuleReport,
};
use crate::community::{detect_modules, ModulePartition, DEFAULT_WALK_LENGTH};
use crate::corpus::{self, Corpus, CorpusStats};
use crate::layers::{build_layers, CountingScheme};
use crate::multinet::{filter, normalize, unify, FilterSpec, MultiNet};

/// Which connectivity measure drives subgraph reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReductionCriterion {
    /// Within-module weighted degree.
    #[default]
    Degree,
    /// Global PageRank score.
    PageRank,
}

/// Tunables of the full pipeline; defaults follow the library-wide choices
/// (walk length 4, damping 0.85, tolerance 1e-10).
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub counting: CountingScheme,
    pub filter: FilterSpec,
    pub walk_length: usize,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    pub top_n: usize,
    pub keep_fraction: f64,
    /// Rank module members by a PageRank recomputed on the module subgraph
    /// instead of the global one.
    pub per_module_pagerank: bool,
    pub reduction: ReductionCriterion,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            counting: CountingScheme::Full,
            filter: FilterSpec::default(),
            walk_length: DEFAULT_WALK_LENGTH,
            damping: 0.85,
            tolerance: 1e-10,
            max_iter: 10_000,
            top_n: 20,
            keep_fraction: 1.0,
            per_module_pagerank: false,
            reduction: ReductionCriterion::Degree,
        }
    }
}

/// A pipeline failure, tagged with the stage that aborted.
#[derive(Debug, Error)]
#[error("stage {stage}: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    fn at<E: std::error::Error + Send + Sync + 'static>(stage: &'static str) -> impl FnOnce(E) -> Self {
        move |source| PipelineError {
            stage,
            source: Box::new(source),
        }
    }

    fn message(stage: &'static str, message: impl Into<String>) -> Self {
        PipelineError {
            stage,
            source: message.into().into(),
        }
    }
}

/// Everything the pipeline produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub corpus: Corpus,
    pub stats: CorpusStats,
    pub net: MultiNet,
    pub partition: ModulePartition,
    pub scores: CentralityScores,
    pub reports: Vec<ModuleReport>,
}

/// Runs corpus -> layers -> unify -> normalize -> filter -> detect ->
/// pagerank -> reports. Fully deterministic; the first failing stage aborts
/// with its name.
pub fn run_pipeline(
    records_path: impl AsRef<Path>,
    config: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    let parsed = corpus::parse_records_file(records_path).map_err(PipelineError::at("corpus"))?;
    if parsed.is_empty() {
        return Err(PipelineError::message("corpus", "no documents in records file"));
    }
    let corpus = corpus::resolve_citations(parsed);
    let stats = corpus::corpus_stats(&corpus);

    let [ac, kc, ak] = build_layers(&corpus, config.counting);

    let net = unify(&ac, &kc, &ak).map_err(PipelineError::at("multinet"))?;
    let net = filter(normalize(net), &config.filter);

    let partition =
        detect_modules(&net, config.walk_length).map_err(PipelineError::at("detect"))?;

    let scores = pagerank(&net, config.damping, config.tolerance, config.max_iter)
        .map_err(PipelineError::at("pagerank"))?;

    let reports = build_reports(&net, &partition, &scores, config)
        .map_err(PipelineError::at("report"))?;

    Ok(PipelineOutput {
        corpus,
        stats,
        net,
        partition,
        scores,
        reports,
    })
}

fn build_reports(
    net: &MultiNet,
    partition: &ModulePartition,
    scores: &CentralityScores,
    config: &PipelineConfig,
) -> Result<Vec<ModuleReport>, super::AnalyticsError> {
    let ranking_scores = if config.per_module_pagerank {
        per_module_scores(net, partition, config)?
    } else {
        scores.clone()
    };
    let mut reports = build_module_reports(
        net,
        partition,
        &ranking_scores,
        config.top_n,
        config.keep_fraction,
    )?;
    if config.reduction == ReductionCriterion::PageRank {
        for report in &mut reports {
            let reduced = reduced_graph_by_pagerank(
                net,
                partition,
                report.module,
                config.keep_fraction,
                scores,
            )?;
            report.reduced_edges = reduced.edges().to_vec();
        }
    }
    Ok(reports)
}

/// Recomputes PageRank on each module's induced subnet and splices the local
/// scores into one map (each module's scores sum to 1 within the module).
fn per_module_scores(
    net: &MultiNet,
    partition: &ModulePartition,
    config: &PipelineConfig,
) -> Result<CentralityScores, super::AnalyticsError> {
    let mut merged = CentralityScores {
        scores: Default::default(),
        damping: config.damping,
        iterations: 0,
        residual: 0.0,
        converged: true,
    };
    for module in 0..partition.num_communities() {
        let subnet = super::reduced_graph(net, partition, module, 1.0)?;
        if subnet.is_empty() {
            continue;
        }
        let local = pagerank(&subnet, config.damping, config.tolerance, config.max_iter)?;
        merged.iterations = merged.iterations.max(local.iterations);
        merged.residual = merged.residual.max(local.residual);
        merged.converged &= local.converged;
        merged.scores.extend(local.scores);
    }
    Ok(merged)
}

/// Writes partition.csv, rankings.csv, reports.json and multinet.graphml
/// into `dir` (plus corpus.jsonl when `dump_corpus` is set), returning the
/// paths written. Identical outputs produce identical bytes.
pub fn write_pipeline_outputs(
    output: &PipelineOutput,
    dir: impl AsRef<Path>,
    dump_corpus: bool,
) -> Result<Vec<PathBuf>, std::io::Error> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let partition_path = dir.join("partition.csv");
    std::fs::write(&partition_path, files::partition_to_csv(&output.partition))?;
    written.push(partition_path);

    let rankings = rank_within_modules(&output.scores, &output.partition, usize::MAX);
    let rankings_path = dir.join("rankings.csv");
    std::fs::write(&rankings_path, files::rankings_to_csv(&rankings))?;
    written.push(rankings_path);

    let reports_path = dir.join("reports.json");
    std::fs::write(&reports_path, files::reports_to_json(&output.reports))?;
    written.push(reports_path);

    let net_path = dir.join("multinet.graphml");
    export::export_graph(
        &output.net,
        GraphFormat::GraphMl,
        &net_path,
        Some(&output.partition),
    )
    .map_err(|e| std::io::Error::other(e.to_string()))?;
    written.push(net_path);

    if dump_corpus {
        let corpus_path = dir.join("corpus.jsonl");
        std::fs::write(&corpus_path, corpus::serialize_records(&output.corpus))?;
        written.push(corpus_path);
    }
    Ok(written)
}
