//! Fixed-format report files.
//!
//! partition.csv: header `kind,label,community`, one row per node, and a
//! `# Q=` footer carrying the partition's modularity. rankings.csv: header
//! `module,rank,kind,label,score`. Reports serialize as pretty JSON. All
//! writers are deterministic, so identical inputs give identical bytes.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{ModuleReport, ModuleRanking};
use crate::community::ModulePartition;
use crate::layers::{Node, NodeKind};

#[derive(Debug, Error)]
pub enum FilesError {
    #[error("malformed partition csv: {0}")]
    Malformed(String),
    #[error("partition csv lacks the Q footer")]
    MissingFooter,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Serializes a partition with its Q footer.
pub fn partition_to_csv(partition: &ModulePartition) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["kind", "label", "community"])
        .expect("in-memory csv");
    for (node, community) in partition.assignment() {
        writer
            .write_record([node.kind.as_str(), &node.label, &community.to_string()])
            .expect("in-memory csv");
    }
    let mut out = String::from_utf8(writer.into_inner().expect("in-memory csv"))
        .expect("csv is utf-8");
    out.push_str(&format!("# Q={}\n", partition.q()));
    out
}

/// Reads a partition file written by [`partition_to_csv`].
pub fn partition_from_csv(text: &str) -> Result<ModulePartition, FilesError> {
    let q_line = text
        .lines()
        .rev()
        .find(|l| l.starts_with("# Q="))
        .ok_or(FilesError::MissingFooter)?;
    let q: f64 = q_line["# Q=".len()..]
        .trim()
        .parse()
        .map_err(|_| FilesError::Malformed(format!("unparseable footer `{q_line}`")))?;

    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut assignment = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 3 {
            return Err(FilesError::Malformed(format!(
                "expected 3 columns, got {}",
                record.len()
            )));
        }
        let kind = NodeKind::parse(&record[0])
            .ok_or_else(|| FilesError::Malformed(format!("unknown kind `{}`", &record[0])))?;
        let community: usize = record[2]
            .parse()
            .map_err(|_| FilesError::Malformed(format!("bad community `{}`", &record[2])))?;
        assignment.insert(
            Node {
                kind,
                label: record[1].to_string(),
            },
            community,
        );
    }
    Ok(ModulePartition::new(assignment, q))
}

/// Serializes module rankings with the fixed header.
pub fn rankings_to_csv(rankings: &[ModuleRanking]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["module", "rank", "kind", "label", "score"])
        .expect("in-memory csv");
    for ranking in rankings {
        for (rank, entry) in ranking.entries.iter().enumerate() {
            writer
                .write_record([
                    ranking.module.to_string(),
                    (rank + 1).to_string(),
                    entry.node.kind.as_str().to_string(),
                    entry.node.label.clone(),
                    entry.score.to_string(),
                ])
                .expect("in-memory csv");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

/// Serializes module reports as pretty JSON.
pub fn reports_to_json(reports: &[ModuleReport]) -> String {
    let mut out = serde_json::to_string_pretty(reports).expect("reports serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::RankedNode;

    fn sample_partition() -> ModulePartition {
        let assignment: BTreeMap<Node, usize> = [
            (Node::author("smith, j"), 0),
            (Node::author("doe"), 0),
            (Node::keyword("speciation"), 1),
        ]
        .into();
        ModulePartition::new(assignment, 0.25)
    }

    #[test]
    fn partition_round_trips_through_csv() {
        let p = sample_partition();
        let text = partition_to_csv(&p);
        let back = partition_from_csv(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn partition_csv_quotes_commas_in_labels() {
        let text = partition_to_csv(&sample_partition());
        assert!(text.contains("\"smith, j\""));
        assert!(text.ends_with("# Q=0.25\n"));
    }

    #[test]
    fn missing_footer_is_an_error() {
        assert!(matches!(
            partition_from_csv("kind,label,community\nauthor,a,0\n"),
            Err(FilesError::MissingFooter)
        ));
    }

    #[test]
    fn rankings_csv_has_fixed_header_and_ranks() {
        let rankings = vec![ModuleRanking {
            module: 2,
            entries: vec![
                RankedNode {
                    node: Node::keyword("parsimony"),
                    score: 0.5,
                },
                RankedNode {
                    node: Node::author("felsenstein j"),
                    score: 0.25,
                },
            ],
        }];
        let text = rankings_to_csv(&rankings);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "module,rank,kind,label,score");
        assert_eq!(lines[1], "2,1,keyword,parsimony,0.5");
        assert_eq!(lines[2], "2,2,author,felsenstein j,0.25");
    }
}
