//! Graph serialization: GraphML (read/write), DOT and edge-list CSV (write).
//!
//! GraphML is the interchange format: node attributes `kind`, `label` and
//! optionally `community`, edge attributes `layer`, `raw_weight`, `weight`,
//! with per-edge directedness. Floats are printed in Rust's shortest
//! round-trip form, so re-importing an exported file reproduces the net
//! bit-identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

use crate::community::ModulePartition;
use crate::layers::{LayerTag, Node, NodeKind};
use crate::multinet::{MultiEdge, MultiNet};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed graphml: {0}")]
    Xml(String),
    #[error("graphml violates the net schema: {0}")]
    Schema(String),
    #[error("unknown export format `{0}` (expected graphml, dot, or csv)")]
    UnknownFormat(String),
}

/// Supported serialization formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    GraphMl,
    Dot,
    EdgeListCsv,
}

impl FromStr for GraphFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graphml" => Ok(GraphFormat::GraphMl),
            "dot" => Ok(GraphFormat::Dot),
            "csv" => Ok(GraphFormat::EdgeListCsv),
            other => Err(ExportError::UnknownFormat(other.to_string())),
        }
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Serializes a net as GraphML; when a partition is given, nodes carry their
/// community index.
pub fn to_graphml(net: &MultiNet, partition: Option<&ModulePartition>) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    if partition.is_some() {
        out.push_str(
            "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"long\"/>\n",
        );
    }
    out.push_str("  <key id=\"layer\" for=\"edge\" attr.name=\"layer\" attr.type=\"string\"/>\n");
    out.push_str(
        "  <key id=\"raw_weight\" for=\"edge\" attr.name=\"raw_weight\" attr.type=\"double\"/>\n",
    );
    out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    out.push_str("  <graph id=\"G\" edgedefault=\"directed\">\n");

    let ids: BTreeMap<&Node, usize> = net.nodes().iter().enumerate().map(|(i, n)| (n, i)).collect();
    for (node, id) in &ids {
        let _ = writeln!(out, "    <node id=\"n{id}\">");
        let _ = writeln!(out, "      <data key=\"kind\">{}</data>", node.kind.as_str());
        let _ = writeln!(
            out,
            "      <data key=\"label\">{}</data>",
            xml_escape(&node.label)
        );
        if let Some(p) = partition {
            if let Some(community) = p.community_of(node) {
                let _ = writeln!(out, "      <data key=\"community\">{community}</data>");
            }
        }
        out.push_str("    </node>\n");
    }
    for e in net.edges() {
        let _ = writeln!(
            out,
            "    <edge source=\"n{}\" target=\"n{}\" directed=\"{}\">",
            ids[&e.source], ids[&e.target], e.directed
        );
        let _ = writeln!(out, "      <data key=\"layer\">{}</data>", e.layer.as_str());
        let _ = writeln!(out, "      <data key=\"raw_weight\">{}</data>", e.raw_weight);
        let _ = writeln!(out, "      <data key=\"weight\">{}</data>", e.weight);
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

#[derive(Default)]
struct PendingNode {
    xml_id: String,
    kind: Option<NodeKind>,
    label: Option<String>,
}

#[derive(Default)]
struct PendingEdge {
    source: String,
    target: String,
    directed: bool,
    layer: Option<LayerTag>,
    raw_weight: Option<f64>,
    weight: Option<f64>,
}

/// Parses GraphML written by [`to_graphml`] back into a net. Edge order
/// follows the file; community attributes are ignored (they live in the
/// partition file).
pub fn from_graphml(text: &str) -> Result<MultiNet, ExportError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut nodes: BTreeMap<String, Node> = BTreeMap::new();
    let mut edges: Vec<PendingEdge> = Vec::new();
    let mut node: Option<PendingNode> = None;
    let mut edge: Option<PendingEdge> = None;
    let mut data_key: Option<String> = None;

    loop {
        match reader.read_event() {
            Err(e) => return Err(ExportError::Xml(e.to_string())),
            Ok(Event::Eof) => break,
            Ok(Event::Start(start)) => match start.name().as_ref() {
                b"node" => {
                    let xml_id = get_attr(&start, b"id")?
                        .ok_or_else(|| ExportError::Schema("node without id".into()))?;
                    node = Some(PendingNode {
                        xml_id,
                        ..PendingNode::default()
                    });
                }
                b"edge" => {
                    let source = get_attr(&start, b"source")?
                        .ok_or_else(|| ExportError::Schema("edge without source".into()))?;
                    let target = get_attr(&start, b"target")?
                        .ok_or_else(|| ExportError::Schema("edge without target".into()))?;
                    let directed = match get_attr(&start, b"directed")?.as_deref() {
                        Some("true") | None => true,
                        Some("false") => false,
                        Some(other) => {
                            return Err(ExportError::Schema(format!(
                                "unrecognized edge directedness `{other}`"
                            )))
                        }
                    };
                    edge = Some(PendingEdge {
                        source,
                        target,
                        directed,
                        ..PendingEdge::default()
                    });
                }
                b"data" => {
                    data_key = get_attr(&start, b"key")?;
                }
                _ => {}
            },
            // Self-closing elements (the <key/> declarations) carry no data.
            Ok(Event::Empty(_)) => {}
            Ok(Event::Text(text)) => {
                let value = text
                    .unescape()
                    .map_err(|e| ExportError::Xml(e.to_string()))?
                    .into_owned();
                let Some(key) = data_key.as_deref() else {
                    continue;
                };
                if let Some(n) = node.as_mut() {
                    match key {
                        "kind" => {
                            n.kind = Some(NodeKind::parse(&value).ok_or_else(|| {
                                ExportError::Schema(format!("unknown node kind `{value}`"))
                            })?)
                        }
                        "label" => n.label = Some(value),
                        _ => {}
                    }
                } else if let Some(e) = edge.as_mut() {
                    match key {
                        "layer" => {
                            e.layer = Some(LayerTag::parse(&value).ok_or_else(|| {
                                ExportError::Schema(format!("unknown layer `{value}`"))
                            })?)
                        }
                        "raw_weight" => e.raw_weight = Some(parse_f64(&value)?),
                        "weight" => e.weight = Some(parse_f64(&value)?),
                        _ => {}
                    }
                }
            }
            Ok(Event::End(end)) => match end.name().as_ref() {
                b"node" => {
                    let n = node
                        .take()
                        .ok_or_else(|| ExportError::Xml("stray </node>".into()))?;
                    let kind = n
                        .kind
                        .ok_or_else(|| ExportError::Schema(format!("node {} lacks kind", n.xml_id)))?;
                    let label = n.label.ok_or_else(|| {
                        ExportError::Schema(format!("node {} lacks label", n.xml_id))
                    })?;
                    nodes.insert(n.xml_id, Node { kind, label });
                }
                b"edge" => {
                    edges.push(
                        edge.take()
                            .ok_or_else(|| ExportError::Xml("stray </edge>".into()))?,
                    );
                }
                b"data" => data_key = None,
                _ => {}
            },
            Ok(_) => {}
        }
    }

    let mut resolved = Vec::with_capacity(edges.len());
    for e in edges {
        let source = nodes
            .get(&e.source)
            .ok_or_else(|| ExportError::Schema(format!("edge references unknown node {}", e.source)))?
            .clone();
        let target = nodes
            .get(&e.target)
            .ok_or_else(|| ExportError::Schema(format!("edge references unknown node {}", e.target)))?
            .clone();
        let layer = e
            .layer
            .ok_or_else(|| ExportError::Schema("edge lacks layer".into()))?;
        let raw_weight = e
            .raw_weight
            .ok_or_else(|| ExportError::Schema("edge lacks raw_weight".into()))?;
        let weight = e
            .weight
            .ok_or_else(|| ExportError::Schema("edge lacks weight".into()))?;
        resolved.push(MultiEdge {
            source,
            target,
            layer,
            raw_weight,
            weight,
            directed: e.directed,
        });
    }
    MultiNet::from_parts(nodes.into_values().collect(), resolved)
        .map_err(|e| ExportError::Schema(e.to_string()))
}

fn get_attr(
    start: &quick_xml::events::BytesStart<'_>,
    key: &[u8],
) -> Result<Option<String>, ExportError> {
    for attr in start.attributes() {
        let attr = attr.map_err(|e| ExportError::Xml(e.to_string()))?;
        if attr.key.as_ref() == key {
            let value = attr
                .unescape_value()
                .map_err(|e| ExportError::Xml(e.to_string()))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn parse_f64(s: &str) -> Result<f64, ExportError> {
    s.parse()
        .map_err(|_| ExportError::Schema(format!("invalid float `{s}`")))
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Serializes a net in Graphviz DOT form; undirected edges are rendered with
/// `dir=none`.
pub fn to_dot(net: &MultiNet, partition: Option<&ModulePartition>) -> String {
    let mut out = String::from("digraph scimap {\n");
    let ids: BTreeMap<&Node, usize> = net.nodes().iter().enumerate().map(|(i, n)| (n, i)).collect();
    for (node, id) in &ids {
        let community = partition
            .and_then(|p| p.community_of(node))
            .map(|c| format!(", community={c}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "  n{id} [label=\"{}\", kind={}{community}];",
            dot_escape(&node.label),
            node.kind.as_str()
        );
    }
    for e in net.edges() {
        let arrow = if e.directed { "" } else { ", dir=none" };
        let _ = writeln!(
            out,
            "  n{} -> n{} [layer={}, weight={}{arrow}];",
            ids[&e.source],
            ids[&e.target],
            e.layer.as_str(),
            e.weight
        );
    }
    out.push_str("}\n");
    out
}

/// Serializes the edge list as CSV with a fixed header. Isolated nodes do
/// not appear; GraphML is the lossless format.
pub fn to_edge_list_csv(net: &MultiNet) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "source_kind",
            "source_label",
            "target_kind",
            "target_label",
            "layer",
            "raw_weight",
            "weight",
            "directed",
        ])
        .expect("in-memory csv");
    for e in net.edges() {
        writer
            .write_record([
                e.source.kind.as_str(),
                e.source.label.as_str(),
                e.target.kind.as_str(),
                e.target.label.as_str(),
                e.layer.as_str(),
                &e.raw_weight.to_string(),
                &e.weight.to_string(),
                if e.directed { "true" } else { "false" },
            ])
            .expect("in-memory csv");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

/// Writes a net to `path` in the requested format.
pub fn export_graph(
    net: &MultiNet,
    format: GraphFormat,
    path: impl AsRef<Path>,
    partition: Option<&ModulePartition>,
) -> Result<(), ExportError> {
    let path = path.as_ref();
    let content = match format {
        GraphFormat::GraphMl => to_graphml(net, partition),
        GraphFormat::Dot => to_dot(net, partition),
        GraphFormat::EdgeListCsv => to_edge_list_csv(net),
    };
    std::fs::write(path, content).map_err(|source| ExportError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a GraphML file exported by this module.
pub fn import_graphml_file(path: impl AsRef<Path>) -> Result<MultiNet, ExportError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ExportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_graphml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::Layer;
    use crate::multinet::{normalize, unify};

    fn sample_net() -> MultiNet {
        let ac = Layer::from_edges(
            LayerTag::AuthorCitation,
            [
                (Node::author("smith, j"), Node::author("doe & roe"), 2.0),
                (Node::author("doe & roe"), Node::author("smith, j"), 1.0),
            ],
        )
        .unwrap();
        let kc = Layer::from_edges(
            LayerTag::KeywordCitation,
            [(
                Node::keyword("species <concept>"),
                Node::keyword("speciation"),
                3.0,
            )],
        )
        .unwrap();
        let ak = Layer::from_edges(
            LayerTag::AuthorKeyword,
            [(Node::author("smith, j"), Node::keyword("speciation"), 1.0)],
        )
        .unwrap();
        normalize(unify(&ac, &kc, &ak).unwrap())
    }

    #[test]
    fn graphml_round_trips_bit_identically() {
        let net = sample_net();
        let xml = to_graphml(&net, None);
        let back = from_graphml(&xml).unwrap();
        assert_eq!(back, net);
        // And the re-export is byte-identical.
        assert_eq!(to_graphml(&back, None), xml);
    }

    #[test]
    fn empty_net_exports_a_valid_file() {
        let net = MultiNet::default();
        let xml = to_graphml(&net, None);
        let back = from_graphml(&xml).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn edge_counts_survive_export() {
        let net = sample_net();
        let xml = to_graphml(&net, None);
        assert_eq!(xml.matches("<edge ").count(), net.edge_count());
        let csv_text = to_edge_list_csv(&net);
        assert_eq!(csv_text.lines().count(), net.edge_count() + 1);
    }

    #[test]
    fn special_characters_are_escaped() {
        let net = sample_net();
        let xml = to_graphml(&net, None);
        assert!(xml.contains("species &lt;concept&gt;"));
        assert!(!xml.contains("species <concept>"));
        let back = from_graphml(&xml).unwrap();
        assert!(back.nodes().contains(&Node::keyword("species <concept>")));
    }

    #[test]
    fn dot_marks_undirected_edges() {
        let net = sample_net();
        let dot = to_dot(&net, None);
        assert!(dot.contains("dir=none"));
        assert!(dot.starts_with("digraph"));
    }

    #[test]
    fn unknown_format_string_errors() {
        assert!(GraphFormat::from_str("gexf").is_err());
        assert_eq!(GraphFormat::from_str("dot").unwrap(), GraphFormat::Dot);
    }

    #[test]
    fn malformed_graphml_is_reported() {
        assert!(from_graphml("<graphml><graph><node id=\"n0\"></graph>").is_err());
        let missing_label = r#"<?xml version="1.0"?><graphml><graph>
            <node id="n0"><data key="kind">author</data></node>
            </graph></graphml>"#;
        assert!(matches!(
            from_graphml(missing_label),
            Err(ExportError::Schema(_))
        ));
    }
}
