//! GraphML ingestion and serialization, plus the CSV feature-table sidecar.
//!
//! Supported GraphML subset: `<graph>`, `<node id>`, `<edge source target>`,
//! `<key id attr.name attr.type>` with the types string, int, long, float,
//! double, and boolean, and `<data key>` under nodes. Edge direction is
//! ignored; duplicate undirected pairs collapse to one edge. Edge-level data
//! (e.g. weights) is ignored and reported in the load warnings.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{FeatureKind, FeatureMeta, FeatureTable, Graph};

/// Result of loading a GraphML document: the graph, the raw (pre-cleaning)
/// feature table, and any non-fatal load warnings.
#[derive(Debug, Clone)]
pub struct ParsedGraph {
    pub graph: Graph,
    pub features: FeatureTable,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
struct KeyDecl {
    name: String,
    domain: KeyDomain,
    ty: AttrType,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum KeyDomain {
    Node,
    Edge,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum AttrType {
    String,
    Boolean,
    Numeric,
}

fn pos_err(doc: &roxmltree::Document, node: roxmltree::Node, message: String) -> Error {
    let pos = doc.text_pos_at(node.range().start);
    Error::Parse {
        line: pos.row as usize,
        col: pos.col as usize,
        message,
    }
}

/// Parses a GraphML document into a graph and raw feature table.
///
/// String-typed node attributes become categorical features whose codes
/// follow first-appearance order; boolean attributes become binary features;
/// numeric attributes stay numeric. Missing `<data>` entries are recorded as
/// absent values.
pub fn parse_graphml(document: &str) -> Result<ParsedGraph> {
    let doc = roxmltree::Document::parse(document).map_err(|e| {
        let pos = e.pos();
        Error::Parse {
            line: pos.row as usize,
            col: pos.col as usize,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();

    let mut warnings = Vec::new();
    let mut keys: HashMap<String, KeyDecl> = HashMap::new();
    let mut node_key_order: Vec<String> = Vec::new();

    for key in root.children().filter(|c| c.has_tag_name("key")) {
        let id = key
            .attribute("id")
            .ok_or_else(|| pos_err(&doc, key, "<key> element without id".into()))?;
        let domain = match key.attribute("for") {
            Some("node") | None => KeyDomain::Node,
            Some("edge") => KeyDomain::Edge,
            Some(_) => KeyDomain::Other,
        };
        let ty = match key.attribute("attr.type") {
            Some("string") | None => AttrType::String,
            Some("boolean") => AttrType::Boolean,
            Some("int") | Some("long") | Some("float") | Some("double") => AttrType::Numeric,
            Some(other) => {
                return Err(pos_err(
                    &doc,
                    key,
                    format!("unsupported attr.type {other:?} on key {id:?}"),
                ))
            }
        };
        let name = key.attribute("attr.name").unwrap_or(id).to_string();
        if domain == KeyDomain::Node {
            node_key_order.push(id.to_string());
        }
        keys.insert(id.to_string(), KeyDecl { name, domain, ty });
    }

    let graph_el = root
        .children()
        .find(|c| c.has_tag_name("graph"))
        .ok_or_else(|| pos_err(&doc, root, "document has no <graph> element".into()))?;

    // First pass: node ids in document order.
    let mut node_ids: Vec<String> = Vec::new();
    let mut node_index: HashMap<String, usize> = HashMap::new();
    for node in graph_el.children().filter(|c| c.has_tag_name("node")) {
        let id = node
            .attribute("id")
            .ok_or_else(|| pos_err(&doc, node, "<node> element without id".into()))?;
        if node_index.insert(id.to_string(), node_ids.len()).is_some() {
            return Err(Error::Structure(format!("duplicate node id {id:?}")));
        }
        node_ids.push(id.to_string());
    }
    let n = node_ids.len();
    let feature_count = node_key_order.len();

    // Per-feature raw cells; string features accumulate labels lazily.
    let mut raw: Vec<Option<f64>> = vec![None; n * feature_count];
    let mut label_tables: Vec<Vec<String>> = vec![Vec::new(); feature_count];
    let key_slot: HashMap<&str, usize> = node_key_order
        .iter()
        .enumerate()
        .map(|(slot, id)| (id.as_str(), slot))
        .collect();

    for node in graph_el.children().filter(|c| c.has_tag_name("node")) {
        let id = node.attribute("id").expect("validated above");
        let row = node_index[id];
        for data in node.children().filter(|c| c.has_tag_name("data")) {
            let key_id = data
                .attribute("key")
                .ok_or_else(|| pos_err(&doc, data, "<data> element without key".into()))?;
            let Some(slot) = key_slot.get(key_id).copied() else {
                warnings.push(format!(
                    "node {id:?} references undeclared or non-node key {key_id:?}; ignored"
                ));
                continue;
            };
            let decl = &keys[&node_key_order[slot]];
            let text = data.text().unwrap_or("").trim();
            if text.is_empty() {
                continue; // absent value
            }
            let value = match decl.ty {
                AttrType::Boolean => match text {
                    "true" | "1" => Some(1.0),
                    "false" | "0" => Some(0.0),
                    other => {
                        return Err(pos_err(
                            &doc,
                            data,
                            format!("invalid boolean {other:?} for key {key_id:?}"),
                        ))
                    }
                },
                AttrType::Numeric => {
                    let parsed: f64 = text.parse().map_err(|_| {
                        pos_err(
                            &doc,
                            data,
                            format!("invalid number {text:?} for key {key_id:?}"),
                        )
                    })?;
                    if parsed.is_finite() {
                        Some(parsed)
                    } else {
                        warnings.push(format!(
                            "non-finite value {text:?} for key {key_id:?} on node {id:?}; treated as absent"
                        ));
                        None
                    }
                }
                AttrType::String => {
                    let labels = &mut label_tables[slot];
                    let code = match labels.iter().position(|l| l == text) {
                        Some(c) => c,
                        None => {
                            labels.push(text.to_string());
                            labels.len() - 1
                        }
                    };
                    Some(code as f64)
                }
            };
            raw[row * feature_count + slot] = value;
        }
    }

    // Edges: direction flattened, duplicates collapsed, self-loops skipped.
    let mut edge_pairs: Vec<(usize, usize)> = Vec::new();
    let mut warned_edge_data = false;
    for edge in graph_el.children().filter(|c| c.has_tag_name("edge")) {
        let source = edge
            .attribute("source")
            .ok_or_else(|| pos_err(&doc, edge, "<edge> element without source".into()))?;
        let target = edge
            .attribute("target")
            .ok_or_else(|| pos_err(&doc, edge, "<edge> element without target".into()))?;
        let a = *node_index.get(source).ok_or_else(|| {
            Error::Structure(format!("edge references undeclared node {source:?}"))
        })?;
        let b = *node_index.get(target).ok_or_else(|| {
            Error::Structure(format!("edge references undeclared node {target:?}"))
        })?;
        if a == b {
            warnings.push(format!("self-loop on node {source:?} skipped"));
            continue;
        }
        if !warned_edge_data && edge.children().any(|c| c.has_tag_name("data")) {
            warnings.push("edge-level data (e.g. weights) present; ignored".into());
            warned_edge_data = true;
        }
        edge_pairs.push((a, b));
    }

    let features: Vec<FeatureMeta> = node_key_order
        .iter()
        .enumerate()
        .map(|(slot, id)| {
            let decl = &keys[id];
            match decl.ty {
                AttrType::Numeric => FeatureMeta::numeric(&decl.name),
                AttrType::Boolean => FeatureMeta::binary(&decl.name),
                AttrType::String => {
                    FeatureMeta::categorical(&decl.name, label_tables[slot].clone())
                }
            }
        })
        .collect();

    if keys.values().any(|k| k.domain == KeyDomain::Edge) && !warned_edge_data {
        warnings.push("edge-level keys declared; edge data is ignored".into());
    }

    let graph = Graph::new(node_ids.clone(), &edge_pairs)?;
    let table = FeatureTable::new(node_ids, features, raw)?;
    Ok(ParsedGraph {
        graph,
        features: table,
        warnings,
    })
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

/// Serializes a graph and aligned feature table as GraphML. Parsing the
/// output reproduces both inputs when the table came from [`parse_graphml`].
pub fn write_graphml(graph: &Graph, table: &FeatureTable) -> Result<String> {
    crate::graph::ensure_aligned(graph, table)?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (f, meta) in table.features().iter().enumerate() {
        let ty = match meta.kind {
            FeatureKind::Numeric => "double",
            FeatureKind::Binary => "boolean",
            FeatureKind::Categorical => "string",
        };
        writeln!(
            out,
            "  <key id=\"d{f}\" for=\"node\" attr.name=\"{}\" attr.type=\"{ty}\"/>",
            xml_escape(&meta.name)
        )
        .expect("string write");
    }
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for (row, id) in graph.node_ids().iter().enumerate() {
        let cells: Vec<(usize, f64)> = (0..table.feature_count())
            .filter_map(|f| table.value(row, f).map(|v| (f, v)))
            .collect();
        if cells.is_empty() {
            writeln!(out, "    <node id=\"{}\"/>", xml_escape(id)).expect("string write");
            continue;
        }
        writeln!(out, "    <node id=\"{}\">", xml_escape(id)).expect("string write");
        for (f, v) in cells {
            let meta = &table.features()[f];
            let text = match meta.kind {
                FeatureKind::Numeric => format!("{v}"),
                FeatureKind::Binary => (if v != 0.0 { "true" } else { "false" }).to_string(),
                FeatureKind::Categorical => {
                    let labels = meta.labels.as_deref().unwrap_or(&[]);
                    let code = v as usize;
                    let label = labels.get(code).ok_or_else(|| {
                        Error::Contract(format!(
                            "categorical code {code} out of range for feature {:?}",
                            meta.name
                        ))
                    })?;
                    label.clone()
                }
            };
            writeln!(out, "      <data key=\"d{f}\">{}</data>", xml_escape(&text))
                .expect("string write");
        }
        out.push_str("    </node>\n");
    }
    for &(a, b) in graph.edges() {
        writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\"/>",
            xml_escape(graph.node_id(a)),
            xml_escape(graph.node_id(b))
        )
        .expect("string write");
    }
    out.push_str("  </graph>\n</graphml>\n");
    Ok(out)
}

/// Parses the CSV feature sidecar: header row holds feature names, the first
/// column holds node ids. Returns a table aligned to `graph` node order;
/// empty cells are absent values.
///
/// Column kinds are inferred: all-numeric columns are numeric (binary when
/// every value is 0/1), anything else is categorical.
pub fn load_feature_csv(graph: &Graph, csv_text: &str) -> Result<ParsedGraph> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::Contract("feature csv has no columns".into()));
    }
    let feature_names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let f = feature_names.len();
    let n = graph.node_count();
    let mut warnings = Vec::new();

    // Raw text cells aligned to graph rows.
    let mut cells: Vec<Option<String>> = vec![None; n * f];
    let mut seen = vec![false; n];
    for record in reader.records() {
        let record = record?;
        let id = record.get(0).unwrap_or("").trim();
        let Some(row) = graph.node_index(id) else {
            warnings.push(format!("csv row for unknown node {id:?} skipped"));
            continue;
        };
        if seen[row] {
            return Err(Error::Structure(format!(
                "duplicate csv row for node {id:?}"
            )));
        }
        seen[row] = true;
        for slot in 0..f {
            let text = record.get(slot + 1).unwrap_or("").trim();
            if !text.is_empty() {
                cells[row * f + slot] = Some(text.to_string());
            }
        }
    }
    for (row, was_seen) in seen.iter().enumerate() {
        if !was_seen {
            warnings.push(format!(
                "node {:?} has no csv row; all its feature values are absent",
                graph.node_id(row)
            ));
        }
    }

    let mut features = Vec::with_capacity(f);
    let mut values: Vec<Option<f64>> = vec![None; n * f];
    for slot in 0..f {
        let column: Vec<Option<&str>> = (0..n).map(|row| cells[row * f + slot].as_deref()).collect();
        let numeric: Vec<Option<f64>> = column
            .iter()
            .map(|c| c.and_then(|t| t.parse::<f64>().ok().filter(|v| v.is_finite())))
            .collect();
        let all_numeric = column
            .iter()
            .zip(&numeric)
            .all(|(c, v)| c.is_none() || v.is_some());
        if all_numeric {
            let binary = numeric
                .iter()
                .flatten()
                .all(|&v| v == 0.0 || v == 1.0);
            let kind = if binary {
                FeatureMeta::binary(&feature_names[slot])
            } else {
                FeatureMeta::numeric(&feature_names[slot])
            };
            features.push(kind);
            for row in 0..n {
                values[row * f + slot] = numeric[row];
            }
        } else {
            let mut labels: Vec<String> = Vec::new();
            for row in 0..n {
                if let Some(text) = column[row] {
                    let code = match labels.iter().position(|l| l == text) {
                        Some(c) => c,
                        None => {
                            labels.push(text.to_string());
                            labels.len() - 1
                        }
                    };
                    values[row * f + slot] = Some(code as f64);
                }
            }
            features.push(FeatureMeta::categorical(&feature_names[slot], labels));
        }
    }

    let table = FeatureTable::new(graph.node_ids().to_vec(), features, values)?;
    Ok(ParsedGraph {
        graph: graph.clone(),
        features: table,
        warnings,
    })
}

/// Appends sidecar columns to an existing table; feature name clashes error.
pub fn merge_features(base: &FeatureTable, extra: &FeatureTable) -> Result<FeatureTable> {
    if base.node_ids() != extra.node_ids() {
        return Err(Error::Contract(
            "cannot merge feature tables over different node sets".into(),
        ));
    }
    for meta in extra.features() {
        if base.feature_index(&meta.name).is_some() {
            return Err(Error::Structure(format!(
                "feature {:?} defined in both sources",
                meta.name
            )));
        }
    }
    let mut features = base.features().to_vec();
    features.extend_from_slice(extra.features());
    let mut values = Vec::with_capacity(base.node_count() * features.len());
    for row in 0..base.node_count() {
        for f in 0..base.feature_count() {
            values.push(base.value(row, f));
        }
        for f in 0..extra.feature_count() {
            values.push(extra.value(row, f));
        }
    }
    FeatureTable::new(base.node_ids().to_vec(), features, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="age" attr.type="double"/>
  <key id="d1" for="node" attr.name="sex" attr.type="string"/>
  <graph id="G" edgedefault="undirected">
    <node id="a"><data key="d0">1.5</data><data key="d1">M</data></node>
    <node id="b"><data key="d0">2.5</data><data key="d1">F</data></node>
    <node id="c"><data key="d1">M</data></node>
    <edge source="a" target="b"/>
    <edge source="b" target="c"/>
    <edge source="a" target="c"/>
  </graph>
</graphml>
"#;

    #[test]
    fn parses_triangle_with_features() {
        let parsed = parse_graphml(TRIANGLE).unwrap();
        assert_eq!(parsed.graph.node_count(), 3);
        assert_eq!(parsed.graph.edge_count(), 3);
        assert_eq!(parsed.features.feature_names(), vec!["age", "sex"]);
        assert_eq!(parsed.features.value(0, 0), Some(1.5));
        assert_eq!(parsed.features.value(2, 0), None); // absent
        // Labels in first-appearance order: M=0, F=1.
        assert_eq!(parsed.features.value(0, 1), Some(0.0));
        assert_eq!(parsed.features.value(1, 1), Some(1.0));
        assert_eq!(
            parsed.features.features()[1].labels,
            Some(vec!["M".to_string(), "F".to_string()])
        );
    }

    #[test]
    fn directed_duplicates_collapse() {
        let doc = r#"<graphml><graph edgedefault="directed">
            <node id="a"/><node id="b"/>
            <edge source="a" target="b"/>
            <edge source="b" target="a"/>
        </graph></graphml>"#;
        let parsed = parse_graphml(doc).unwrap();
        assert_eq!(parsed.graph.edge_count(), 1);
    }

    #[test]
    fn dangling_edge_is_structural_error() {
        let doc = r#"<graphml><graph>
            <node id="a"/><node id="b"/>
            <edge source="a" target="x"/>
        </graph></graphml>"#;
        assert!(matches!(
            parse_graphml(doc),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn malformed_document_reports_position() {
        let err = parse_graphml("<graphml><graph><node id='a'></graph>").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert!(line >= 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn self_loop_skipped_with_warning() {
        let doc = r#"<graphml><graph>
            <node id="a"/><node id="b"/>
            <edge source="a" target="a"/>
            <edge source="a" target="b"/>
        </graph></graphml>"#;
        let parsed = parse_graphml(doc).unwrap();
        assert_eq!(parsed.graph.edge_count(), 1);
        assert!(parsed.warnings.iter().any(|w| w.contains("self-loop")));
    }

    #[test]
    fn edge_weights_warn() {
        let doc = r#"<graphml>
            <key id="w" for="edge" attr.name="weight" attr.type="double"/>
            <graph>
            <node id="a"/><node id="b"/>
            <edge source="a" target="b"><data key="w">2.0</data></edge>
        </graph></graphml>"#;
        let parsed = parse_graphml(doc).unwrap();
        assert!(parsed.warnings.iter().any(|w| w.contains("ignored")));
    }

    #[test]
    fn round_trip_is_identity() {
        let parsed = parse_graphml(TRIANGLE).unwrap();
        let serialized = write_graphml(&parsed.graph, &parsed.features).unwrap();
        let reparsed = parse_graphml(&serialized).unwrap();
        assert_eq!(reparsed.graph, parsed.graph);
        assert_eq!(reparsed.features, parsed.features);
    }

    #[test]
    fn csv_sidecar_loads_aligned() {
        let g = Graph::from_id_pairs(
            vec!["a".into(), "b".into(), "c".into()],
            &[("a".into(), "b".into())],
        )
        .unwrap();
        let csv_text = "id,score,flag,group\nb,2.0,1,x\na,1.0,0,y\n";
        let parsed = load_feature_csv(&g, csv_text).unwrap();
        let ft = parsed.features;
        assert_eq!(ft.feature_names(), vec!["score", "flag", "group"]);
        assert_eq!(ft.features()[0].kind, FeatureKind::Numeric);
        assert_eq!(ft.features()[1].kind, FeatureKind::Binary);
        assert_eq!(ft.features()[2].kind, FeatureKind::Categorical);
        assert_eq!(ft.value(0, 0), Some(1.0)); // node a row
        assert_eq!(ft.value(1, 0), Some(2.0)); // node b row
        assert_eq!(ft.value(2, 0), None); // node c missing entirely
        assert!(parsed.warnings.iter().any(|w| w.contains("no csv row")));
    }
}
