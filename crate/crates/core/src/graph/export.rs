use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{Graph, GraphError, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(Self::GraphMl),
            "dot" | "gv" => Ok(Self::Dot),
            other => Err(GraphError::Parameter(format!("unknown export format {other:?}"))),
        }
    }
}

pub fn export_graph(g: &Graph, format: ExportFormat) -> String {
    match format {
        ExportFormat::GraphMl => to_graphml(g),
        ExportFormat::Dot => to_dot(g),
    }
}

/// Reads back a document produced by [`export_graph`].
pub fn import_graph(doc: &str, format: ExportFormat) -> Result<Graph, GraphError> {
    match format {
        ExportFormat::GraphMl => from_graphml(doc),
        ExportFormat::Dot => from_dot(doc),
    }
}

fn to_graphml(g: &Graph) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for u in 0..g.node_count() {
        match g.labels() {
            Some(labels) => {
                let _ = writeln!(
                    s,
                    "    <node id=\"n{u}\"><data key=\"label\">{}</data></node>",
                    quick_xml::escape::escape(labels[u].as_str())
                );
            }
            None => {
                let _ = writeln!(s, "    <node id=\"n{u}\"/>");
            }
        }
    }
    for (u, v) in g.edges() {
        let _ = writeln!(s, "    <edge source=\"n{u}\" target=\"n{v}\"/>");
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn graphml_err(message: impl Into<String>) -> GraphError {
    GraphError::Document { format: "GraphML", message: message.into() }
}

fn from_graphml(doc: &str) -> Result<Graph, GraphError> {
    let mut reader = Reader::from_str(doc);
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut edges = Vec::new();
    let mut in_label: Option<NodeId> = None;
    let mut current_node: Option<NodeId> = None;

    loop {
        let event = reader.read_event().map_err(|e| graphml_err(e.to_string()))?;
        match event {
            Event::Start(e) | Event::Empty(e) => {
                let attr = |name: &[u8]| -> Result<Option<String>, GraphError> {
                    for a in e.attributes() {
                        let a = a.map_err(|err| graphml_err(err.to_string()))?;
                        if a.key.as_ref() == name {
                            let v = a.unescape_value().map_err(|err| graphml_err(err.to_string()))?;
                            return Ok(Some(v.into_owned()));
                        }
                    }
                    Ok(None)
                };
                match e.name().as_ref() {
                    b"node" => {
                        let id = attr(b"id")?.ok_or_else(|| graphml_err("node without id"))?;
                        let idx = labels.len();
                        if ids.insert(id.clone(), idx).is_some() {
                            return Err(graphml_err(format!("duplicate node id {id:?}")));
                        }
                        labels.push(None);
                        current_node = Some(idx);
                    }
                    b"edge" => {
                        let s = attr(b"source")?.ok_or_else(|| graphml_err("edge without source"))?;
                        let t = attr(b"target")?.ok_or_else(|| graphml_err("edge without target"))?;
                        edges.push((s, t));
                    }
                    b"data" if attr(b"key")?.as_deref() == Some("label") => {
                        in_label = current_node;
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                if let Some(idx) = in_label {
                    let text = t.unescape().map_err(|e| graphml_err(e.to_string()))?;
                    labels[idx].get_or_insert_with(String::new).push_str(&text);
                }
            }
            Event::End(e) => match e.name().as_ref() {
                b"data" => in_label = None,
                b"node" => current_node = None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    let resolve = |id: &str| ids.get(id).copied().ok_or_else(|| graphml_err(format!("unknown node {id:?}")));
    let pairs = edges.iter().map(|(s, t)| Ok((resolve(s)?, resolve(t)?))).collect::<Result<Vec<_>, GraphError>>()?;
    let g = Graph::from_edges(labels.len(), pairs)?;
    attach_labels(g, labels)
}

fn attach_labels(g: Graph, labels: Vec<Option<String>>) -> Result<Graph, GraphError> {
    if !labels.is_empty() && labels.iter().all(Option::is_some) {
        g.with_labels(labels.into_iter().map(Option::unwrap_or_default).collect())
    } else {
        Ok(g)
    }
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn to_dot(g: &Graph) -> String {
    let mut s = String::from("graph G {\n");
    for u in 0..g.node_count() {
        match g.labels() {
            Some(labels) => {
                let _ = writeln!(s, "  {u} [label={}];", dot_quote(&labels[u]));
            }
            None => {
                let _ = writeln!(s, "  {u};");
            }
        }
    }
    for (u, v) in g.edges() {
        let _ = writeln!(s, "  {u} -- {v};");
    }
    s.push_str("}\n");
    s
}

fn dot_unquote(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                'n' => out.push('\n'),
                other => out.push(other),
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

fn from_dot(doc: &str) -> Result<Graph, GraphError> {
    let err = |line: usize, message: &str| GraphError::Parse { line, message: message.to_string() };
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut edges = Vec::new();
    let mut opened = false;
    for (i, raw) in doc.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        if !opened {
            if line.starts_with("graph") && line.ends_with('{') {
                opened = true;
                continue;
            }
            return Err(err(line_no, "expected `graph <name> {`"));
        }
        if line == "}" {
            break;
        }
        let stmt = line.strip_suffix(';').ok_or_else(|| err(line_no, "statement must end with `;`"))?;
        let parse_id = |tok: &str| tok.trim().parse::<NodeId>().map_err(|_| err(line_no, "bad node id"));
        if let Some((a, b)) = stmt.split_once("--") {
            edges.push((parse_id(a)?, parse_id(b)?));
            continue;
        }
        let (id, label) = match stmt.split_once('[') {
            Some((id, rest)) => {
                let attrs = rest.trim().strip_suffix(']').ok_or_else(|| err(line_no, "unclosed `[`"))?;
                let value = attrs
                    .trim()
                    .strip_prefix("label")
                    .and_then(|r| r.trim_start().strip_prefix('='))
                    .ok_or_else(|| err(line_no, "only `label` attributes are supported"))?;
                let label = dot_unquote(value.trim()).ok_or_else(|| err(line_no, "bad label string"))?;
                (parse_id(id)?, Some(label))
            }
            None => (parse_id(stmt)?, None),
        };
        if id != labels.len() {
            return Err(err(line_no, "node ids must be declared in order 0, 1, 2, ..."));
        }
        labels.push(label);
    }
    let g = Graph::from_edges(labels.len(), edges)?;
    attach_labels(g, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixtures::complete, gen_erdos_renyi};

    fn labeled_triangle() -> Graph {
        complete(3).with_labels(vec!["Leo".into(), "Olivia".into(), "Mia".into()]).unwrap()
    }

    #[test]
    fn graphml_counts_entries() {
        let doc = export_graph(&labeled_triangle(), ExportFormat::GraphMl);
        assert_eq!(doc.matches("<node ").count(), 3);
        assert_eq!(doc.matches("<edge ").count(), 3);
        assert!(doc.contains(">Olivia</data>"));
    }

    #[test]
    fn dot_counts_entries() {
        let doc = export_graph(&labeled_triangle(), ExportFormat::Dot);
        assert_eq!(doc.matches("[label=").count(), 3);
        assert_eq!(doc.matches(" -- ").count(), 3);
    }

    #[test]
    fn round_trips_keep_labels_and_edges() {
        for fmt in [ExportFormat::GraphMl, ExportFormat::Dot] {
            let g = labeled_triangle();
            assert_eq!(import_graph(&export_graph(&g, fmt), fmt).unwrap(), g);
            let er = gen_erdos_renyi(100, 0.08, 5).unwrap();
            let back = import_graph(&export_graph(&er, fmt), fmt).unwrap();
            assert_eq!(back.edge_set(), er.edge_set());
            assert_eq!(back.node_count(), 100);
        }
    }

    #[test]
    fn awkward_labels_survive() {
        let g = complete(2).with_labels(vec!["A <&> \"B\"".into(), "back\\slash".into()]).unwrap();
        for fmt in [ExportFormat::GraphMl, ExportFormat::Dot] {
            assert_eq!(import_graph(&export_graph(&g, fmt), fmt).unwrap(), g);
        }
    }

    #[test]
    fn unknown_format_is_a_parameter_error() {
        assert!(matches!("gexf".parse::<ExportFormat>(), Err(GraphError::Parameter(_))));
        assert_eq!("GraphML".parse::<ExportFormat>().unwrap(), ExportFormat::GraphMl);
    }
}
