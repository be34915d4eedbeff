//! GEXF 1.3 export for graph viewers, and a reader for the subset written.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use colmem_core::{Partition, TemporalGraph};
use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, Event};
use quick_xml::{Reader, Writer};

use crate::error::{Error, Result};

const NS: &str = "http://gexf.net/1.3";
const COMMUNITY_ATTR: &str = "community";

fn xml_err(e: impl std::fmt::Display) -> Error {
    Error::format("gexf", 0, e.to_string())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "gexf".into(),
        source: e,
    }
}

/// Undirected GEXF with node labels, edge weights, and a `community`
/// node attribute when `partition` is given.
pub fn export_gexf(
    graph: &TemporalGraph,
    partition: Option<&Partition>,
    out: impl Write,
) -> Result<()> {
    if let Some(p) = partition {
        if p.node_count() != graph.node_count() {
            return Err(colmem_core::Error::shape(
                format!("{} partition entries", graph.node_count()),
                p.node_count(),
            )
            .into());
        }
    }
    let mut w = Writer::new_with_indent(out, b' ', 2);
    w.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .map_err(io_err)?;
    w.write_event(Event::Start(
        BytesStart::new("gexf").with_attributes([("xmlns", NS), ("version", "1.3")]),
    ))
    .map_err(io_err)?;
    w.create_element("meta")
        .write_inner_content(|w| {
            w.create_element("creator")
                .write_text_content(quick_xml::events::BytesText::new("colmem"))?;
            Ok(())
        })
        .map_err(io_err)?;
    w.write_event(Event::Start(BytesStart::new("graph").with_attributes([
        ("mode", "static"),
        ("defaultedgetype", "undirected"),
    ])))
    .map_err(io_err)?;
    if partition.is_some() {
        w.create_element("attributes")
            .with_attributes([("class", "node")])
            .write_inner_content(|w| {
                w.create_element("attribute")
                    .with_attributes([("id", "0"), ("title", COMMUNITY_ATTR), ("type", "integer")])
                    .write_empty()?;
                Ok(())
            })
            .map_err(io_err)?;
    }
    w.write_event(Event::Start(BytesStart::new("nodes")))
        .map_err(io_err)?;
    for v in graph.node_ids() {
        let id = v.0.to_string();
        let node = w
            .create_element("node")
            .with_attributes([("id", id.as_str()), ("label", graph.label(v)?)]);
        match partition {
            Some(p) => {
                let c = p.assignment()[v.index()].to_string();
                node.write_inner_content(|w| {
                    w.create_element("attvalues").write_inner_content(|w| {
                        w.create_element("attvalue")
                            .with_attributes([("for", "0"), ("value", c.as_str())])
                            .write_empty()?;
                        Ok(())
                    })?;
                    Ok(())
                })
            }
            None => node.write_empty(),
        }
        .map_err(io_err)?;
    }
    w.write_event(Event::End(BytesEnd::new("nodes")))
        .map_err(io_err)?;
    w.write_event(Event::Start(BytesStart::new("edges")))
        .map_err(io_err)?;
    for (e, (&(a, b), &x)) in graph.edges().iter().zip(graph.weights()).enumerate() {
        // shortest representation that parses back to the same f64
        let (id, s, t, wt) = (
            e.to_string(),
            a.0.to_string(),
            b.0.to_string(),
            format!("{x:?}"),
        );
        w.create_element("edge")
            .with_attributes([
                ("id", id.as_str()),
                ("source", &s),
                ("target", &t),
                ("weight", &wt),
            ])
            .write_empty()
            .map_err(io_err)?;
    }
    w.write_event(Event::End(BytesEnd::new("edges")))
        .map_err(io_err)?;
    w.write_event(Event::End(BytesEnd::new("graph")))
        .map_err(io_err)?;
    w.write_event(Event::End(BytesEnd::new("gexf")))
        .map_err(io_err)?;
    w.into_inner().flush().map_err(io_err)
}

/// Graph content recovered from a GEXF file, in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GexfGraph {
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
    pub community: Vec<Option<u32>>,
}

fn attr(e: &BytesStart, name: &[u8]) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(xml_err)?;
        if a.key.as_ref() == name {
            return Ok(Some(a.unescape_value().map_err(xml_err)?.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &BytesStart, name: &str) -> Result<String> {
    attr(e, name.as_bytes())?.ok_or_else(|| {
        xml_err(format!(
            "<{}> without {name}",
            String::from_utf8_lossy(e.name().as_ref())
        ))
    })
}

pub fn parse_gexf(input: impl BufRead) -> Result<GexfGraph> {
    let mut r = Reader::from_reader(input);
    r.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut out = GexfGraph::default();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut community_attr: Option<String> = None;
    let mut raw_edges: Vec<(String, String, f64)> = Vec::new();
    let mut saw_root = false;
    loop {
        match r.read_event_into(&mut buf).map_err(xml_err)? {
            Event::Eof => break,
            Event::Start(e) | Event::Empty(e) => match e.name().as_ref() {
                b"gexf" => saw_root = true,
                b"attribute" => {
                    if attr(&e, b"title")?.as_deref() == Some(COMMUNITY_ATTR) {
                        community_attr = Some(required(&e, "id")?);
                    }
                }
                b"node" => {
                    let id = required(&e, "id")?;
                    let label = attr(&e, b"label")?.unwrap_or_else(|| id.clone());
                    if ids.insert(id.clone(), out.labels.len()).is_some() {
                        return Err(xml_err(format!("duplicate node id {id}")));
                    }
                    out.labels.push(label);
                    out.community.push(None);
                }
                b"attvalue" => {
                    let node = out
                        .labels
                        .len()
                        .checked_sub(1)
                        .ok_or_else(|| xml_err("attvalue outside a node"))?;
                    if attr(&e, b"for")? == community_attr {
                        let v = required(&e, "value")?;
                        out.community[node] =
                            Some(v.parse().map_err(|_| xml_err(format!("community {v:?}")))?);
                    }
                }
                b"edge" => {
                    let w = match attr(&e, b"weight")? {
                        Some(w) => w.parse().map_err(|_| xml_err(format!("weight {w:?}")))?,
                        None => 1.0,
                    };
                    raw_edges.push((required(&e, "source")?, required(&e, "target")?, w));
                }
                _ => {}
            },
            _ => {}
        }
        buf.clear();
    }
    if !saw_root {
        return Err(xml_err("no <gexf> root element"));
    }
    for (s, t, w) in raw_edges {
        let find = |k: &str| {
            ids.get(k)
                .copied()
                .ok_or_else(|| xml_err(format!("edge endpoint {k} is not a node")))
        };
        out.edges.push((find(&s)?, find(&t)?, w));
    }
    Ok(out)
}
