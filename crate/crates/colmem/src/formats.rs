//! CSV and TSV artifacts exchanged between subcommands.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use colmem_core::hopfield::Pattern;
use colmem_core::synth::GroundTruth;
use colmem_core::{HourStamp, IdMapping, NodeId, Partition, TemporalGraph};

use crate::error::{Error, Result};
use crate::ingest::format_hour;

fn csv_err(what: &'static str) -> impl Fn(csv::Error) -> Error {
    move |e| {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: what.into(),
                source,
            },
            other => Error::format(what, line, format!("{other:?}")),
        }
    }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub fn create(path: impl AsRef<Path>) -> Result<BufWriter<File>> {
    let path = path.as_ref();
    File::create(path)
        .map(BufWriter::new)
        .map_err(Error::io(path))
}

pub fn open(path: impl AsRef<Path>) -> Result<BufReader<File>> {
    let path = path.as_ref();
    File::open(path)
        .map(BufReader::new)
        .map_err(Error::io(path))
}

/// Header of node labels; one row per hour, cells `1` or `-1`.
pub fn write_pattern(p: &Pattern, labels: &[String], out: impl Write) -> Result<()> {
    if labels.len() != p.node_count() {
        return Err(
            colmem_core::Error::shape(format!("{} labels", p.node_count()), labels.len()).into(),
        );
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(labels).map_err(csv_err("pattern"))?;
    let mut row = Vec::with_capacity(p.node_count());
    for t in 0..p.hours() {
        row.clear();
        row.extend((0..p.node_count()).map(|i| if p.is_active(i, t) { "1" } else { "-1" }));
        w.write_record(&row).map_err(csv_err("pattern"))?;
    }
    w.flush().map_err(Error::io("pattern"))
}

/// Reads a pattern and returns its column labels with it.
pub fn read_pattern(input: impl Read, start: HourStamp) -> Result<(Vec<String>, Pattern)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(input);
    let mut records = r.records();
    let header = match records.next() {
        Some(h) => h.map_err(csv_err("pattern"))?,
        None => return Err(Error::format("pattern", 1, "missing label header")),
    };
    let labels: Vec<String> = header.iter().map(str::to_owned).collect();
    let mut seen = HashSet::new();
    if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
        return Err(Error::format(
            "pattern",
            1,
            format!("duplicate label {dup:?}"),
        ));
    }
    let n = labels.len();
    let mut columns: Vec<i8> = Vec::new();
    let mut hours = 0;
    for rec in records {
        let rec = rec.map_err(csv_err("pattern"))?;
        for cell in rec.iter() {
            columns.push(match cell.trim() {
                "1" | "+1" => 1,
                "-1" => -1,
                other => {
                    return Err(Error::format(
                        "pattern",
                        line_of(&rec),
                        format!("cell {other:?} is not ±1"),
                    ))
                }
            });
        }
        hours += 1;
    }
    // rows are hours in the file, nodes in memory
    let mut cells = vec![-1i8; n * hours];
    for t in 0..hours {
        for i in 0..n {
            cells[i * hours + t] = columns[t * n + i];
        }
    }
    Ok((labels, Pattern::from_cells(n, hours, start, cells)?))
}

/// Reorders pattern rows to follow `graph`'s node order. Every graph label
/// must be present; extra pattern labels are ignored.
pub fn align_pattern(labels: &[String], p: &Pattern, graph: &TemporalGraph) -> Result<Pattern> {
    let at: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let rows = graph
        .labels()
        .iter()
        .map(|l| {
            at.get(l.as_str()).copied().ok_or_else(|| {
                Error::from(colmem_core::Error::shape(
                    "pattern column for every graph node",
                    format!("no column {l:?}"),
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(p.select_rows(&rows)?)
}

/// `label,community_id` rows in node order.
pub fn write_partition(
    graph: &TemporalGraph,
    partition: &Partition,
    out: impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "community_id"])
        .map_err(csv_err("partition"))?;
    for (l, c) in graph.labels().iter().zip(partition.assignment()) {
        w.write_record([l.as_str(), &c.to_string()])
            .map_err(csv_err("partition"))?;
    }
    w.flush().map_err(Error::io("partition"))
}

pub fn read_partition(input: impl Read) -> Result<Vec<(String, u32)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err("partition"))?;
        let c = rec
            .get(1)
            .and_then(|c| c.trim().parse().ok())
            .filter(|_| rec.len() == 2)
            .ok_or_else(|| {
                Error::format("partition", line_of(&rec), "expected label,community_id")
            })?;
        out.push((rec[0].to_owned(), c));
    }
    Ok(out)
}

/// Partition over `graph`'s nodes from labelled rows; every node needs a row.
pub fn partition_for(
    graph: &TemporalGraph,
    rows: &[(String, u32)],
    resolution: f64,
) -> Result<Partition> {
    let by_label: BTreeMap<&str, u32> = rows.iter().map(|(l, c)| (l.as_str(), *c)).collect();
    let labels = graph
        .labels()
        .iter()
        .map(|l| {
            by_label
                .get(l.as_str())
                .copied()
                .ok_or_else(|| Error::Config(format!("no community for {l:?}")))
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(Partition::from_labels(&labels, resolution))
}

/// One `label` per row under a `label` header.
pub fn write_cluster(labels: &[&str], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label"]).map_err(csv_err("cluster"))?;
    for l in labels {
        w.write_record([l]).map_err(csv_err("cluster"))?;
    }
    w.flush().map_err(Error::io("cluster"))
}

/// Cluster member labels. A `label` header is optional; any further
/// columns are ignored so a partition CSV filtered to one community works.
pub fn read_cluster(input: impl Read) -> Result<Vec<String>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err("cluster"))?;
        let l = rec.get(0).unwrap_or("").trim();
        if (k == 0 && l == "label") || l.is_empty() {
            continue;
        }
        out.push(l.to_owned());
    }
    Ok(out)
}

/// Node ids for `labels` in `graph`.
pub fn resolve(graph: &TemporalGraph, labels: &[String]) -> Result<Vec<NodeId>> {
    labels
        .iter()
        .map(|l| {
            graph
                .node_id(l)
                .ok_or_else(|| colmem_core::Error::LabelNotFound(l.clone()).into())
        })
        .collect()
}

/// `label,cluster,event_start,event_end`; the last three are empty for
/// background nodes. Event hours are offsets from the graph start.
pub fn write_truth(graph: &TemporalGraph, truth: &GroundTruth, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "cluster", "event_start", "event_end"])
        .map_err(csv_err("truth"))?;
    for (l, m) in graph.labels().iter().zip(&truth.membership) {
        let rec = match m {
            Some(c) => {
                let e = truth.events[*c as usize];
                [
                    l.clone(),
                    c.to_string(),
                    e.start_hour().to_string(),
                    e.end_hour().to_string(),
                ]
            }
            None => [l.clone(), String::new(), String::new(), String::new()],
        };
        w.write_record(&rec).map_err(csv_err("truth"))?;
    }
    w.flush().map_err(Error::io("truth"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthRow {
    pub label: String,
    pub cluster: Option<u32>,
    pub event: Option<(usize, usize)>,
}

pub fn read_truth(input: impl Read) -> Result<Vec<TruthRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err("truth"))?;
        let bad = || {
            Error::format(
                "truth",
                line_of(&rec),
                "expected label,cluster,event_start,event_end",
            )
        };
        if rec.len() != 4 {
            return Err(bad());
        }
        let opt = |s: &str| -> Result<Option<usize>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad())
            }
        };
        let cluster = opt(&rec[1])?.map(|c| c as u32);
        let event = match (opt(&rec[2])?, opt(&rec[3])?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(bad()),
        };
        out.push(TruthRow {
            label: rec[0].to_owned(),
            cluster,
            event,
        });
    }
    Ok(out)
}

/// `new_id,old_id,label` for every surviving node.
pub fn write_mapping(after: &TemporalGraph, map: &IdMapping, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["new_id", "old_id", "label"])
        .map_err(csv_err("mapping"))?;
    for v in after.node_ids() {
        let old = map.old_id(v).expect("mapping covers the re-indexed graph");
        w.write_record([
            v.0.to_string(),
            old.0.to_string(),
            after.label(v)?.to_owned(),
        ])
        .map_err(csv_err("mapping"))?;
    }
    w.flush().map_err(Error::io("mapping"))
}

/// Edges as `src<TAB>dst` lines, lower id first.
pub fn write_edges(graph: &TemporalGraph, mut out: impl Write) -> Result<()> {
    for &(a, b) in graph.edges() {
        writeln!(out, "{}\t{}", graph.label(a)?, graph.label(b)?).map_err(Error::io("edges"))?;
    }
    out.flush().map_err(Error::io("edges"))
}

/// Nonzero visit counts as `label,iso8601_hour,count` rows.
pub fn write_visits(graph: &TemporalGraph, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "iso8601_hour", "count"])
        .map_err(csv_err("visits"))?;
    for v in graph.node_ids() {
        for (t, &x) in graph.series(v)?.iter().enumerate() {
            if x > 0 {
                let at = format_hour(graph.start().offset(t as i64));
                w.write_record([graph.label(v)?, &at, &x.to_string()])
                    .map_err(csv_err("visits"))?;
            }
        }
    }
    w.flush().map_err(Error::io("visits"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{build_graph, parse_edges, parse_visits, Grid};
    use colmem_core::synth::{generate, SynthConfig};
    use std::io::BufRead;

    fn first_line(input: impl BufRead) -> Option<String> {
        input.lines().next()?.ok()
    }

    #[test]
    fn pattern_round_trip() {
        let mut p = Pattern::inactive(3, 4, HourStamp(9));
        p.set(0, 1, true);
        p.set(2, 3, true);
        let labels: Vec<String> = ["a", "b, with comma", "c"].map(String::from).to_vec();
        let mut buf = Vec::new();
        write_pattern(&p, &labels, &mut buf).unwrap();
        assert_eq!(first_line(&buf[..]).unwrap(), "a,\"b, with comma\",c");
        let (l2, p2) = read_pattern(&buf[..], HourStamp(9)).unwrap();
        assert_eq!((l2, p2), (labels, p));
    }

    #[test]
    fn pattern_rejects_bad_cells() {
        assert!(matches!(
            read_pattern("a,b\n1,0\n".as_bytes(), HourStamp(0)),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(read_pattern("a,a\n1,1\n".as_bytes(), HourStamp(0)).is_err());
        assert!(read_pattern("a,b\n1\n".as_bytes(), HourStamp(0)).is_err());
        assert!(read_pattern("".as_bytes(), HourStamp(0)).is_err());
    }

    #[test]
    fn synthetic_data_survives_text_round_trip() {
        let (g, truth) = generate(&SynthConfig {
            n_nodes: 30,
            n_clusters: 2,
            cluster_size: 10,
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        let (mut e, mut v, mut t) = (Vec::new(), Vec::new(), Vec::new());
        write_edges(&g, &mut e).unwrap();
        write_visits(&g, &mut v).unwrap();
        write_truth(&g, &truth, &mut t).unwrap();
        let grid = Grid {
            start: g.start(),
            hours: g.horizon(),
        };
        let (back, _) = build_graph(
            &parse_edges(&e[..]).unwrap(),
            &parse_visits(&v[..], grid).unwrap(),
        )
        .unwrap();
        // only nodes with edges come back
        for l in back.labels() {
            let (a, b) = (g.node_id(l).unwrap(), back.node_id(l).unwrap());
            assert_eq!(g.series(a).unwrap(), back.series(b).unwrap());
        }
        assert_eq!(back.edge_count(), g.edge_count());
        let rows = read_truth(&t[..]).unwrap();
        assert_eq!(rows.len(), 30);
        assert_eq!(rows[0].cluster, Some(0));
        assert_eq!(
            rows[29],
            TruthRow {
                label: g.labels()[29].clone(),
                cluster: None,
                event: None
            }
        );
        let ev = truth.events[1];
        assert_eq!(rows[15].event, Some((ev.start_hour(), ev.end_hour())));
    }

    #[test]
    fn partition_and_cluster_files() {
        let (g, _) = generate(&SynthConfig {
            n_nodes: 20,
            n_clusters: 2,
            cluster_size: 10,
            ..Default::default()
        })
        .unwrap();
        let labels: Vec<u32> = (0..20).map(|i| (i / 7) as u32).collect();
        let p = Partition::from_labels(&labels, 1.0);
        let mut buf = Vec::new();
        write_partition(&g, &p, &mut buf).unwrap();
        let rows = read_partition(&buf[..]).unwrap();
        assert_eq!(partition_for(&g, &rows, 1.0).unwrap(), p);
        assert!(partition_for(&g, &rows[1..], 1.0).is_err());

        let members = ["page_00003", "page_00004"];
        let mut c = Vec::new();
        write_cluster(&members, &mut c).unwrap();
        let back = read_cluster(&c[..]).unwrap();
        assert_eq!(back, members);
        assert_eq!(resolve(&g, &back).unwrap(), vec![NodeId(3), NodeId(4)]);
        assert_eq!(read_cluster("x,1\ny,1\n".as_bytes()).unwrap(), ["x", "y"]);
        assert!(resolve(&g, &["nope".to_string()]).is_err());
    }
}
