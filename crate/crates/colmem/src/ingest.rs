//! Edge TSV and visit CSV parsers, and graph assembly on an hourly grid.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeZone, Utc};
use colmem_core::{GraphBuilder, HourStamp, TemporalGraph};
use serde::Serialize;

use crate::error::{Error, Result};

pub use colmem_core::preprocess::filter_min_visits;

pub const DEFAULT_MIN_VISITS: u32 = 500;

/// Hourly sampling grid `[start, start + hours)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub start: HourStamp,
    pub hours: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            start: colmem_core::synth::DEFAULT_START,
            hours: 5278,
        }
    }
}

impl Grid {
    pub fn slot(&self, at: HourStamp) -> Option<usize> {
        let off = at.0.checked_sub(self.start.0)?;
        (0..self.hours as i64)
            .contains(&off)
            .then_some(off as usize)
    }
}

/// Parse an hour-aligned UTC timestamp. Accepts RFC 3339 with any offset,
/// or a naive `YYYY-MM-DDTHH[:MM[:SS]]` taken as UTC.
pub fn parse_hour(s: &str) -> Option<HourStamp> {
    let s = s.trim();
    let t: DateTime<Utc> = match DateTime::parse_from_rfc3339(s) {
        Ok(t) => t.with_timezone(&Utc),
        Err(_) => {
            let naive = [
                "%Y-%m-%dT%H:%M:%S",
                "%Y-%m-%dT%H:%M",
                "%Y-%m-%d %H:%M:%S",
                "%Y-%m-%d %H:%M",
            ]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
            .or_else(|| {
                let (date, hour) = s.split_once(['T', ' '])?;
                let h: u32 = hour.parse().ok().filter(|_| hour.len() == 2)?;
                NaiveDate::parse_from_str(date, "%Y-%m-%d")
                    .ok()?
                    .and_hms_opt(h, 0, 0)
            })?;
            Utc.from_utc_datetime(&naive)
        }
    };
    let secs = t.timestamp();
    (secs.rem_euclid(3600) == 0 && t.timestamp_subsec_nanos() == 0)
        .then(|| HourStamp(secs.div_euclid(3600)))
}

pub fn format_hour(h: HourStamp) -> String {
    match Utc.timestamp_opt(h.0 * 3600, 0).single() {
        Some(t) => t.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => format!("hour {}", h.0),
    }
}

/// Parse `YYYY-MM` into the hour window it spans, relative to `start`.
/// The window is clipped to `[0, horizon)`.
pub fn month_window(
    month: &str,
    start: HourStamp,
    horizon: usize,
) -> Result<colmem_core::TimeWindow> {
    let bad = || Error::Config(format!("month {month:?} is not YYYY-MM"));
    let (y, m) = month.split_once('-').ok_or_else(bad)?;
    let (y, m): (i32, u32) = (y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?);
    let first = NaiveDate::from_ymd_opt(y, m, 1).ok_or_else(bad)?;
    let next = if m == 12 {
        NaiveDate::from_ymd_opt(y + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(y, m + 1, 1)
    }
    .ok_or_else(bad)?;
    let hour = |d: NaiveDate| {
        Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).unwrap())
            .timestamp()
            / 3600
    };
    let lo = (hour(first) - start.0).clamp(0, horizon as i64) as usize;
    let hi = (hour(next) - start.0).clamp(0, horizon as i64) as usize;
    colmem_core::TimeWindow::new(lo, hi).map_err(|_| {
        Error::Config(format!(
            "month {month} does not overlap the {horizon}-hour grid"
        ))
    })
}

/// Calendar months (`YYYY-MM`) overlapping `[start, start + horizon)`,
/// each clipped to the grid.
pub fn calendar_months(start: HourStamp, horizon: usize) -> Vec<(String, colmem_core::TimeWindow)> {
    let Some(first) = Utc.timestamp_opt(start.0 * 3600, 0).single() else {
        return Vec::new();
    };
    let (mut y, mut m) = (first.year(), first.month());
    let mut out = Vec::new();
    loop {
        let name = format!("{y:04}-{m:02}");
        match month_window(&name, start, horizon) {
            Ok(w) => out.push((name, w)),
            Err(_) => break,
        }
        if out.last().is_some_and(|(_, w)| w.end_hour() >= horizon) {
            break;
        }
        (y, m) = if m == 12 { (y + 1, 1) } else { (y, m + 1) };
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EdgeList {
    pub records: Vec<(String, String)>,
    /// Non-comment, non-blank lines.
    pub lines: u64,
    pub malformed: u64,
    pub self_loops: u64,
}

fn read_lines(
    input: impl BufRead,
    what: &'static str,
) -> impl Iterator<Item = Result<(u64, String)>> {
    input.lines().enumerate().map(move |(i, l)| {
        l.map(|l| (i as u64 + 1, l)).map_err(|source| Error::Io {
            path: what.into(),
            source,
        })
    })
}

fn check_malformed(what: &'static str, malformed: u64, total: u64) -> Result<()> {
    if malformed * 2 > total {
        return Err(Error::TooManyMalformed {
            what,
            malformed,
            total,
        });
    }
    Ok(())
}

/// `src<TAB>dst` lines; `#` comments and blank lines are skipped.
/// Self-references are dropped and counted.
pub fn parse_edges(input: impl BufRead) -> Result<EdgeList> {
    let mut out = EdgeList::default();
    for line in read_lines(input, "edges") {
        let (lineno, line) = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.lines += 1;
        let mut fields = line.split('\t');
        match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                if a == b {
                    out.self_loops += 1;
                } else {
                    out.records.push((a.to_owned(), b.to_owned()));
                }
            }
            _ => {
                log::debug!("edges line {lineno}: malformed");
                out.malformed += 1;
            }
        }
    }
    check_malformed("edges", out.malformed, out.lines)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VisitTable {
    pub grid: Grid,
    #[serde(skip)]
    pub series: BTreeMap<String, Vec<u32>>,
    pub records: u64,
    pub malformed: u64,
    pub out_of_grid: u64,
}

/// `label,iso8601_hour,count` records placed on `grid`. An optional header
/// row is recognized by its first field `label`. Duplicate (label, hour)
/// records are summed.
pub fn parse_visits(input: impl std::io::Read, grid: Grid) -> Result<VisitTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut out = VisitTable {
        grid,
        series: BTreeMap::new(),
        records: 0,
        malformed: 0,
        out_of_grid: 0,
    };
    let mut rec = csv::StringRecord::new();
    let mut first = true;
    loop {
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) | csv::ErrorKind::Utf8 { .. } => {
                    let msg = e.to_string();
                    return Err(Error::Io {
                        path: "visits".into(),
                        source: std::io::Error::other(msg),
                    });
                }
                _ => {
                    out.records += 1;
                    out.malformed += 1;
                    continue;
                }
            },
        }
        let line = rec.position().map_or(0, |p| p.line());
        if std::mem::take(&mut first) && rec.get(0) == Some("label") {
            continue;
        }
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        out.records += 1;
        let parsed = (rec.len() == 3 && !rec[0].is_empty())
            .then(|| Some((parse_hour(&rec[1])?, rec[2].trim().parse::<u32>().ok()?)))
            .flatten();
        let Some((at, count)) = parsed else {
            log::debug!("visits line {line}: malformed");
            out.malformed += 1;
            continue;
        };
        let Some(slot) = grid.slot(at) else {
            out.out_of_grid += 1;
            continue;
        };
        let row = out
            .series
            .entry(rec[0].to_owned())
            .or_insert_with(|| vec![0; grid.hours]);
        row[slot] = row[slot].checked_add(count).ok_or_else(|| {
            Error::format("visits", line, format!("count overflow for {:?}", &rec[0]))
        })?;
    }
    check_malformed("visits", out.malformed, out.records)?;
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub nodes: usize,
    pub edges: usize,
    /// Edge labels without visit records, given all-zero series.
    pub missing_series: usize,
    /// Visit labels that appear in no edge.
    pub isolated_series: usize,
    /// Reciprocal or repeated links merged into one undirected edge.
    pub merged_edges: usize,
}

/// Nodes are the labels appearing in at least one edge, in byte order.
pub fn build_graph(edges: &EdgeList, visits: &VisitTable) -> Result<(TemporalGraph, BuildReport)> {
    let labels: BTreeSet<&str> = edges
        .records
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    if labels.is_empty() {
        return Err(colmem_core::Error::EmptyInput("no labels appear in any edge").into());
    }
    let grid = visits.grid;
    let zeros = vec![0u32; grid.hours];
    let mut b = GraphBuilder::new(grid.start, grid.hours);
    let mut report = BuildReport::default();
    for &l in &labels {
        let row = visits.series.get(l).unwrap_or_else(|| {
            report.missing_series += 1;
            &zeros
        });
        b.add_node(l, row)?;
    }
    report.isolated_series = visits
        .series
        .keys()
        .filter(|l| !labels.contains(l.as_str()))
        .count();
    for (a, c) in &edges.records {
        let (a, c) = (
            b.node_id(a).expect("edge label registered"),
            b.node_id(c).expect("edge label registered"),
        );
        if !b.add_edge(a, c)? {
            report.merged_edges += 1;
        }
    }
    let g = b.build();
    report.nodes = g.node_count();
    report.edges = g.edge_count();
    Ok((g, report))
}
