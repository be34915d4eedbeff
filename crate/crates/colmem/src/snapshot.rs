//! Binary graph snapshot.
//!
//! All integers little-endian.
//!
//! ```text
//! magic     8 bytes  "CMEMSNAP"
//! version   u32
//! start     i64      hours since the Unix epoch
//! horizon   u64
//! nodes     u64
//! edges     u64
//! labels    nodes × (u32 byte length, UTF-8 bytes)
//! offsets   (nodes + 1) × u64   upper-triangle CSR row starts
//! columns   edges × u32         neighbor id, greater than the row id
//! weights   edges × f64
//! series    nodes × horizon × u32, row-major
//! crc32     u32 over every preceding byte
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use colmem_core::{HourStamp, NodeId, TemporalGraph};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"CMEMSNAP";
pub const VERSION: u32 = 1;

struct Crc<W> {
    inner: W,
    hasher: crc32fast::Hasher,
}

impl<W: Write> Write for Crc<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

impl<R: Read> Read for Crc<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

pub fn write(graph: &TemporalGraph, out: impl Write) -> std::io::Result<()> {
    let mut w = Crc {
        inner: out,
        hasher: crc32fast::Hasher::new(),
    };
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&graph.start().0.to_le_bytes())?;
    for x in [graph.horizon(), graph.node_count(), graph.edge_count()] {
        w.write_all(&(x as u64).to_le_bytes())?;
    }
    for l in graph.labels() {
        w.write_all(&(l.len() as u32).to_le_bytes())?;
        w.write_all(l.as_bytes())?;
    }
    // edges are sorted by (low, high), so rows are contiguous
    let mut offset = 0u64;
    let mut e = 0;
    for i in 0..graph.node_count() {
        w.write_all(&offset.to_le_bytes())?;
        while e < graph.edge_count() && graph.edges()[e].0.index() == i {
            e += 1;
            offset += 1;
        }
    }
    w.write_all(&offset.to_le_bytes())?;
    for &(_, b) in graph.edges() {
        w.write_all(&b.0.to_le_bytes())?;
    }
    for &x in graph.weights() {
        w.write_all(&x.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(graph.horizon() * 4);
    for i in 0..graph.node_count() {
        buf.clear();
        graph
            .row(i)
            .iter()
            .for_each(|v| buf.extend_from_slice(&v.to_le_bytes()));
        w.write_all(&buf)?;
    }
    let crc = w.hasher.clone().finalize();
    w.inner.write_all(&crc.to_le_bytes())?;
    w.inner.flush()
}

struct Reader<R> {
    r: Crc<R>,
}

macro_rules! take {
    ($name:ident, $t:ty) => {
        fn $name(&mut self) -> Result<$t> {
            let mut b = [0u8; std::mem::size_of::<$t>()];
            self.bytes(&mut b)?;
            Ok(<$t>::from_le_bytes(b))
        }
    };
}

impl<R: Read> Reader<R> {
    fn bytes(&mut self, buf: &mut [u8]) -> Result<()> {
        self.r.read_exact(buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Snapshot("truncated".into()),
            _ => Error::Io {
                path: "snapshot".into(),
                source: e,
            },
        })
    }

    take!(u32, u32);
    take!(u64, u64);
    take!(i64, i64);
    take!(f64, f64);

    fn count(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Snapshot(format!("{what} count {v} too large")))
    }
}

/// Reads and validates a snapshot. Every structural invariant is rechecked.
pub fn read(input: impl Read) -> Result<TemporalGraph> {
    let mut r = Reader {
        r: Crc {
            inner: input,
            hasher: crc32fast::Hasher::new(),
        },
    };
    let mut magic = [0u8; 8];
    r.bytes(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("not a snapshot file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let start = HourStamp(r.i64()?);
    let horizon = r.count("hour")?;
    let nodes = r.count("node")?;
    let edges = r.count("edge")?;
    // reject absurd headers before allocating
    const LIMIT: usize = 1 << 40;
    if nodes.saturating_mul(horizon.max(1)) > LIMIT || edges > LIMIT {
        return Err(Error::Snapshot("header sizes out of range".into()));
    }
    let mut labels = Vec::with_capacity(nodes.min(1 << 20));
    for _ in 0..nodes {
        let len = r.u32()? as usize;
        let mut b = vec![0u8; len];
        r.bytes(&mut b)?;
        labels
            .push(String::from_utf8(b).map_err(|_| Error::Snapshot("label is not UTF-8".into()))?);
    }
    let mut offsets = Vec::with_capacity(nodes + 1);
    for _ in 0..=nodes {
        offsets.push(r.count("offset")?);
    }
    if offsets[0] != 0 || offsets[nodes] != edges || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Snapshot("inconsistent adjacency offsets".into()));
    }
    let mut pairs = Vec::with_capacity(edges);
    for i in 0..nodes {
        for _ in offsets[i]..offsets[i + 1] {
            let j = r.u32()?;
            if j as usize <= i {
                return Err(Error::Snapshot(format!(
                    "adjacency row {i} lists {j}, not above the row"
                )));
            }
            pairs.push((NodeId(i as u32), NodeId(j)));
        }
    }
    let mut weights = Vec::with_capacity(edges);
    for _ in 0..edges {
        weights.push(r.f64()?);
    }
    let mut series = vec![0u32; nodes * horizon];
    let mut buf = vec![0u8; horizon * 4];
    for row in series.chunks_mut(horizon.max(1)).take(nodes) {
        r.bytes(&mut buf)?;
        for (v, b) in row.iter_mut().zip(buf.chunks_exact(4)) {
            *v = u32::from_le_bytes(b.try_into().unwrap());
        }
    }
    let expected = r.r.hasher.clone().finalize();
    let mut crc = [0u8; 4];
    r.r.inner
        .read_exact(&mut crc)
        .map_err(|_| Error::Snapshot("truncated".into()))?;
    if u32::from_le_bytes(crc) != expected {
        return Err(Error::Snapshot("checksum mismatch".into()));
    }
    let mut extra = [0u8; 1];
    if r.r.inner.read(&mut extra).map_err(Error::io("snapshot"))? != 0 {
        return Err(Error::Snapshot("trailing bytes after checksum".into()));
    }
    Ok(TemporalGraph::from_parts(
        labels, start, horizon, series, pairs, weights,
    )?)
}

pub fn save(graph: &TemporalGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(Error::io(path))?;
    write(graph, BufWriter::new(f)).map_err(Error::io(path))
}

pub fn load(path: impl AsRef<Path>) -> Result<TemporalGraph> {
    let path = path.as_ref();
    let f = File::open(path).map_err(Error::io(path))?;
    read(BufReader::new(f)).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.into(),
            source,
        },
        other => other,
    })
}
