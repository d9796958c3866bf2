//! File formats: contact-list ingestion, the graph dump (JSON descriptor plus
//! a `t i j w` edge list), and CSV exports of embeddings, distance matrices
//! and eigenvalue vectors.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::distances::{DistanceMatrix, LambdaVector};
use crate::edrep::Embedding;
use crate::error::{Error, Result};
use crate::graph::{TemporalEdge, TemporalGraph};

/// Counters collected while reading a contact list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub records: usize,
    pub self_edges_skipped: usize,
}

/// Reads a whitespace-separated `timestamp i j` contact list and bins it into
/// windows of `t_res` seconds.
pub fn load_contact_list(path: impl AsRef<Path>, t_res: u64) -> Result<TemporalGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (g, stats) = parse_contact_list(BufReader::new(file), t_res)?;
    if stats.self_edges_skipped > 0 {
        log::warn!(
            "{}: skipped {} self-edge records",
            path.display(),
            stats.self_edges_skipped
        );
    }
    Ok(g)
}

/// Parses a contact list from any reader.
///
/// The weight of a pair in a window is the number of records for that pair
/// falling in the window. Nodes are renumbered `0..n` in increasing order of
/// their raw identifiers (numeric order when every identifier is an integer)
/// and the raw identifiers are kept as node names. Nodes that only appear in
/// self-edge records are dropped.
pub fn parse_contact_list<R: BufRead>(reader: R, t_res: u64) -> Result<(TemporalGraph, LoadStats)> {
    if t_res == 0 {
        return Err(Error::InvalidArgument("t_res must be positive".into()));
    }
    let mut stats = LoadStats::default();
    let mut records: Vec<(i64, String, String)> = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let (ts, a, b) = match (cols.next(), cols.next(), cols.next()) {
            (Some(ts), Some(a), Some(b)) => (ts, a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `timestamp i j`, got `{line}`"),
                })
            }
        };
        let ts: i64 = ts.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("invalid timestamp `{ts}`"),
        })?;
        stats.records += 1;
        if a == b {
            stats.self_edges_skipped += 1;
            continue;
        }
        records.push((ts, a.to_string(), b.to_string()));
    }
    if records.is_empty() {
        return Err(Error::Empty("contact list has no usable records".into()));
    }

    let mut ids: Vec<&str> = records
        .iter()
        .flat_map(|(_, a, b)| [a.as_str(), b.as_str()])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.iter().all(|s| s.parse::<i64>().is_ok()) {
        ids.sort_by_key(|s| s.parse::<i64>().unwrap());
    }
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(k, &s)| (s, k)).collect();

    let t_min = records.iter().map(|r| r.0).min().unwrap();
    let t_max = records.iter().map(|r| r.0).max().unwrap();
    let width = t_res as i64;
    let t_count = ((t_max - t_min) / width) as usize + 1;

    let edges: Vec<TemporalEdge> = records
        .iter()
        .map(|(ts, a, b)| TemporalEdge {
            t: ((ts - t_min) / width) as usize,
            i: index[a.as_str()],
            j: index[b.as_str()],
            w: 1.0,
        })
        .collect();
    let names = ids.iter().map(|s| s.to_string()).collect();
    let g = TemporalGraph::from_edges(ids.len(), t_count, edges)?
        .with_t_res(t_res)
        .with_node_names(names)?;
    Ok((g, stats))
}

/// JSON descriptor of a dumped graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub t_res: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_names: Option<Vec<String>>,
    /// Edge file, relative to the descriptor's directory.
    pub edges: String,
}

/// Writes `<stem>.json` and `<stem>.edges` for the graph; `path` is the
/// descriptor path (its extension is replaced).
pub fn write_graph(g: &TemporalGraph, path: impl AsRef<Path>) -> Result<PathBuf> {
    let json_path = path.as_ref().with_extension("json");
    let edges_path = json_path.with_extension("edges");
    let desc = GraphDescriptor {
        n: g.n(),
        t: g.num_snapshots(),
        t_res: g.t_res(),
        node_names: g.node_names().map(<[String]>::to_vec),
        edges: edges_path
            .file_name()
            .expect("file name")
            .to_string_lossy()
            .into_owned(),
    };
    let f = File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &desc)?;

    let f = File::create(&edges_path).map_err(|e| Error::io(&edges_path, e))?;
    let mut w = BufWriter::new(f);
    write_edge_list(g, &mut w).map_err(|e| Error::io(&edges_path, e))?;
    w.flush().map_err(|e| Error::io(&edges_path, e))?;
    Ok(json_path)
}

/// Writes the `t i j w` edge list (zero-based snapshot and node indices).
pub fn write_edge_list<W: Write>(g: &TemporalGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# t i j w")?;
    for e in g.edges() {
        writeln!(w, "{} {} {} {}", e.t, e.i, e.j, e.w)?;
    }
    Ok(())
}

/// Reads a graph from its JSON descriptor.
pub fn read_graph(path: impl AsRef<Path>) -> Result<TemporalGraph> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let desc: GraphDescriptor = serde_json::from_reader(BufReader::new(f))?;
    let edges_path = path.parent().unwrap_or(Path::new(".")).join(&desc.edges);
    let f = File::open(&edges_path).map_err(|e| Error::io(&edges_path, e))?;
    let edges = parse_edge_list(BufReader::new(f))?;
    let mut g = TemporalGraph::from_edges(desc.n, desc.t, edges)?.with_t_res(desc.t_res);
    if let Some(names) = desc.node_names {
        g = g.with_node_names(names)?;
    }
    Ok(g)
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Vec<TemporalEdge>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `t i j w`, got `{line}`"),
            });
        }
        let bad = |what: &str| Error::Parse {
            line: lineno,
            msg: format!("invalid {what} in `{line}`"),
        };
        out.push(TemporalEdge {
            t: cols[0].parse().map_err(|_| bad("t"))?,
            i: cols[1].parse().map_err(|_| bad("i"))?,
            j: cols[2].parse().map_err(|_| bad("j"))?,
            w: cols[3].parse().map_err(|_| bad("w"))?,
        });
    }
    Ok(out)
}

pub fn write_embedding_csv<W: Write>(x: &Embedding, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let d = x.dim();
    let mut header = vec!["node".to_string()];
    header.extend((0..d).map(|k| format!("x{k}")));
    wr.write_record(&header).map_err(csv_err)?;
    for (i, row) in x.as_array().rows().into_iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<embedding>", e))?;
    Ok(())
}

/// Reads an embedding CSV. Rows are taken in file order; the `node` column
/// must be `0..n` in order.
pub fn read_embedding_csv<R: Read>(r: R) -> Result<Embedding> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("node") || header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header `node,x0,...`".into(),
        });
    }
    let d = header.len() - 1;
    let mut data = Vec::new();
    let mut n = 0;
    for (k, rec) in rd.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(csv_err)?;
        let node: usize = rec[0].trim().parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid node index `{}`", &rec[0]),
        })?;
        if node != n {
            return Err(Error::Parse {
                line,
                msg: format!("node index {node} out of order (expected {n})"),
            });
        }
        for v in rec.iter().skip(1) {
            data.push(v.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid value `{v}`"),
            })?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("embedding file has no rows".into()));
    }
    let arr = Array2::from_shape_vec((n, d), data)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    Embedding::new(arr)
}

pub fn write_distance_matrix_csv<W: Write>(dm: &DistanceMatrix, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec![String::new()];
    header.extend(dm.ids().iter().cloned());
    wr.write_record(&header).map_err(csv_err)?;
    for (id, row) in dm.ids().iter().zip(dm.values().rows()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<distance matrix>", e))?;
    Ok(())
}

pub fn write_lambda_csv<'a, W, I>(rows: I, w: W) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a LambdaVector)>,
{
    let mut wr = csv::Writer::from_writer(w);
    let mut wrote_header = false;
    for (id, lam) in rows {
        if !wrote_header {
            let mut header = vec!["graph_id".to_string()];
            header.extend((1..=lam.len()).map(|k| format!("lambda{k}")));
            wr.write_record(&header).map_err(csv_err)?;
            wrote_header = true;
        }
        let mut rec = vec![id.to_string()];
        rec.extend(lam.values().iter().map(|v| v.to_string()));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<lambda>", e))?;
    Ok(())
}

/// Plain CSV dump of a dense matrix (no header).
pub fn write_dense_csv<W: Write>(m: &Array2<f64>, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in m.rows() {
        wr.write_record(row.iter().map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<matrix>", e))?;
    Ok(())
}

/// Per-pair summed weight of the aggregated graph, for quick comparisons.
pub fn aggregated_weights(g: &TemporalGraph) -> BTreeMap<(usize, usize), f64> {
    g.aggregated().edges().map(|(i, j, w)| ((i, j), w)).collect()
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str, t_res: u64) -> Result<(TemporalGraph, LoadStats)> {
        parse_contact_list(s.as_bytes(), t_res)
    }

    #[test]
    fn single_record() {
        let (g, _) = parse("0 A B\n", 20).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.num_snapshots(), 1);
        assert_eq!(g.snapshot(0).weight(0, 1), 1.0);
        assert_eq!(g.node_names().unwrap(), ["A", "B"]);
    }

    #[test]
    fn duplicate_records_accumulate() {
        let (g, _) = parse("0 A B\n0 A B\n", 20).unwrap();
        assert_eq!(g.snapshot(0).weight(0, 1), 2.0);
    }

    #[test]
    fn binning_and_gaps() {
        let src = "# comment\n100 3 1 extra cols\n120 1 3\n160 2 3\n\n400 1 2\n";
        let (g, stats) = parse(src, 60).unwrap();
        assert_eq!(stats.records, 4);
        // windows [100,160) [160,220) ... ; 400 -> window 5
        assert_eq!(g.num_snapshots(), 6);
        assert_eq!(g.node_names().unwrap(), ["1", "2", "3"]);
        assert_eq!(g.snapshot(0).weight(0, 2), 2.0);
        assert_eq!(g.snapshot(1).weight(1, 2), 1.0);
        assert!(g.snapshot(2).is_empty());
        assert_eq!(g.snapshot(5).weight(0, 1), 1.0);
        g.validate().unwrap();
    }

    #[test]
    fn numeric_ids_sort_numerically() {
        let (g, _) = parse("0 10 9\n", 20).unwrap();
        assert_eq!(g.node_names().unwrap(), ["9", "10"]);
    }

    #[test]
    fn self_edges_skipped_and_nodes_dropped() {
        let (g, stats) = parse("0 A A\n0 A B\n20 C C\n", 20).unwrap();
        assert_eq!(stats.self_edges_skipped, 2);
        assert_eq!(g.n(), 2);
        assert_eq!(g.num_snapshots(), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("", 20), Err(Error::Empty(_))));
        assert!(matches!(parse("# only comments\n", 20), Err(Error::Empty(_))));
        match parse("0 A B\nxx A B\n", 20) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 A B\n5 A\n", 20) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("0 A B\n", 0).is_err());
    }

    #[test]
    fn graph_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (g, _) = parse("0 A B\n30 B C\n31 B C\n90 A C\n", 30).unwrap();
        let p = write_graph(&g, dir.path().join("g")).unwrap();
        assert_eq!(p.extension().unwrap(), "json");
        let back = read_graph(&p).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn embedding_csv_round_trip() {
        let x = Embedding::new(ndarray::array![[1.0, 0.0], [0.6, -0.8], [0.0, 1.0]]).unwrap();
        let mut buf = Vec::new();
        write_embedding_csv(&x, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("node,x0,x1\n"));
        let back = read_embedding_csv(buf.as_slice()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn embedding_csv_rejects_out_of_order_rows() {
        let src = "node,x0\n1,1.0\n0,1.0\n";
        assert!(read_embedding_csv(src.as_bytes()).is_err());
    }
}
