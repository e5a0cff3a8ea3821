//! File formats.
//!
//! * Graph collection: JSON Lines, one `{"id": m, "n": n, "edges": [[i, j], ...]}`
//!   per graph, 0-based indices with `i < j`.
//! * Provenance sidecar `<collection>.latent.json`:
//!   `{"latent": [[...], ...], "graphon_id": g, "seed": s}`.
//! * Step estimate: headerless CSV of `k` rows by `k` columns, each value in
//!   shortest round-trip decimal form, plus `<csv>.meta.json` holding
//!   [`EstimateMeta`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{EstimateMeta, StepEstimate};
use crate::graph::{Graph, GraphCollection};
use crate::matrix::SquareMatrix;
use crate::sampling::LatentAssignment;

#[derive(Debug, Serialize, Deserialize)]
struct GraphRecord {
    id: usize,
    n: usize,
    edges: Vec<[usize; 2]>,
}

/// Synthetic provenance of a collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub latent: Vec<Vec<f64>>,
    #[serde(default)]
    pub graphon_id: Option<u32>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn latent_assignment(&self) -> Result<LatentAssignment> {
        LatentAssignment::new(self.latent.clone())
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn provenance_path(collection: &Path) -> PathBuf {
    with_suffix(collection, ".latent.json")
}

pub fn meta_path(estimate_csv: &Path) -> PathBuf {
    with_suffix(estimate_csv, ".meta.json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_collection(path: &Path, collection: &GraphCollection) -> Result<()> {
    let mut w = create(path)?;
    for (id, g) in collection.graphs().iter().enumerate() {
        let record = GraphRecord {
            id,
            n: g.node_count(),
            edges: g
                .edges()
                .iter()
                .map(|&(i, j)| [i as usize, j as usize])
                .collect(),
        };
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a collection; graphs keep file order. Blank lines are skipped.
pub fn read_collection(path: &Path) -> Result<GraphCollection> {
    let reader = open(path)?;
    let mut graphs = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: path.to_owned(),
            line: idx + 1,
            reason,
        };
        let record: GraphRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if !ids.insert(record.id) {
            return Err(parse_err(format!("duplicate graph id {}", record.id)));
        }
        let g = Graph::with_label(
            record.id,
            record.n,
            record.edges.iter().map(|&[i, j]| (i, j)),
        )
        .map_err(|e| parse_err(e.to_string()))?;
        graphs.push(g);
    }
    Ok(GraphCollection::new(graphs))
}

pub fn write_provenance(path: &Path, provenance: &Provenance) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, provenance)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_provenance(path: &Path) -> Result<Provenance> {
    Ok(serde_json::from_reader(open(path)?)?)
}

pub fn write_matrix_csv(path: &Path, values: &SquareMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    for row in values.rows() {
        w.write_record(row.iter().map(f64::to_string))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.to_owned(),
        line,
        reason: e.to_string(),
    }
}

pub fn read_matrix_csv(path: &Path) -> Result<SquareMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut rows = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_owned(),
                    line: idx + 1,
                    reason: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    SquareMatrix::from_rows(rows).ok_or_else(|| Error::Parse {
        path: path.to_owned(),
        line: 0,
        reason: "estimate CSV is not square".into(),
    })
}

/// Writes the CSV and its metadata sidecar.
pub fn write_estimate(path: &Path, estimate: &StepEstimate) -> Result<()> {
    write_matrix_csv(path, &estimate.values)?;
    let meta = meta_path(path);
    let mut w = create(&meta)?;
    serde_json::to_writer_pretty(&mut w, &estimate.meta)?;
    w.write_all(b"\n").map_err(|e| Error::io(&meta, e))?;
    w.flush().map_err(|e| Error::io(&meta, e))
}

/// Reads an estimate CSV; metadata is loaded when the sidecar exists.
pub fn read_estimate(path: &Path) -> Result<(SquareMatrix, Option<EstimateMeta>)> {
    let values = read_matrix_csv(path)?;
    let meta = meta_path(path);
    let meta = if meta.exists() {
        Some(serde_json::from_reader(open(&meta)?)?)
    } else {
        None
    };
    Ok((values, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::Graphon;
    use crate::rng::RngSeed;
    use crate::sampling::sample_collection;

    #[test]
    fn collection_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let w = Graphon::analytic(3).unwrap();
        let (c, lat) = sample_collection(&w, &[5, 1, 12], RngSeed(4)).unwrap();
        write_collection(&path, &c).unwrap();
        assert_eq!(read_collection(&path).unwrap(), c);

        let prov = Provenance {
            latent: lat.into_inner(),
            graphon_id: Some(3),
            seed: Some(4),
        };
        let pp = provenance_path(&path);
        write_provenance(&pp, &prov).unwrap();
        assert_eq!(read_provenance(&pp).unwrap(), prov);
    }

    #[test]
    fn reports_bad_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"id\":0,\"n\":2,\"edges\":[[0,1]]}\n\n{\"id\":1,\"n\":2,\"edges\":[[0,5]]}\n",
        )
        .unwrap();
        match read_collection(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "not json\n").unwrap();
        assert!(matches!(read_collection(&path), Err(Error::Parse { line: 1, .. })));
        std::fs::write(&path, "{\"id\":0,\"n\":2,\"edges\":[]}\n{\"id\":0,\"n\":2,\"edges\":[]}\n").unwrap();
        assert!(matches!(read_collection(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn estimate_csv_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let values = SquareMatrix::from_rows(vec![vec![0.5, 0.1], vec![0.1, 1.0 / 3.0]]).unwrap();
        let meta = EstimateMeta {
            k: 2,
            total_nodes: 4,
            graph_count: 1,
            observed_dyads: 16,
            method: "jgs".into(),
            params: Default::default(),
            seed: None,
            elapsed_seconds: 0.25,
            empty_blocks: 0,
        };
        write_estimate(&path, &StepEstimate { values: values.clone(), meta: meta.clone() }).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "0.5,0.1\n0.1,0.3333333333333333\n");
        let (back, back_meta) = read_estimate(&path).unwrap();
        assert_eq!(back, values);
        assert_eq!(back_meta.unwrap(), meta);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(meta_path(&path)).unwrap()).unwrap();
        for key in ["k", "N", "M", "S", "method", "params", "seed", "elapsed_seconds", "empty_blocks"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn rejects_ragged_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, "0.1,0.2\n0.3\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
        std::fs::write(&path, "0.1,x\n0.3,0.4\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
    }
}
