//! Node embedding table shared by entity and relation nodes.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, Normal};

use crate::kgraph::{normalize, FactualGraph, NodeKind};
use crate::seeding::rng_for;

use super::DetectorError;

/// Standard deviation of the seeded random initialization.
pub const INIT_STD: f64 = 0.02;

/// Embedding rows keyed by `(kind, normalized surface)`, with one shared
/// out-of-vocabulary row. Keying by kind prevents collisions between an
/// entity and a relation that share a surface.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddingTable {
    keys: Vec<(NodeKind, String)>,
    index: HashMap<(NodeKind, String), usize>,
    pub matrix: Array2<f64>,
    pub oov_row: usize,
}

impl NodeEmbeddingTable {
    /// Builds the vocabulary from training graphs, admitting node keys whose
    /// occurrence count across graphs reaches `min_frequency`. Rows are
    /// initialized N(0, 0.02^2) from the seed.
    pub fn build(
        graphs: &[FactualGraph],
        d_node: usize,
        min_frequency: u32,
        seed: u64,
    ) -> NodeEmbeddingTable {
        let mut counts: HashMap<(NodeKind, String), u32> = HashMap::new();
        let mut order: Vec<(NodeKind, String)> = Vec::new();
        for g in graphs {
            for n in &g.nodes {
                let key = (n.kind, normalize(&n.surface));
                let c = counts.entry(key.clone()).or_insert(0);
                if *c == 0 {
                    order.push(key);
                }
                *c += 1;
            }
        }
        let keys: Vec<(NodeKind, String)> = order
            .into_iter()
            .filter(|k| counts[k] >= min_frequency)
            .collect();
        let index: HashMap<(NodeKind, String), usize> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let rows = keys.len() + 1;
        let mut rng = rng_for(seed, "node-embeddings");
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let matrix =
            Array2::from_shape_fn((rows, d_node), |_| normal.sample(&mut rng));
        NodeEmbeddingTable {
            oov_row: rows - 1,
            keys,
            index,
            matrix,
        }
    }

    pub fn d_node(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn vocab_len(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[(NodeKind, String)] {
        &self.keys
    }

    /// Row index for a node; unknown keys share the OOV row.
    pub fn row_of(&self, kind: NodeKind, surface: &str) -> usize {
        self.index
            .get(&(kind, normalize(surface)))
            .copied()
            .unwrap_or(self.oov_row)
    }

    /// Initial feature matrix (one row per node) for a graph.
    pub fn initial_features(&self, graph: &FactualGraph) -> Array2<f64> {
        let mut h = Array2::zeros((graph.nodes.len(), self.d_node()));
        for n in &graph.nodes {
            let row = self.row_of(n.kind, &n.surface);
            h.row_mut(n.id).assign(&self.matrix.row(row));
        }
        h
    }

    /// Overwrites rows whose normalized surface matches an entry of a
    /// word2vec-format text file (`count dim` header, then `surface v1..vdim`;
    /// underscores in surfaces decode to spaces). Rows of both kinds match.
    pub fn load_word2vec(&mut self, path: impl AsRef<Path>) -> Result<usize, DetectorError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| DetectorError::UnreadableFile {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|source| DetectorError::UnreadableFile {
                path: path.display().to_string(),
                source,
            })?
            .ok_or_else(|| DetectorError::MalformedEmbeddingFile {
                line: 1,
                reason: "missing header".into(),
            })?;
        let mut parts = header.split_whitespace();
        let _count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| DetectorError::MalformedEmbeddingFile {
                line: 1,
                reason: "bad count".into(),
            })?;
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| DetectorError::MalformedEmbeddingFile {
                line: 1,
                reason: "bad dimension".into(),
            })?;
        if dim != self.d_node() {
            return Err(DetectorError::DimensionMismatch {
                expected: self.d_node(),
                got: dim,
            });
        }

        let mut overwritten = 0usize;
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line.map_err(|source| DetectorError::UnreadableFile {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let surface = parts
                .next()
                .ok_or_else(|| DetectorError::MalformedEmbeddingFile {
                    line: line_no,
                    reason: "missing surface".into(),
                })?
                .replace('_', " ");
            let values: Vec<f64> = parts
                .map(|v| v.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| DetectorError::MalformedEmbeddingFile {
                    line: line_no,
                    reason: e.to_string(),
                })?;
            if values.len() != dim {
                return Err(DetectorError::MalformedEmbeddingFile {
                    line: line_no,
                    reason: format!("expected {dim} values, got {}", values.len()),
                });
            }
            let vector = Array1::from(values);
            let norm = normalize(&surface);
            for kind in [NodeKind::Entity, NodeKind::Relation] {
                if let Some(&row) = self.index.get(&(kind, norm.clone())) {
                    self.matrix.row_mut(row).assign(&vector);
                    overwritten += 1;
                }
            }
        }
        Ok(overwritten)
    }

    /// Dumps vocabulary rows in word2vec text format (spaces encoded as
    /// underscores), suitable for reloading with [`Self::load_word2vec`].
    pub fn save_word2vec(&self, path: impl AsRef<Path>) -> Result<(), DetectorError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| DetectorError::WriteFailed {
            path: path.display().to_string(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        let write_err = |source| DetectorError::WriteFailed {
            path: path.display().to_string(),
            source,
        };
        writeln!(w, "{} {}", self.keys.len(), self.d_node()).map_err(write_err)?;
        for (i, (_, surface)) in self.keys.iter().enumerate() {
            let encoded = surface.replace(' ', "_");
            let values: Vec<String> = self
                .matrix
                .row(i)
                .iter()
                .map(|v| format!("{v:?}"))
                .collect();
            writeln!(w, "{encoded} {}", values.join(" ")).map_err(write_err)?;
        }
        w.flush().map_err(write_err)
    }
}

// Serde goes through a plain struct so the index map is rebuilt on load.
#[derive(serde::Serialize, serde::Deserialize)]
struct TableWire {
    keys: Vec<(NodeKind, String)>,
    matrix: Array2<f64>,
    oov_row: usize,
}

impl serde::Serialize for NodeEmbeddingTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TableWire {
            keys: self.keys.clone(),
            matrix: self.matrix.clone(),
            oov_row: self.oov_row,
        }
        .serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for NodeEmbeddingTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = TableWire::deserialize(deserializer)?;
        let index = wire
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        Ok(NodeEmbeddingTable {
            keys: wire.keys,
            index,
            matrix: wire.matrix,
            oov_row: wire.oov_row,
        })
    }
}
