//! Joint manipulated-text detector: node embeddings, GCN, document encoder,
//! fused article head and per-entity head, trained with hand-derived
//! gradients under Adam.

mod backward;
mod checkpoint;
mod embedding;
mod encoder;
mod gcn;
mod model;
mod train;

pub use backward::{backward, Gradients};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use embedding::NodeEmbeddingTable;
pub use encoder::{encode_text, tokenize, EncodeCache, EncoderParams};
pub use gcn::{gcn_forward, GcnLayerParams};
pub use model::{
    cross_entropy, entity_scores, forward_doc, fuse_and_score, joint_loss, predict, predict_batch,
    DocForward, EntityPrediction, Prediction,
};
pub use train::{train, train_from, EpochStats, TrainConfig, TrainOutcome};

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::kgraph::FactualGraph;
use crate::seeding::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Train,
    Infer,
}

/// How document-entity states are combined in the fusion. The equation prints
/// a sum while its prose averages; mean is the default, sum stays available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Sum,
}

/// Which neighbor set the GCN aggregates over. Edges are directed
/// subject → relation → object; `In` follows them, `Symmetric` ignores
/// direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborMode {
    In,
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub d_node: usize,
    pub d_text: usize,
    pub gcn_layers: usize,
    pub min_node_frequency: u32,
    pub dropout_rate: f64,
    pub aggregation: Aggregation,
    pub neighbors: NeighborMode,
    /// When false the graph branch is zeroed and the entity objective is
    /// dropped: the encoder-only ablation.
    pub use_graph: bool,
    /// Cross-entropy weight per entity class `[not-manipulated, manipulated]`;
    /// 1.0 each matches the plain joint objective.
    pub entity_class_weights: [f64; 2],
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_node: 100,
            d_text: 64,
            gcn_layers: 2,
            min_node_frequency: 10,
            dropout_rate: 0.1,
            aggregation: Aggregation::Mean,
            neighbors: NeighborMode::In,
            use_graph: true,
            entity_class_weights: [1.0, 1.0],
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.d_node == 0 || self.d_text == 0 || self.gcn_layers == 0 {
            return Err(DetectorError::InvalidConfig(
                "dimensions and layer count must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(DetectorError::InvalidConfig(
                "dropout_rate must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// All trainable state plus the configuration that shaped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub config: ModelConfig,
    pub seed: u64,
    pub embeddings: NodeEmbeddingTable,
    pub gcn: Vec<GcnLayerParams>,
    pub encoder: EncoderParams,
    /// 2 x (d_text + d_node) article head.
    pub w_mtd: Array2<f64>,
    pub b_mtd: Array1<f64>,
    /// 2 x d_node entity head.
    pub w_ec: Array2<f64>,
    pub b_ec: Array1<f64>,
}

impl DetectorParams {
    /// Seeds all weights; vocabularies come from the training graphs and
    /// texts only.
    pub fn init(
        config: &ModelConfig,
        train_graphs: &[FactualGraph],
        train_docs: &[Document],
        seed: u64,
    ) -> Result<DetectorParams, DetectorError> {
        config.validate()?;
        let embeddings = NodeEmbeddingTable::build(
            train_graphs,
            config.d_node,
            config.min_node_frequency,
            seed,
        );
        let encoder = EncoderParams::build(
            train_docs.iter().map(|d| d.text.as_str()),
            config.d_text,
            seed,
        );
        let mut rng = rng_for(seed, "heads");
        let gcn_std = (1.0 / config.d_node as f64).sqrt();
        let gcn_init = Normal::new(0.0, gcn_std).expect("valid std");
        let gcn = (0..config.gcn_layers)
            .map(|_| GcnLayerParams {
                w: Array2::from_shape_fn((config.d_node, config.d_node), |_| {
                    gcn_init.sample(&mut rng)
                }),
                b: Array1::zeros(config.d_node),
            })
            .collect();
        let fuse_in = config.d_text + config.d_node;
        let head = Normal::new(0.0, (1.0 / fuse_in as f64).sqrt()).expect("valid std");
        let w_mtd = Array2::from_shape_fn((2, fuse_in), |_| head.sample(&mut rng));
        let ec = Normal::new(0.0, gcn_std).expect("valid std");
        let w_ec = Array2::from_shape_fn((2, config.d_node), |_| ec.sample(&mut rng));
        // Small positive head biases keep the post-logit ReLU out of its dead
        // zone at the start of training.
        Ok(DetectorParams {
            config: config.clone(),
            seed,
            embeddings,
            gcn,
            encoder,
            w_mtd,
            b_mtd: Array1::from(vec![0.1, 0.1]),
            w_ec,
            b_ec: Array1::from(vec![0.1, 0.1]),
        })
    }

    /// Aggregation neighbor lists for a graph under this configuration.
    pub fn neighbor_lists(&self, graph: &FactualGraph) -> Vec<Vec<usize>> {
        match self.config.neighbors {
            NeighborMode::In => graph.in_neighbors.clone(),
            NeighborMode::Symmetric => graph.symmetric_neighbors(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },
    #[error("document has no entity nodes")]
    NoEntityNodes,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("embedding dimension mismatch: table is {expected}, file is {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteFailed {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed embedding file at line {line}: {reason}")]
    MalformedEmbeddingFile { line: usize, reason: String },
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
}
