//! Forward passes, the joint objective, and prediction.

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, Label};
use crate::kgraph::FactualGraph;

use super::encoder::{encode_text, EncodeCache};
use super::gcn::gcn_forward;
use super::{Aggregation, DetectorError, DetectorParams, RunMode};

/// Inverted dropout: entries are 0 or 1/(1-rate), identity in infer mode.
fn dropout_mask(
    len: usize,
    rate: f64,
    mode: RunMode,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Result<Array1<f64>, DetectorError> {
    if mode == RunMode::Infer || rate == 0.0 {
        return Ok(Array1::ones(len));
    }
    let rng = rng.as_deref_mut().ok_or_else(|| {
        DetectorError::InvalidConfig("train-mode dropout requires an rng".into())
    })?;
    let keep = 1.0 - rate;
    Ok(Array1::from_shape_fn(len, |_| {
        if rng.random::<f64>() < keep {
            1.0 / keep
        } else {
            0.0
        }
    }))
}

fn relu(x: &Array1<f64>) -> Array1<f64> {
    x.mapv(|v| v.max(0.0))
}

/// Entity aggregate feeding the fusion; zeros under the encoder-only ablation.
fn entity_aggregate(
    node_states: &Array2<f64>,
    doc_entity_nodes: &[usize],
    params: &DetectorParams,
) -> Result<Array1<f64>, DetectorError> {
    if doc_entity_nodes.is_empty() {
        return Err(DetectorError::NoEntityNodes);
    }
    if !params.config.use_graph {
        return Ok(Array1::zeros(node_states.ncols()));
    }
    let mut agg = Array1::zeros(node_states.ncols());
    for &v in doc_entity_nodes {
        agg += &node_states.row(v);
    }
    if params.config.aggregation == Aggregation::Mean {
        agg /= doc_entity_nodes.len() as f64;
    }
    Ok(agg)
}

/// Unnormalized article scores: dropout (train only) then ReLU applied to
/// `W_mtd [doc_vec ; agg] + b_mtd`.
pub fn fuse_and_score(
    doc_vec: &Array1<f64>,
    node_states: &Array2<f64>,
    doc_entity_nodes: &[usize],
    params: &DetectorParams,
    mode: RunMode,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<Array1<f64>, DetectorError> {
    let (out, _, _, _) = fuse_detail(doc_vec, node_states, doc_entity_nodes, params, mode, &mut rng)?;
    Ok(out)
}

#[allow(clippy::type_complexity)]
fn fuse_detail(
    doc_vec: &Array1<f64>,
    node_states: &Array2<f64>,
    doc_entity_nodes: &[usize],
    params: &DetectorParams,
    mode: RunMode,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Result<(Array1<f64>, Array1<f64>, Array1<f64>, Array1<f64>), DetectorError> {
    let agg = entity_aggregate(node_states, doc_entity_nodes, params)?;
    let cat = concatenate![Axis(0), doc_vec.view(), agg.view()];
    if cat.len() != params.w_mtd.ncols() {
        return Err(DetectorError::ShapeMismatch {
            context: format!(
                "fusion input has width {}, head expects {}",
                cat.len(),
                params.w_mtd.ncols()
            ),
        });
    }
    let pre = params.w_mtd.dot(&cat) + &params.b_mtd;
    let mask = dropout_mask(2, params.config.dropout_rate, mode, rng)?;
    let dropped = &pre * &mask;
    let out = relu(&dropped);
    Ok((out, pre, mask, agg))
}

/// Per-entity unnormalized scores: `Dropout(ReLU(W_ec h_v + b_ec))`, dropout
/// active in train mode only.
pub fn entity_scores(
    node_states: &Array2<f64>,
    doc_entity_nodes: &[usize],
    params: &DetectorParams,
    mode: RunMode,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<Vec<Array1<f64>>, DetectorError> {
    let detail = entity_detail(node_states, doc_entity_nodes, params, mode, &mut rng)?;
    Ok(detail.into_iter().map(|(out, _, _)| out).collect())
}

#[allow(clippy::type_complexity)]
fn entity_detail(
    node_states: &Array2<f64>,
    doc_entity_nodes: &[usize],
    params: &DetectorParams,
    mode: RunMode,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Result<Vec<(Array1<f64>, Array1<f64>, Array1<f64>)>, DetectorError> {
    if node_states.ncols() != params.w_ec.ncols() {
        return Err(DetectorError::ShapeMismatch {
            context: format!(
                "entity head expects width {}, states have {}",
                params.w_ec.ncols(),
                node_states.ncols()
            ),
        });
    }
    let mut out = Vec::with_capacity(doc_entity_nodes.len());
    for &v in doc_entity_nodes {
        let pre = params.w_ec.dot(&node_states.row(v).to_owned()) + &params.b_ec;
        let mask = dropout_mask(2, params.config.dropout_rate, mode, rng)?;
        let scored = &relu(&pre) * &mask;
        out.push((scored, pre, mask));
    }
    Ok(out)
}

/// Negative log-probability of the true class under a softmax, computed via
/// log-sum-exp.
pub fn cross_entropy(logits: &Array1<f64>, label: usize) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Article cross-entropy plus the weighted sum of per-entity cross-entropies.
pub fn joint_loss(
    article_out: &Array1<f64>,
    entity_outs: &[Array1<f64>],
    article_label: usize,
    entity_labels: &[usize],
    entity_class_weights: [f64; 2],
) -> f64 {
    let mut loss = cross_entropy(article_out, article_label);
    for (out, &label) in entity_outs.iter().zip(entity_labels) {
        loss += entity_class_weights[label] * cross_entropy(out, label);
    }
    loss
}

pub fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp = logits.mapv(|v| (v - m).exp());
    let sum = exp.sum();
    exp / sum
}

/// One document's full forward pass with everything the backward pass needs.
#[derive(Debug)]
pub struct DocForward {
    pub encoding: EncodeCache,
    /// Aggregation neighbor lists actually used.
    pub neighbors: Vec<Vec<usize>>,
    /// Per graph node, the embedding table row its initial features came from.
    pub emb_rows: Vec<usize>,
    /// Per-layer GCN states, `h^1` first.
    pub gcn_states: Vec<Array2<f64>>,
    pub agg: Array1<f64>,
    pub fuse_pre: Array1<f64>,
    pub fuse_mask: Array1<f64>,
    pub article_out: Array1<f64>,
    /// Per doc entity: (output, pre-ReLU, dropout mask).
    pub entity: Vec<(Array1<f64>, Array1<f64>, Array1<f64>)>,
    pub doc_entity_nodes: Vec<usize>,
    pub article_label: usize,
    pub entity_labels: Vec<usize>,
}

impl DocForward {
    pub fn loss(&self, weights: [f64; 2], use_graph: bool) -> f64 {
        let entity_outs: Vec<Array1<f64>> =
            self.entity.iter().map(|(o, _, _)| o.clone()).collect();
        if use_graph {
            joint_loss(
                &self.article_out,
                &entity_outs,
                self.article_label,
                &self.entity_labels,
                weights,
            )
        } else {
            cross_entropy(&self.article_out, self.article_label)
        }
    }
}

pub fn forward_doc(
    doc: &Document,
    graph: &FactualGraph,
    params: &DetectorParams,
    mode: RunMode,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<DocForward, DetectorError> {
    let encoding = encode_text(&doc.text, &params.encoder);
    let neighbors = params.neighbor_lists(graph);
    let emb_rows: Vec<usize> = graph
        .nodes
        .iter()
        .map(|n| params.embeddings.row_of(n.kind, &n.surface))
        .collect();
    let h1 = params.embeddings.initial_features(graph);
    let gcn_states = gcn_forward(&neighbors, &h1, &params.gcn)?;
    let last = gcn_states.last().expect("at least the input layer");
    let (article_out, fuse_pre, fuse_mask, agg) = fuse_detail(
        &encoding.doc_vec,
        last,
        &graph.doc_entity_nodes,
        params,
        mode,
        &mut rng,
    )?;
    let entity = entity_detail(last, &graph.doc_entity_nodes, params, mode, &mut rng)?;
    let article_label = usize::from(doc.label == Label::Manipulated);
    let entity_labels: Vec<usize> = graph
        .doc_entity_nodes
        .iter()
        .map(|&v| usize::from(doc.manipulated_surfaces.contains(&graph.nodes[v].surface)))
        .collect();
    Ok(DocForward {
        encoding,
        neighbors,
        emb_rows,
        gcn_states,
        agg,
        fuse_pre,
        fuse_mask,
        article_out,
        entity,
        doc_entity_nodes: graph.doc_entity_nodes.clone(),
        article_label,
        entity_labels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityPrediction {
    pub surface: String,
    pub manipulated: bool,
    pub probability_manipulated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub doc_id: String,
    pub label: Label,
    /// Softmax over the infer-mode article scores: [human, manipulated].
    pub probabilities: [f64; 2],
    pub entities: Vec<EntityPrediction>,
}

/// Deterministic infer-mode prediction. Exactly equal scores resolve to the
/// index-0 class (human written / not manipulated).
pub fn predict(
    doc: &Document,
    graph: &FactualGraph,
    params: &DetectorParams,
) -> Result<Prediction, DetectorError> {
    let fwd = forward_doc(doc, graph, params, RunMode::Infer, None)?;
    let probs = softmax(&fwd.article_out);
    let label = if fwd.article_out[1] > fwd.article_out[0] {
        Label::Manipulated
    } else {
        Label::HumanWritten
    };
    let entities = fwd
        .doc_entity_nodes
        .iter()
        .zip(&fwd.entity)
        .map(|(&v, (out, _, _))| {
            let p = softmax(out);
            EntityPrediction {
                surface: graph.nodes[v].surface.clone(),
                manipulated: out[1] > out[0],
                probability_manipulated: p[1],
            }
        })
        .collect();
    Ok(Prediction {
        doc_id: doc.id.clone(),
        label,
        probabilities: [probs[0], probs[1]],
        entities,
    })
}

/// Batch prediction; equals per-document [`predict`] element-wise.
pub fn predict_batch(
    docs: &[Document],
    graphs: &[FactualGraph],
    params: &DetectorParams,
) -> Result<Vec<Prediction>, DetectorError> {
    docs.iter()
        .zip(graphs)
        .map(|(d, g)| predict(d, g, params))
        .collect()
}
