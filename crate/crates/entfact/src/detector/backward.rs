//! Exact analytic gradients of the joint objective.

use ndarray::{Array1, Array2};

use super::gcn::{neighbor_mean, GcnLayerParams};
use super::model::{softmax, DocForward};
use super::DetectorParams;

/// Gradient accumulator mirroring every trainable tensor.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub embeddings: Array2<f64>,
    pub gcn: Vec<GcnLayerParams>,
    pub token_emb: Array2<f64>,
    pub proj: Array2<f64>,
    pub enc_bias: Array1<f64>,
    pub w_mtd: Array2<f64>,
    pub b_mtd: Array1<f64>,
    pub w_ec: Array2<f64>,
    pub b_ec: Array1<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &DetectorParams) -> Gradients {
        Gradients {
            embeddings: Array2::zeros(params.embeddings.matrix.raw_dim()),
            gcn: params
                .gcn
                .iter()
                .map(|l| GcnLayerParams {
                    w: Array2::zeros(l.w.raw_dim()),
                    b: Array1::zeros(l.b.raw_dim()),
                })
                .collect(),
            token_emb: Array2::zeros(params.encoder.token_emb.raw_dim()),
            proj: Array2::zeros(params.encoder.proj.raw_dim()),
            enc_bias: Array1::zeros(params.encoder.bias.raw_dim()),
            w_mtd: Array2::zeros(params.w_mtd.raw_dim()),
            b_mtd: Array1::zeros(params.b_mtd.raw_dim()),
            w_ec: Array2::zeros(params.w_ec.raw_dim()),
            b_ec: Array1::zeros(params.b_ec.raw_dim()),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for slice in self.slices_mut() {
            for v in slice {
                *v *= s;
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        let mut sq = 0.0;
        for slice in self.slices() {
            for v in slice {
                sq += v * v;
            }
        }
        sq.sqrt()
    }

    /// Flat views in a fixed order matching [`DetectorParams::slices_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = vec![self.embeddings.as_slice().expect("standard layout")];
        for l in &self.gcn {
            out.push(l.w.as_slice().expect("standard layout"));
            out.push(l.b.as_slice().expect("standard layout"));
        }
        out.push(self.token_emb.as_slice().expect("standard layout"));
        out.push(self.proj.as_slice().expect("standard layout"));
        out.push(self.enc_bias.as_slice().expect("standard layout"));
        out.push(self.w_mtd.as_slice().expect("standard layout"));
        out.push(self.b_mtd.as_slice().expect("standard layout"));
        out.push(self.w_ec.as_slice().expect("standard layout"));
        out.push(self.b_ec.as_slice().expect("standard layout"));
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![self.embeddings.as_slice_mut().expect("standard layout")];
        for l in &mut self.gcn {
            out.push(l.w.as_slice_mut().expect("standard layout"));
            out.push(l.b.as_slice_mut().expect("standard layout"));
        }
        out.push(self.token_emb.as_slice_mut().expect("standard layout"));
        out.push(self.proj.as_slice_mut().expect("standard layout"));
        out.push(self.enc_bias.as_slice_mut().expect("standard layout"));
        out.push(self.w_mtd.as_slice_mut().expect("standard layout"));
        out.push(self.b_mtd.as_slice_mut().expect("standard layout"));
        out.push(self.w_ec.as_slice_mut().expect("standard layout"));
        out.push(self.b_ec.as_slice_mut().expect("standard layout"));
        out
    }
}

impl DetectorParams {
    /// Trainable tensors flattened in the same order as [`Gradients::slices`],
    /// for optimizers and gradient checking.
    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![self
            .embeddings
            .matrix
            .as_slice_mut()
            .expect("standard layout")];
        for l in &mut self.gcn {
            out.push(l.w.as_slice_mut().expect("standard layout"));
            out.push(l.b.as_slice_mut().expect("standard layout"));
        }
        out.push(self.encoder.token_emb.as_slice_mut().expect("standard layout"));
        out.push(self.encoder.proj.as_slice_mut().expect("standard layout"));
        out.push(self.encoder.bias.as_slice_mut().expect("standard layout"));
        out.push(self.w_mtd.as_slice_mut().expect("standard layout"));
        out.push(self.b_mtd.as_slice_mut().expect("standard layout"));
        out.push(self.w_ec.as_slice_mut().expect("standard layout"));
        out.push(self.b_ec.as_slice_mut().expect("standard layout"));
        out
    }
}

/// target[i] += a[i] * b  (rank-one update).
fn add_outer(target: &mut Array2<f64>, a: &Array1<f64>, b: &Array1<f64>) {
    for (i, &ai) in a.iter().enumerate() {
        if ai != 0.0 {
            target.row_mut(i).scaled_add(ai, b);
        }
    }
}

fn onehot_grad(out: &Array1<f64>, label: usize, weight: f64) -> Array1<f64> {
    let mut d = softmax(out);
    d[label] -= 1.0;
    d * weight
}

/// Accumulates the exact gradient of one document's joint loss into `grads`.
///
/// The ReLU subgradient at exactly zero is zero; untouched embedding and
/// token rows receive zero gradient. Under the encoder-only ablation the
/// graph branch and entity objective contribute nothing.
pub fn backward(fwd: &DocForward, params: &DetectorParams, grads: &mut Gradients) {
    let use_graph = params.config.use_graph;
    let d_text = params.encoder.d_text();
    let last = fwd.gcn_states.last().expect("at least h1");
    let n_nodes = last.nrows();

    // Article head: softmax-CE then ReLU then dropout.
    let dout = onehot_grad(&fwd.article_out, fwd.article_label, 1.0);
    let dropped = &fwd.fuse_pre * &fwd.fuse_mask;
    let dpre: Array1<f64> = (0..2)
        .map(|i| {
            if dropped[i] > 0.0 {
                dout[i] * fwd.fuse_mask[i]
            } else {
                0.0
            }
        })
        .collect();
    let cat: Array1<f64> = fwd
        .encoding
        .doc_vec
        .iter()
        .chain(fwd.agg.iter())
        .cloned()
        .collect();
    add_outer(&mut grads.w_mtd, &dpre, &cat);
    grads.b_mtd += &dpre;
    let dcat = params.w_mtd.t().dot(&dpre);
    let ddoc = dcat.slice(ndarray::s![..d_text]).to_owned();
    let dagg = dcat.slice(ndarray::s![d_text..]).to_owned();

    // Gradient flowing into the last GCN layer's states.
    let mut dlast: Array2<f64> = Array2::zeros(last.raw_dim());
    if use_graph {
        let k = fwd.doc_entity_nodes.len() as f64;
        let factor = match params.config.aggregation {
            super::Aggregation::Mean => 1.0 / k,
            super::Aggregation::Sum => 1.0,
        };
        for &v in &fwd.doc_entity_nodes {
            dlast.row_mut(v).scaled_add(factor, &dagg);
        }

        // Entity head: softmax-CE then dropout then ReLU.
        let weights = params.config.entity_class_weights;
        for (i, &v) in fwd.doc_entity_nodes.iter().enumerate() {
            let (out, pre, mask) = &fwd.entity[i];
            let label = fwd.entity_labels[i];
            let dout_e = onehot_grad(out, label, weights[label]);
            let dpre_e: Array1<f64> = (0..2)
                .map(|j| {
                    if pre[j] > 0.0 {
                        dout_e[j] * mask[j]
                    } else {
                        0.0
                    }
                })
                .collect();
            let h_v = last.row(v).to_owned();
            add_outer(&mut grads.w_ec, &dpre_e, &h_v);
            grads.b_ec += &dpre_e;
            dlast.row_mut(v).scaled_add(1.0, &params.w_ec.t().dot(&dpre_e));
        }
    }

    // GCN layers, last to first.
    let mut dh = dlast;
    for k in (0..params.gcn.len()).rev() {
        let h_in = &fwd.gcn_states[k];
        let h_out = &fwd.gcn_states[k + 1];
        let layer = &params.gcn[k];
        let mut dh_in: Array2<f64> = Array2::zeros(h_in.raw_dim());
        for v in 0..n_nodes {
            let dout_v = dh.row(v);
            if dout_v.iter().all(|x| *x == 0.0) {
                continue;
            }
            // tanh'(pre) expressed through the cached output.
            let dpre_v: Array1<f64> = dout_v
                .iter()
                .zip(h_out.row(v).iter())
                .map(|(d, o)| d * (1.0 - o * o))
                .collect();
            grads.gcn[k].b += &dpre_v;
            let ns = &fwd.neighbors[v];
            if ns.is_empty() {
                continue;
            }
            let agg_v = neighbor_mean(&fwd.neighbors, h_in, v);
            add_outer(&mut grads.gcn[k].w, &dpre_v, &agg_v);
            let back = layer.w.t().dot(&dpre_v) / ns.len() as f64;
            for &u in ns {
                dh_in.row_mut(u).scaled_add(1.0, &back);
            }
        }
        dh = dh_in;
    }

    // dh now holds the gradient w.r.t. initial node features; scatter into
    // embedding rows (shared rows accumulate).
    for (v, &row) in fwd.emb_rows.iter().enumerate() {
        let dh_v = dh.row(v);
        if dh_v.iter().any(|x| *x != 0.0) {
            grads.embeddings.row_mut(row).scaled_add(1.0, &dh_v);
        }
    }

    // Encoder: tanh then affine then token mean.
    let dz: Array1<f64> = ddoc
        .iter()
        .zip(fwd.encoding.doc_vec.iter())
        .map(|(d, o)| d * (1.0 - o * o))
        .collect();
    add_outer(&mut grads.proj, &dz, &fwd.encoding.mean_emb);
    grads.enc_bias += &dz;
    let dm = params.encoder.proj.t().dot(&dz);
    let t = fwd.encoding.token_rows.len() as f64;
    let per_token = dm / t;
    for &row in &fwd.encoding.token_rows {
        grads.token_emb.row_mut(row).scaled_add(1.0, &per_token);
    }
}
