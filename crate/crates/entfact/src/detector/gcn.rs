//! Graph convolution layers with mean aggregation over in-neighbors.

use ndarray::{Array1, Array2};

use super::DetectorError;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GcnLayerParams {
    /// d_out x d_in.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl GcnLayerParams {
    pub fn d_in(&self) -> usize {
        self.w.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.w.nrows()
    }
}

/// Stacked GCN forward pass.
///
/// `h_v^{k+1} = tanh((1/|N(v)|) sum_{u in N(v)} W^k h_u^k + b^k)`, with the
/// zero aggregate for neighborless nodes, i.e. `tanh(b^k)`. Neighbor sums run
/// in ascending node-id order (the lists are sorted), which fixes the float
/// summation order. Returns every layer's states, `h^1` first.
pub fn gcn_forward(
    neighbors: &[Vec<usize>],
    h1: &Array2<f64>,
    layers: &[GcnLayerParams],
) -> Result<Vec<Array2<f64>>, DetectorError> {
    if neighbors.len() != h1.nrows() {
        return Err(DetectorError::ShapeMismatch {
            context: format!(
                "{} neighbor lists for {} feature rows",
                neighbors.len(),
                h1.nrows()
            ),
        });
    }
    let mut states = Vec::with_capacity(layers.len() + 1);
    states.push(h1.clone());
    for (k, layer) in layers.iter().enumerate() {
        let h = states.last().unwrap();
        if layer.d_in() != h.ncols() {
            return Err(DetectorError::ShapeMismatch {
                context: format!(
                    "layer {k} expects width {}, got {}",
                    layer.d_in(),
                    h.ncols()
                ),
            });
        }
        let mut next = Array2::zeros((h.nrows(), layer.d_out()));
        for v in 0..h.nrows() {
            let pre = layer_pre_activation(neighbors, h, layer, v);
            next.row_mut(v).assign(&pre.mapv(f64::tanh));
        }
        states.push(next);
    }
    Ok(states)
}

/// The affine pre-activation of one node at one layer.
pub(crate) fn layer_pre_activation(
    neighbors: &[Vec<usize>],
    h: &Array2<f64>,
    layer: &GcnLayerParams,
    v: usize,
) -> Array1<f64> {
    let ns = &neighbors[v];
    if ns.is_empty() {
        return layer.b.clone();
    }
    let mut agg = Array1::zeros(h.ncols());
    for &u in ns {
        agg += &h.row(u);
    }
    agg /= ns.len() as f64;
    layer.w.dot(&agg) + &layer.b
}

/// Mean of neighbor states, used by the backward pass.
pub(crate) fn neighbor_mean(neighbors: &[Vec<usize>], h: &Array2<f64>, v: usize) -> Array1<f64> {
    let ns = &neighbors[v];
    let mut agg = Array1::zeros(h.ncols());
    for &u in ns {
        agg += &h.row(u);
    }
    if !ns.is_empty() {
        agg /= ns.len() as f64;
    }
    agg
}
