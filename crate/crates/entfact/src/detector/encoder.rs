//! Document encoder port.
//!
//! The default encoder is deliberately small: mean of trainable token
//! embeddings followed by an affine map and tanh. It stands in for a large
//! pretrained encoder's document vector; the fusion math downstream is
//! unchanged by the substitution.

use std::collections::HashMap;

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, Normal};

use crate::seeding::rng_for;

use super::embedding::INIT_STD;

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    /// (|vocab| + 1) x d_text; the last row is the shared OOV token.
    pub token_emb: Array2<f64>,
    /// d_text x d_text affine map applied to the token mean.
    pub proj: Array2<f64>,
    pub bias: Array1<f64>,
    pub oov_row: usize,
}

/// Lowercased maximal alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

impl EncoderParams {
    /// Builds the token vocabulary from training texts (first-seen order) and
    /// initializes all weights from the seed.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, d_text: usize, seed: u64) -> Self {
        let mut vocab = Vec::new();
        let mut index = HashMap::new();
        for text in texts {
            for tok in tokenize(text) {
                if !index.contains_key(&tok) {
                    index.insert(tok.clone(), vocab.len());
                    vocab.push(tok);
                }
            }
        }
        let rows = vocab.len() + 1;
        let mut rng = rng_for(seed, "encoder");
        let emb_init = Normal::new(0.0, INIT_STD).expect("valid std");
        let token_emb = Array2::from_shape_fn((rows, d_text), |_| emb_init.sample(&mut rng));
        let proj_init = Normal::new(0.0, (1.0 / d_text as f64).sqrt()).expect("valid std");
        let proj = Array2::from_shape_fn((d_text, d_text), |_| proj_init.sample(&mut rng));
        let bias = Array1::zeros(d_text);
        EncoderParams {
            oov_row: rows - 1,
            vocab,
            index,
            token_emb,
            proj,
            bias,
        }
    }

    pub fn d_text(&self) -> usize {
        self.token_emb.ncols()
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    /// Embedding row per token; an empty document maps to the single OOV row.
    pub fn token_rows(&self, text: &str) -> Vec<usize> {
        let rows: Vec<usize> = tokenize(text)
            .into_iter()
            .map(|t| self.index.get(&t).copied().unwrap_or(self.oov_row))
            .collect();
        if rows.is_empty() {
            vec![self.oov_row]
        } else {
            rows
        }
    }
}

#[derive(Debug)]
pub struct EncodeCache {
    pub token_rows: Vec<usize>,
    pub mean_emb: Array1<f64>,
    /// proj . mean + bias, the pre-tanh activation.
    pub pre: Array1<f64>,
    pub doc_vec: Array1<f64>,
}

/// doc_vec = tanh(proj . mean(token embeddings) + bias).
pub fn encode_text(text: &str, encoder: &EncoderParams) -> EncodeCache {
    let token_rows = encoder.token_rows(text);
    let mut mean_emb = Array1::zeros(encoder.d_text());
    for &row in &token_rows {
        mean_emb += &encoder.token_emb.row(row);
    }
    mean_emb /= token_rows.len() as f64;
    let pre = encoder.proj.dot(&mean_emb) + &encoder.bias;
    let doc_vec = pre.mapv(f64::tanh);
    EncodeCache {
        token_rows,
        mean_emb,
        pre,
        doc_vec,
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct EncoderWire {
    vocab: Vec<String>,
    token_emb: Array2<f64>,
    proj: Array2<f64>,
    bias: Array1<f64>,
    oov_row: usize,
}

impl serde::Serialize for EncoderParams {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EncoderWire {
            vocab: self.vocab.clone(),
            token_emb: self.token_emb.clone(),
            proj: self.proj.clone(),
            bias: self.bias.clone(),
            oov_row: self.oov_row,
        }
        .serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for EncoderParams {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = EncoderWire::deserialize(deserializer)?;
        let index = wire
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(EncoderParams {
            vocab: wire.vocab,
            index,
            token_emb: wire.token_emb,
            proj: wire.proj,
            bias: wire.bias,
            oov_row: wire.oov_row,
        })
    }
}
