//! Seeded word n-gram model with backoff, trained on the human corpus.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GeneratorError, GeneratorPort};

/// Word n-gram generator.
///
/// Tokens are whitespace-delimited and keep their original casing and
/// punctuation, so continuations look like corpus text and can start with an
/// entity surface. Sampling backs off from the longest context to unigrams.
pub struct NgramGenerator {
    order: usize,
    /// context (length 1..order-1) -> continuations sorted by token, with counts.
    contexts: HashMap<Vec<String>, Vec<(String, u32)>>,
    unigrams: Vec<(String, u32)>,
    rng: ChaCha8Rng,
}

impl NgramGenerator {
    /// Trains on the given texts. `order` of 3 means trigram contexts of two
    /// tokens backing off to one and zero.
    pub fn train<'a>(texts: impl IntoIterator<Item = &'a str>, order: usize, seed: u64) -> Self {
        assert!(order >= 2, "order must be at least 2");
        let mut contexts: HashMap<Vec<String>, HashMap<String, u32>> = HashMap::new();
        let mut unigrams: HashMap<String, u32> = HashMap::new();
        for text in texts {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            for (i, tok) in tokens.iter().enumerate() {
                *unigrams.entry(tok.to_string()).or_insert(0) += 1;
                for ctx_len in 1..order {
                    if i >= ctx_len {
                        let ctx: Vec<String> = tokens[i - ctx_len..i]
                            .iter()
                            .map(|t| t.to_string())
                            .collect();
                        *contexts
                            .entry(ctx)
                            .or_default()
                            .entry(tok.to_string())
                            .or_insert(0) += 1;
                    }
                }
            }
        }
        let contexts = contexts
            .into_iter()
            .map(|(ctx, conts)| {
                let mut v: Vec<(String, u32)> = conts.into_iter().collect();
                v.sort_by(|a, b| a.0.cmp(&b.0));
                (ctx, v)
            })
            .collect();
        let mut unigrams: Vec<(String, u32)> = unigrams.into_iter().collect();
        unigrams.sort_by(|a, b| a.0.cmp(&b.0));
        NgramGenerator {
            order,
            contexts,
            unigrams,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn sample_next(&mut self, context: &[String]) -> Option<String> {
        let max_ctx = (self.order - 1).min(context.len());
        for ctx_len in (1..=max_ctx).rev() {
            let key = context[context.len() - ctx_len..].to_vec();
            if let Some(conts) = self.contexts.get(&key) {
                return Some(weighted_pick(conts, &mut self.rng));
            }
        }
        if self.unigrams.is_empty() {
            None
        } else {
            let unigrams = self.unigrams.clone();
            Some(weighted_pick(&unigrams, &mut self.rng))
        }
    }
}

fn weighted_pick(items: &[(String, u32)], rng: &mut ChaCha8Rng) -> String {
    let total: u64 = items.iter().map(|(_, c)| *c as u64).sum();
    let mut draw = rng.random_range(0..total);
    for (tok, c) in items {
        if draw < *c as u64 {
            return tok.clone();
        }
        draw -= *c as u64;
    }
    items.last().expect("non-empty").0.clone()
}

impl GeneratorPort for NgramGenerator {
    fn generate(&mut self, prompt: &str, max_tokens: usize) -> Result<String, GeneratorError> {
        let mut context: Vec<String> = prompt
            .split_whitespace()
            .map(|t| t.to_string())
            .collect();
        let mut out: Vec<String> = Vec::with_capacity(max_tokens);
        for _ in 0..max_tokens {
            match self.sample_next(&context) {
                Some(tok) => {
                    context.push(tok.clone());
                    out.push(tok);
                }
                None => break,
            }
        }
        Ok(out.join(" "))
    }
}
