//! Target selection and replacement proposals.

use rand::Rng;

use crate::corpus::{Annotator, Document, EntityType};
use crate::generator::GeneratorPort;

use super::{surfaces_overlap, FrequencyTable, ManipulateError, ReplacementStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Top,
    Bottom,
}

/// Samples `min(max_k, distinct surfaces)` distinct target surfaces uniformly
/// without replacement, in seed-dependent order.
pub fn pick_target_entities(
    doc: &Document,
    max_k: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(String, EntityType)>, ManipulateError> {
    assert!(max_k >= 1, "max_k must be positive");
    let distinct = doc.distinct_surfaces();
    if distinct.is_empty() {
        return Err(ManipulateError::NoEntities {
            doc_id: doc.id.clone(),
        });
    }
    let k = max_k.min(distinct.len());
    let mut pool: Vec<(String, EntityType)> = distinct
        .into_iter()
        .map(|(s, t)| (s.to_string(), t))
        .collect();
    // Partial Fisher-Yates: the first k slots end up a uniform sample.
    for i in 0..k {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(k);
    Ok(pool)
}

/// Uniform sample from the top or bottom `band_size` entries of the type's
/// rank list, excluding `exclude` and anything string-overlapping it.
pub fn propose_replacement_random(
    table: &FrequencyTable,
    etype: EntityType,
    band: Band,
    band_size: usize,
    exclude: &str,
    rng: &mut impl Rng,
) -> Result<String, ManipulateError> {
    let rank = table.rank_list(etype);
    let width = band_size.min(rank.len());
    let slice = match band {
        Band::Top => &rank[..width],
        Band::Bottom => &rank[rank.len() - width..],
    };
    let eligible: Vec<&String> = slice
        .iter()
        .filter(|s| s.as_str() != exclude && !surfaces_overlap(s, exclude))
        .collect();
    if eligible.is_empty() {
        return Err(ManipulateError::EmptyBand { etype });
    }
    Ok(eligible[rng.random_range(0..eligible.len())].clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedProposal {
    pub surface: String,
    pub attempts_used: usize,
    pub fallback_used: bool,
}

/// Generative proposal: prompt the port with the article prefix before the
/// target's first occurrence and accept a continuation that starts with an
/// entity of the same type with no string overlap with the target. Falls back
/// to a random band proposal when all attempts are rejected.
#[allow(clippy::too_many_arguments)]
pub fn propose_replacement_generated(
    doc: &Document,
    target_surface: &str,
    target_type: EntityType,
    port: &mut dyn GeneratorPort,
    max_attempts: usize,
    fallback: &ReplacementStrategy,
    table: &FrequencyTable,
    annotator: &Annotator,
    max_tokens: usize,
    rng: &mut impl Rng,
) -> Result<GeneratedProposal, ManipulateError> {
    let first = doc
        .mentions
        .iter()
        .find(|m| m.surface == target_surface)
        .ok_or_else(|| ManipulateError::SurfaceNotFound {
            surface: target_surface.to_string(),
        })?;
    let prompt = &doc.text[..first.start];

    for attempt in 1..=max_attempts {
        let continuation = port.generate(prompt, max_tokens)?;
        if let Some(candidate) = leading_entity(annotator, &continuation) {
            if candidate.1 == target_type && !surfaces_overlap(&candidate.0, target_surface) {
                return Ok(GeneratedProposal {
                    surface: candidate.0,
                    attempts_used: attempt,
                    fallback_used: false,
                });
            }
        }
    }

    let band = match fallback {
        ReplacementStrategy::RandomMostFrequent { band_size } => (Band::Top, *band_size),
        ReplacementStrategy::RandomLeastFrequent { band_size } => (Band::Bottom, *band_size),
        ReplacementStrategy::Generated { .. } => return Err(ManipulateError::InvalidFallback),
    };
    let surface =
        propose_replacement_random(table, target_type, band.0, band.1, target_surface, rng)?;
    Ok(GeneratedProposal {
        surface,
        attempts_used: max_attempts,
        fallback_used: true,
    })
}

/// The entity the continuation starts with, if any.
fn leading_entity(annotator: &Annotator, continuation: &str) -> Option<(String, EntityType)> {
    let trimmed = continuation.trim_start();
    annotator
        .mentions_in(trimmed)
        .into_iter()
        .find(|m| m.start == 0)
        .map(|m| (m.surface, m.etype))
}
