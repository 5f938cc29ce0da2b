//! Entity replacement: frequency tables, target selection, the three
//! replacement strategies, and labeled dataset assembly.

mod apply;
mod dataset;
mod frequency;
mod propose;

pub use apply::apply_replacement;
pub use dataset::{
    build_dataset, load_records, save_records, DatasetBuild, DatasetSplits, GeneratedContext,
    ManipulationFailure, SplitFractions,
};
pub use frequency::{build_frequency_table, FrequencyTable};
pub use propose::{
    pick_target_entities, propose_replacement_generated, propose_replacement_random, Band,
    GeneratedProposal,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EntityType;
use crate::generator::GeneratorError;

pub const DEFAULT_BAND_SIZE: usize = 5000;
pub const DEFAULT_MAX_ATTEMPTS: usize = 10;
/// Tokens requested from the generator per attempt.
pub const DEFAULT_GENERATION_TOKENS: usize = 8;

/// How the replacement entity is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReplacementStrategy {
    /// Uniform pick from the top `band_size` entries of the type's rank list.
    RandomMostFrequent { band_size: usize },
    /// Uniform pick from the bottom `band_size` entries.
    RandomLeastFrequent { band_size: usize },
    /// Constrained generative proposal with up to `max_attempts` tries.
    Generated { max_attempts: usize },
}

impl ReplacementStrategy {
    pub fn most_frequent() -> Self {
        ReplacementStrategy::RandomMostFrequent {
            band_size: DEFAULT_BAND_SIZE,
        }
    }

    pub fn least_frequent() -> Self {
        ReplacementStrategy::RandomLeastFrequent {
            band_size: DEFAULT_BAND_SIZE,
        }
    }

    pub fn generated() -> Self {
        ReplacementStrategy::Generated {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn validate(&self) -> Result<(), ManipulateError> {
        let ok = match self {
            ReplacementStrategy::RandomMostFrequent { band_size }
            | ReplacementStrategy::RandomLeastFrequent { band_size } => *band_size >= 1,
            ReplacementStrategy::Generated { max_attempts } => *max_attempts >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(ManipulateError::InvalidStrategy)
        }
    }
}

/// Provenance of one applied replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationRecord {
    pub doc_id: String,
    pub original_surface: String,
    pub replacement_surface: String,
    pub etype: EntityType,
    pub strategy: ReplacementStrategy,
    pub attempts_used: usize,
    pub fallback_used: bool,
}

/// Mutual case-insensitive substring test; the reading of "no string overlap".
pub fn surfaces_overlap(a: &str, b: &str) -> bool {
    let la = a.to_lowercase();
    let lb = b.to_lowercase();
    la.contains(&lb) || lb.contains(&la)
}

#[derive(Debug, Error)]
pub enum ManipulateError {
    #[error("document `{doc_id}` has no entity mentions")]
    NoEntities { doc_id: String },
    #[error("no eligible {etype} surface remains in the band")]
    EmptyBand { etype: EntityType },
    #[error("surface `{surface}` not found among document mentions")]
    SurfaceNotFound { surface: String },
    #[error("replacement must differ from the original surface")]
    InvalidReplacement,
    #[error("strategy parameters out of range")]
    InvalidStrategy,
    #[error("fallback strategy must be a random band strategy")]
    InvalidFallback,
    #[error("generated strategy requires a generator context")]
    MissingGeneratorContext,
    #[error("split fractions sum to {0}, expected 1")]
    InvalidFractions(f64),
    #[error("split `{split}` would be empty")]
    InsufficientCorpus { split: &'static str },
    #[error("input documents must be human written and annotated; `{doc_id}` is not")]
    NotHumanInput { doc_id: String },
    #[error(transparent)]
    GeneratorUnavailable(#[from] GeneratorError),
    #[error("cannot write {path}: {source}")]
    WriteFailed {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    ReadFailed {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manipulation record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
}
