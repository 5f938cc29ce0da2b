//! Unknown-manipulated-entity test subset.

use rand::seq::index::sample;

use crate::corpus::{Document, Label};
use crate::kgraph::KnowledgeBase;
use crate::seeding::rng_for;

/// Subset of a test set isolating manipulated documents whose manipulated
/// entities are all absent from the KB, balanced with an equal-count seeded
/// random sample of human documents.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct UnknownEntitySubset {
    /// Doc ids of qualifying manipulated documents.
    pub manipulated_ids: Vec<String>,
    /// Doc ids of the paired human sample.
    pub human_ids: Vec<String>,
    pub subset_size: usize,
    /// Subset size as a percentage of the full test set.
    pub percent_of_test: f64,
}

impl UnknownEntitySubset {
    pub fn contains(&self, id: &str) -> bool {
        self.manipulated_ids.iter().any(|d| d == id)
            || self.human_ids.iter().any(|d| d == id)
    }
}

pub fn unknown_entity_subset(
    test_docs: &[Document],
    kb: &KnowledgeBase,
    seed: u64,
) -> UnknownEntitySubset {
    let manipulated_ids: Vec<String> = test_docs
        .iter()
        .filter(|d| {
            d.label == Label::Manipulated
                && !d.manipulated_surfaces.is_empty()
                && d.manipulated_surfaces
                    .iter()
                    .all(|s| kb.one_hop(s).is_empty())
        })
        .map(|d| d.id.clone())
        .collect();

    let human_pool: Vec<&Document> = test_docs
        .iter()
        .filter(|d| d.label == Label::HumanWritten)
        .collect();
    let want = manipulated_ids.len().min(human_pool.len());
    let mut rng = rng_for(seed, "unknown-entity-subset");
    let mut picked: Vec<usize> = if want > 0 {
        sample(&mut rng, human_pool.len(), want).into_vec()
    } else {
        Vec::new()
    };
    picked.sort_unstable();
    let human_ids: Vec<String> = picked.iter().map(|&i| human_pool[i].id.clone()).collect();

    let subset_size = manipulated_ids.len() + human_ids.len();
    let percent_of_test = if test_docs.is_empty() {
        0.0
    } else {
        100.0 * subset_size as f64 / test_docs.len() as f64
    };
    UnknownEntitySubset {
        manipulated_ids,
        human_ids,
        subset_size,
        percent_of_test,
    }
}
