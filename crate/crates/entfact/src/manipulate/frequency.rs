//! Corpus-wide entity frequency tables and rank lists.

use std::collections::HashMap;

use crate::corpus::{Document, EntityType};

/// Per-type surface counts plus a rank list sorted by (count desc, surface asc),
/// which also defines band boundaries deterministically.
#[derive(Debug, Clone, Default)]
pub struct FrequencyTable {
    counts: [HashMap<String, u32>; 3],
    ranks: [Vec<String>; 3],
}

fn type_index(etype: EntityType) -> usize {
    match etype {
        EntityType::Person => 0,
        EntityType::Organization => 1,
        EntityType::Location => 2,
    }
}

impl FrequencyTable {
    pub fn count(&self, etype: EntityType, surface: &str) -> u32 {
        self.counts[type_index(etype)]
            .get(surface)
            .copied()
            .unwrap_or(0)
    }

    /// Surfaces of one type, most frequent first.
    pub fn rank_list(&self, etype: EntityType) -> &[String] {
        &self.ranks[type_index(etype)]
    }
}

/// Counts every mention of every surface across the documents.
pub fn build_frequency_table(docs: &[Document]) -> FrequencyTable {
    let mut table = FrequencyTable::default();
    for doc in docs {
        for m in &doc.mentions {
            *table.counts[type_index(m.etype)]
                .entry(m.surface.clone())
                .or_insert(0) += 1;
        }
    }
    for i in 0..3 {
        let counts = &table.counts[i];
        let mut rank: Vec<String> = counts.keys().cloned().collect();
        rank.sort_by(|a, b| counts[b].cmp(&counts[a]).then_with(|| a.cmp(b)));
        table.ranks[i] = rank;
    }
    table
}
