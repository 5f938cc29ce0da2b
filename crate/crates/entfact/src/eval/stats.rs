//! Per-split dataset statistics.

use serde::Serialize;

use crate::corpus::{Document, EntityType};
use crate::kgraph::{kb_coverage_stats, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitStats {
    pub name: String,
    pub size: usize,
    /// Average length in whitespace-delimited words.
    pub avg_words: f64,
    pub pct_docs_with_person: f64,
    pub pct_docs_with_organization: f64,
    pub pct_docs_with_location: f64,
    pub avg_entity_coverage_pct: f64,
    /// Average % of manipulated surfaces known to the KB, over manipulated
    /// docs; absent when the split has none.
    pub avg_known_manipulated_pct: Option<f64>,
}

pub fn dataset_stats(splits: &[(&str, &[Document])], kb: &KnowledgeBase) -> Vec<SplitStats> {
    splits
        .iter()
        .map(|(name, docs)| split_stats(name, docs, kb))
        .collect()
}

fn split_stats(name: &str, docs: &[Document], kb: &KnowledgeBase) -> SplitStats {
    let n = docs.len();
    let avg_words = if n == 0 {
        0.0
    } else {
        docs.iter()
            .map(|d| d.text.split_whitespace().count() as f64)
            .sum::<f64>()
            / n as f64
    };
    let pct_with = |etype: EntityType| -> f64 {
        if n == 0 {
            return 0.0;
        }
        let hits = docs
            .iter()
            .filter(|d| d.mentions.iter().any(|m| m.etype == etype))
            .count();
        100.0 * hits as f64 / n as f64
    };
    let coverage = kb_coverage_stats(docs, kb);
    SplitStats {
        name: name.to_string(),
        size: n,
        avg_words,
        pct_docs_with_person: pct_with(EntityType::Person),
        pct_docs_with_organization: pct_with(EntityType::Organization),
        pct_docs_with_location: pct_with(EntityType::Location),
        avg_entity_coverage_pct: coverage.avg_entity_coverage_pct,
        avg_known_manipulated_pct: coverage.avg_known_manipulated_pct,
    }
}
