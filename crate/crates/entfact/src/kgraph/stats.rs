//! KB coverage statistics over a document set.

use crate::corpus::{Document, Label};

use super::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CoverageStats {
    /// Average over documents of the percentage of distinct entity surfaces
    /// with at least one KB triple.
    pub avg_entity_coverage_pct: f64,
    /// Average over manipulated documents of the percentage of manipulated
    /// surfaces present in the KB; absent when there are no manipulated docs.
    pub avg_known_manipulated_pct: Option<f64>,
}

pub fn kb_coverage_stats(docs: &[Document], kb: &KnowledgeBase) -> CoverageStats {
    let mut coverage_sum = 0.0;
    let mut coverage_n = 0usize;
    let mut known_sum = 0.0;
    let mut known_n = 0usize;

    for doc in docs {
        let surfaces = doc.distinct_surfaces();
        if !surfaces.is_empty() {
            let covered = surfaces
                .iter()
                .filter(|(s, _)| kb.contains_subject(s))
                .count();
            coverage_sum += 100.0 * covered as f64 / surfaces.len() as f64;
            coverage_n += 1;
        }
        if doc.label == Label::Manipulated && !doc.manipulated_surfaces.is_empty() {
            let known = doc
                .manipulated_surfaces
                .iter()
                .filter(|s| kb.contains_subject(s))
                .count();
            known_sum += 100.0 * known as f64 / doc.manipulated_surfaces.len() as f64;
            known_n += 1;
        }
    }

    CoverageStats {
        avg_entity_coverage_pct: if coverage_n > 0 {
            coverage_sum / coverage_n as f64
        } else {
            0.0
        },
        avg_known_manipulated_pct: if known_n > 0 {
            Some(known_sum / known_n as f64)
        } else {
            None
        },
    }
}
