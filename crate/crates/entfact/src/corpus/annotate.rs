//! Deterministic gazetteer annotator.
//!
//! A desk-scale substitute for a statistical NER: surfaces are matched
//! verbatim (case-sensitive), longest-match-first, left-to-right, on word
//! boundaries, producing non-overlapping mentions.

use super::{assign_sentence_indices, Document, EntityMention, EntityType};

/// Gazetteer-backed entity annotator.
#[derive(Debug, Clone)]
pub struct Annotator {
    /// Sorted by (byte length desc, surface asc) so the scan is
    /// longest-match-first with a deterministic tie-break.
    entries: Vec<(String, EntityType)>,
}

impl Annotator {
    pub fn new(gazetteer: impl IntoIterator<Item = (String, EntityType)>) -> Annotator {
        let mut entries: Vec<(String, EntityType)> = gazetteer
            .into_iter()
            .filter(|(s, _)| !s.is_empty())
            .collect();
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        entries.dedup_by(|a, b| a.0 == b.0);
        Annotator { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Returns a copy of `doc` annotated with all gazetteer matches.
    pub fn annotate(&self, doc: &Document) -> Document {
        let mut out = doc.clone();
        out.mentions = self.mentions_in(&doc.text);
        out
    }

    /// All non-overlapping, boundary-aligned, longest-match-first occurrences
    /// of gazetteer surfaces in `text`.
    pub fn mentions_in(&self, text: &str) -> Vec<EntityMention> {
        let mut mentions: Vec<EntityMention> = Vec::new();
        let mut pos = 0usize;
        while pos < text.len() {
            if !text.is_char_boundary(pos) {
                pos += 1;
                continue;
            }
            let mut matched = None;
            for (surface, etype) in &self.entries {
                let end = pos + surface.len();
                if end > text.len() {
                    continue;
                }
                if text.get(pos..end) == Some(surface.as_str())
                    && on_word_boundary(text, pos, end)
                {
                    matched = Some((surface.clone(), *etype, end));
                    break;
                }
            }
            if let Some((surface, etype, end)) = matched {
                mentions.push(EntityMention {
                    surface,
                    etype,
                    start: pos,
                    end,
                    sentence_index: 0,
                });
                pos = end;
            } else {
                pos += text[pos..].chars().next().map_or(1, char::len_utf8);
            }
        }
        assign_sentence_indices(text, &mut mentions);
        mentions
    }
}

fn on_word_boundary(text: &str, start: usize, end: usize) -> bool {
    let before_ok = start == 0
        || text[..start]
            .chars()
            .next_back()
            .map(|c| !c.is_alphanumeric())
            .unwrap_or(true);
    let after_ok = end == text.len()
        || text[end..]
            .chars()
            .next()
            .map(|c| !c.is_alphanumeric())
            .unwrap_or(true);
    before_ok && after_ok
}
