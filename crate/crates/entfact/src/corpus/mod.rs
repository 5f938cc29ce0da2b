//! News corpus types: documents, typed entity mentions, sentence spans.

mod annotate;
mod io;
mod sentence;

pub use annotate::Annotator;
pub use io::{load_documents, load_gazetteer, save_documents, CorpusFormat};
pub use sentence::split_sentences;

use std::collections::BTreeSet;
use thiserror::Error;

/// The three entity types the toolkit manipulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum EntityType {
    #[serde(rename = "PER")]
    Person,
    #[serde(rename = "ORG")]
    Organization,
    #[serde(rename = "LOC")]
    Location,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [
        EntityType::Person,
        EntityType::Organization,
        EntityType::Location,
    ];

    /// Wire tag used in the JSONL and TSV formats.
    pub fn tag(&self) -> &'static str {
        match self {
            EntityType::Person => "PER",
            EntityType::Organization => "ORG",
            EntityType::Location => "LOC",
        }
    }

    pub fn from_tag(tag: &str) -> Option<EntityType> {
        match tag {
            "PER" => Some(EntityType::Person),
            "ORG" => Some(EntityType::Organization),
            "LOC" => Some(EntityType::Location),
            _ => None,
        }
    }
}

impl std::fmt::Display for EntityType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A typed entity occurrence in a document.
///
/// `start`/`end` are byte offsets into the UTF-8 document text; the half-open
/// interval `[start, end)` must slice to exactly `surface`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    pub surface: String,
    pub etype: EntityType,
    pub start: usize,
    pub end: usize,
    /// Index of the sentence (per [`split_sentences`]) containing `start`.
    pub sentence_index: usize,
}

/// Article-level class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Label {
    #[serde(rename = "human")]
    HumanWritten,
    #[serde(rename = "manipulated")]
    Manipulated,
}

/// A news article with its entity annotations and manipulation provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    /// Sorted by `start`; pairwise non-overlapping.
    pub mentions: Vec<EntityMention>,
    pub label: Label,
    /// Surfaces that were written in by a manipulation; empty iff human.
    pub manipulated_surfaces: BTreeSet<String>,
}

/// A sentence's byte interval `[start, end)` in the document text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceSpan {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("invalid gazetteer line {line}: {reason}")]
    MalformedGazetteer { line: usize, reason: String },
    #[error("cannot write {path}: {source}")]
    WriteFailed {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Document {
    /// A fresh human-written document with no annotations.
    pub fn new_human(id: impl Into<String>, text: impl Into<String>) -> Document {
        Document {
            id: id.into(),
            text: text.into(),
            mentions: Vec::new(),
            label: Label::HumanWritten,
            manipulated_surfaces: BTreeSet::new(),
        }
    }

    /// Distinct mention surfaces with their types, in first-mention order.
    pub fn distinct_surfaces(&self) -> Vec<(&str, EntityType)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for m in &self.mentions {
            if seen.insert(m.surface.as_str()) {
                out.push((m.surface.as_str(), m.etype));
            }
        }
        out
    }

    /// Checks every structural invariant; returns the first violation found.
    pub fn validate(&self) -> Result<(), String> {
        let mut prev_end = 0usize;
        let mut prev_start: Option<usize> = None;
        for m in &self.mentions {
            if m.start >= m.end || m.end > self.text.len() {
                return Err(format!(
                    "mention `{}` has bad span [{}, {})",
                    m.surface, m.start, m.end
                ));
            }
            match self.text.get(m.start..m.end) {
                Some(slice) if slice == m.surface => {}
                _ => {
                    return Err(format!(
                        "mention `{}` does not match text at [{}, {})",
                        m.surface, m.start, m.end
                    ))
                }
            }
            if let Some(ps) = prev_start {
                if m.start < ps {
                    return Err("mentions not sorted by start".into());
                }
            }
            if prev_start.is_some() && m.start < prev_end {
                return Err(format!(
                    "mention `{}` at {} overlaps previous mention ending at {}",
                    m.surface, m.start, prev_end
                ));
            }
            prev_start = Some(m.start);
            prev_end = m.end;
        }
        for s in &self.manipulated_surfaces {
            if !self.mentions.iter().any(|m| &m.surface == s) {
                return Err(format!("manipulated surface `{s}` matches no mention"));
            }
        }
        match self.label {
            Label::Manipulated if self.manipulated_surfaces.is_empty() => {
                Err("manipulated document with no manipulated surfaces".into())
            }
            Label::HumanWritten if !self.manipulated_surfaces.is_empty() => {
                Err("human document with manipulated surfaces".into())
            }
            _ => Ok(()),
        }
    }
}

/// Recomputes `sentence_index` for each mention from the current text.
pub(crate) fn assign_sentence_indices(text: &str, mentions: &mut [EntityMention]) {
    let sentences = split_sentences(text);
    for m in mentions.iter_mut() {
        m.sentence_index = sentence_index_of(&sentences, m.start);
    }
}

fn sentence_index_of(sentences: &[SentenceSpan], pos: usize) -> usize {
    // Mentions start on non-whitespace, which sentence spans jointly cover;
    // fall back to the nearest preceding span for robustness.
    let mut best = 0;
    for s in sentences {
        if s.start <= pos && pos < s.end {
            return s.index;
        }
        if s.start <= pos {
            best = s.index;
        }
    }
    best
}
