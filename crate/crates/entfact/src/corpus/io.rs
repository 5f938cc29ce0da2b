//! JSONL corpus and TSV gazetteer input/output.
//!
//! Annotated corpus format, one object per line:
//! `{"id", "text", "label": "human"|"manipulated", "manipulated_surfaces": [..],
//!   "mentions": [{"surface", "type": "PER"|"ORG"|"LOC", "start", "end"}]}`
//! with byte offsets into the UTF-8 text.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{assign_sentence_indices, CorpusError, Document, EntityMention, EntityType, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CorpusFormat {
    #[serde(rename = "jsonl-annotated")]
    JsonlAnnotated,
    #[serde(rename = "jsonl-raw")]
    JsonlRaw,
}

#[derive(Serialize, Deserialize)]
struct MentionWire {
    surface: String,
    #[serde(rename = "type")]
    etype: String,
    start: usize,
    end: usize,
}

#[derive(Serialize, Deserialize)]
struct RecordWire {
    id: String,
    text: String,
    #[serde(default = "default_label")]
    label: Label,
    #[serde(default)]
    manipulated_surfaces: Vec<String>,
    #[serde(default)]
    mentions: Vec<MentionWire>,
}

fn default_label() -> Label {
    Label::HumanWritten
}

#[derive(Deserialize)]
struct RawRecordWire {
    id: String,
    text: String,
}

/// Loads a JSONL corpus, validating every record.
///
/// Raw records get empty mention lists pending annotation. Errors identify
/// the offending 1-based line number.
pub fn load_documents(
    path: impl AsRef<Path>,
    format: CorpusFormat,
) -> Result<Vec<Document>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut docs = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::UnreadableFile {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = match format {
            CorpusFormat::JsonlAnnotated => parse_annotated(&line, line_no)?,
            CorpusFormat::JsonlRaw => parse_raw(&line, line_no)?,
        };
        if !seen_ids.insert(doc.id.clone()) {
            return Err(CorpusError::MalformedRecord {
                line: line_no,
                reason: format!("duplicate id `{}`", doc.id),
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

fn parse_annotated(line: &str, line_no: usize) -> Result<Document, CorpusError> {
    let wire: RecordWire =
        serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
    let mut mentions = Vec::with_capacity(wire.mentions.len());
    for m in wire.mentions {
        let etype = EntityType::from_tag(&m.etype).ok_or_else(|| CorpusError::MalformedRecord {
            line: line_no,
            reason: format!("unknown entity type `{}`", m.etype),
        })?;
        mentions.push(EntityMention {
            surface: m.surface,
            etype,
            start: m.start,
            end: m.end,
            sentence_index: 0,
        });
    }
    mentions.sort_by_key(|m| (m.start, m.end));
    assign_sentence_indices(&wire.text, &mut mentions);
    let doc = Document {
        id: wire.id,
        text: wire.text,
        mentions,
        label: wire.label,
        manipulated_surfaces: wire.manipulated_surfaces.into_iter().collect(),
    };
    doc.validate().map_err(|reason| CorpusError::MalformedRecord {
        line: line_no,
        reason,
    })?;
    Ok(doc)
}

fn parse_raw(line: &str, line_no: usize) -> Result<Document, CorpusError> {
    let wire: RawRecordWire =
        serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
    Ok(Document::new_human(wire.id, wire.text))
}

/// Writes documents in the annotated JSONL format, one per line.
pub fn save_documents(docs: &[Document], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| CorpusError::WriteFailed {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    for doc in docs {
        let wire = RecordWire {
            id: doc.id.clone(),
            text: doc.text.clone(),
            label: doc.label,
            manipulated_surfaces: doc.manipulated_surfaces.iter().cloned().collect(),
            mentions: doc
                .mentions
                .iter()
                .map(|m| MentionWire {
                    surface: m.surface.clone(),
                    etype: m.etype.tag().to_string(),
                    start: m.start,
                    end: m.end,
                })
                .collect(),
        };
        let json = serde_json::to_string(&wire).expect("wire record serializes");
        writeln!(w, "{json}").map_err(|source| CorpusError::WriteFailed {
            path: path.display().to_string(),
            source,
        })?;
    }
    w.flush().map_err(|source| CorpusError::WriteFailed {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a two-column `surface<TAB>type` gazetteer.
pub fn load_gazetteer(path: impl AsRef<Path>) -> Result<Vec<(String, EntityType)>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::UnreadableFile {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let (surface, tag) = line
            .split_once('\t')
            .ok_or_else(|| CorpusError::MalformedGazetteer {
                line: line_no,
                reason: "expected surface<TAB>type".into(),
            })?;
        if surface.is_empty() {
            return Err(CorpusError::MalformedGazetteer {
                line: line_no,
                reason: "empty surface".into(),
            });
        }
        let etype =
            EntityType::from_tag(tag.trim()).ok_or_else(|| CorpusError::MalformedGazetteer {
                line: line_no,
                reason: format!("unknown entity type `{}`", tag.trim()),
            })?;
        entries.push((surface.to_string(), etype));
    }
    Ok(entries)
}
