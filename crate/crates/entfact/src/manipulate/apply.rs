//! In-place replacement of all occurrences of a target surface.

use crate::corpus::{assign_sentence_indices, Document, EntityMention, Label};

use super::ManipulateError;

/// Replaces every mention whose surface equals `old` with `new`, splicing the
/// text and shifting all downstream spans. The result is labeled manipulated
/// and `new` is recorded in `manipulated_surfaces`. Text outside the replaced
/// spans is byte-identical to the input.
pub fn apply_replacement(
    doc: &Document,
    old: &str,
    new: &str,
) -> Result<Document, ManipulateError> {
    if old == new {
        return Err(ManipulateError::InvalidReplacement);
    }
    if !doc.mentions.iter().any(|m| m.surface == old) {
        return Err(ManipulateError::SurfaceNotFound {
            surface: old.to_string(),
        });
    }

    let mut text = String::with_capacity(doc.text.len() + new.len());
    let mut mentions: Vec<EntityMention> = Vec::with_capacity(doc.mentions.len());
    let mut cursor = 0usize;
    for m in &doc.mentions {
        text.push_str(&doc.text[cursor..m.start]);
        let start = text.len();
        let surface = if m.surface == old { new } else { &m.surface };
        text.push_str(surface);
        mentions.push(EntityMention {
            surface: surface.to_string(),
            etype: m.etype,
            start,
            end: start + surface.len(),
            sentence_index: 0,
        });
        cursor = m.end;
    }
    text.push_str(&doc.text[cursor..]);
    assign_sentence_indices(&text, &mut mentions);

    let mut manipulated_surfaces = doc.manipulated_surfaces.clone();
    // A previously written-in surface that has now been replaced away no
    // longer matches any mention.
    manipulated_surfaces.remove(old);
    manipulated_surfaces.insert(new.to_string());

    let out = Document {
        id: doc.id.clone(),
        text,
        mentions,
        label: Label::Manipulated,
        manipulated_surfaces,
    };
    debug_assert_eq!(out.validate(), Ok(()));
    Ok(out)
}
