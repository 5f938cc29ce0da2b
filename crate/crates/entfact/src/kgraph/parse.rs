//! KB dump parsers: N-Triples and three-column TSV.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{KgraphError, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TripleFormat {
    #[serde(rename = "ntriples")]
    NTriples,
    #[serde(rename = "tsv")]
    Tsv,
}

#[derive(Debug)]
pub struct ParseOutcome {
    pub triples: Vec<Triple>,
    pub skipped_count: usize,
}

/// Parses a triple dump. Malformed lines are skipped and counted; if more than
/// half of the non-empty lines are malformed the format flag is presumed wrong
/// and the whole parse fails.
pub fn parse_triples(
    path: impl AsRef<Path>,
    format: TripleFormat,
) -> Result<ParseOutcome, KgraphError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| KgraphError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut triples = Vec::new();
    let mut skipped = 0usize;
    let mut total = 0usize;
    for line in reader.lines() {
        let line = line.map_err(|source| KgraphError::UnreadableFile {
            path: path.display().to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if format == TripleFormat::NTriples && trimmed.starts_with('#') {
            continue;
        }
        total += 1;
        let parsed = match format {
            TripleFormat::NTriples => parse_ntriples_line(trimmed),
            TripleFormat::Tsv => parse_tsv_line(trimmed),
        };
        match parsed {
            Some(t) => triples.push(t),
            None => skipped += 1,
        }
    }
    if total > 0 && skipped * 2 > total {
        return Err(KgraphError::FormatError {
            malformed: skipped,
            total,
        });
    }
    Ok(ParseOutcome {
        triples,
        skipped_count: skipped,
    })
}

/// `<s> <p> <o> .` with IRIs stripped to their final path or fragment segment
/// and `_` replaced by space; literal objects keep their content verbatim with
/// any datatype or language tag dropped.
fn parse_ntriples_line(line: &str) -> Option<Triple> {
    let body = line.strip_suffix('.')?.trim_end();
    let (subject, rest) = take_iri(body)?;
    let rest = rest.trim_start();
    let (relation, rest) = take_iri(rest)?;
    let rest = rest.trim_start();
    let object: String = if rest.starts_with('<') {
        let (obj, tail) = take_iri(rest)?;
        if !tail.trim().is_empty() {
            return None;
        }
        iri_surface(obj)
    } else if rest.starts_with('"') {
        take_literal(rest)?
    } else {
        return None;
    };
    let t = Triple {
        subject: iri_surface(subject),
        relation: iri_surface(relation),
        object,
    };
    if t.subject.trim().is_empty() || t.relation.trim().is_empty() || t.object.trim().is_empty() {
        return None;
    }
    Some(t)
}

/// Splits a leading `<...>` token, returning its content and the rest.
fn take_iri(s: &str) -> Option<(&str, &str)> {
    let inner = s.strip_prefix('<')?;
    let end = inner.find('>')?;
    Some((&inner[..end], &inner[end + 1..]))
}

/// Extracts the quoted content of a literal, dropping `^^<datatype>` or
/// `@lang` suffixes and requiring nothing else on the line.
fn take_literal(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?;
    // Find the closing unescaped quote.
    let mut escaped = false;
    let mut end = None;
    for (i, c) in inner.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '"' => {
                end = Some(i);
                break;
            }
            _ => {}
        }
    }
    let end = end?;
    let content = &inner[..end];
    let tail = inner[end + 1..].trim();
    let tail_ok = tail.is_empty() || tail.starts_with("^^") || tail.starts_with('@');
    if !tail_ok {
        return None;
    }
    Some(content.to_string())
}

/// Final path/fragment segment with underscores as spaces.
fn iri_surface(iri: &str) -> String {
    let tail = iri
        .rsplit_once('#')
        .map(|(_, t)| t)
        .unwrap_or_else(|| iri.rsplit_once('/').map(|(_, t)| t).unwrap_or(iri));
    tail.replace('_', " ")
}

fn parse_tsv_line(line: &str) -> Option<Triple> {
    let mut parts = line.split('\t');
    let subject = parts.next()?;
    let relation = parts.next()?;
    let object = parts.next()?;
    if parts.next().is_some() {
        return None;
    }
    if subject.trim().is_empty() || relation.trim().is_empty() || object.trim().is_empty() {
        return None;
    }
    Some(Triple::new(subject, relation, object))
}
