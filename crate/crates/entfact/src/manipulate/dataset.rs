//! Labeled dataset assembly: split, select half per split, manipulate.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{index::sample, SliceRandom};

use crate::corpus::{Annotator, Document, Label};
use crate::generator::GeneratorPort;
use crate::seeding::rng_for;

use super::{
    apply_replacement, build_frequency_table, pick_target_entities, propose_replacement_generated,
    propose_replacement_random, Band, FrequencyTable, ManipulateError, ManipulationRecord,
    ReplacementStrategy,
};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn validate(&self) -> Result<(), ManipulateError> {
        let sum = self.train + self.valid + self.test;
        if (sum - 1.0).abs() > 1e-9 || self.train < 0.0 || self.valid < 0.0 || self.test < 0.0 {
            return Err(ManipulateError::InvalidFractions(sum));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplits {
    pub train: Vec<Document>,
    pub valid: Vec<Document>,
    pub test: Vec<Document>,
}

/// A document that stayed human because manipulation failed entirely.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ManipulationFailure {
    pub doc_id: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct DatasetBuild {
    pub splits: DatasetSplits,
    pub records: Vec<ManipulationRecord>,
    pub failures: Vec<ManipulationFailure>,
}

/// Everything the generated strategy needs beyond the corpus itself.
pub struct GeneratedContext<'a> {
    pub port: &'a mut dyn GeneratorPort,
    pub annotator: &'a Annotator,
    pub fallback: ReplacementStrategy,
    pub max_tokens: usize,
}

/// Splits the corpus, then manipulates a seeded random half (floor for odd
/// counts) of each split with up to `max_k` replacements per document.
///
/// Documents where manipulation fails entirely stay human and are logged in
/// `failures`. Fully deterministic given `seed`.
pub fn build_dataset(
    docs: &[Document],
    strategy: &ReplacementStrategy,
    max_k: usize,
    fractions: SplitFractions,
    seed: u64,
    mut generated: Option<GeneratedContext<'_>>,
) -> Result<DatasetBuild, ManipulateError> {
    fractions.validate()?;
    strategy.validate()?;
    assert!(max_k >= 1, "max_k must be positive");
    if let Some(doc) = docs.iter().find(|d| d.label != Label::HumanWritten) {
        return Err(ManipulateError::NotHumanInput {
            doc_id: doc.id.clone(),
        });
    }

    let table = build_frequency_table(docs);

    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng_for(seed, "split"));

    let n = docs.len();
    let end_train = (n as f64 * fractions.train).round() as usize;
    let end_valid = (n as f64 * (fractions.train + fractions.valid)).round() as usize;
    let bounds = [(0, end_train), (end_train, end_valid), (end_valid, n)];
    let names = ["train", "valid", "test"];
    for (name, (lo, hi)) in names.iter().zip(bounds) {
        if lo >= hi {
            return Err(ManipulateError::InsufficientCorpus { split: name });
        }
    }

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut out_splits: Vec<Vec<Document>> = Vec::with_capacity(3);

    for (name, (lo, hi)) in names.iter().zip(bounds) {
        let split_idx = &order[lo..hi];
        let half = split_idx.len() / 2;
        let mut select_rng = rng_for(seed, &format!("select/{name}"));
        let mut chosen: Vec<usize> = sample(&mut select_rng, split_idx.len(), half).into_vec();
        chosen.sort_unstable();
        let chosen: std::collections::HashSet<usize> = chosen.into_iter().collect();

        let mut out = Vec::with_capacity(split_idx.len());
        for (pos, &doc_idx) in split_idx.iter().enumerate() {
            let doc = &docs[doc_idx];
            if !chosen.contains(&pos) {
                out.push(doc.clone());
                continue;
            }
            match manipulate_doc(doc, strategy, max_k, &table, seed, &mut generated) {
                Ok((manipulated, mut recs)) => {
                    records.append(&mut recs);
                    out.push(manipulated);
                }
                Err(DocOutcome::Failure(reason)) => {
                    failures.push(ManipulationFailure {
                        doc_id: doc.id.clone(),
                        reason,
                    });
                    out.push(doc.clone());
                }
                Err(DocOutcome::Fatal(e)) => return Err(e),
            }
        }
        out_splits.push(out);
    }

    let mut iter = out_splits.into_iter();
    Ok(DatasetBuild {
        splits: DatasetSplits {
            train: iter.next().unwrap(),
            valid: iter.next().unwrap(),
            test: iter.next().unwrap(),
        },
        records,
        failures,
    })
}

enum DocOutcome {
    /// Manipulation failed entirely; the document stays human.
    Failure(String),
    /// The build cannot proceed (generator down, bad configuration).
    Fatal(ManipulateError),
}

fn manipulate_doc(
    doc: &Document,
    strategy: &ReplacementStrategy,
    max_k: usize,
    table: &FrequencyTable,
    seed: u64,
    generated: &mut Option<GeneratedContext<'_>>,
) -> Result<(Document, Vec<ManipulationRecord>), DocOutcome> {
    let mut rng = rng_for(seed, &format!("doc/{}", doc.id));
    let targets = match pick_target_entities(doc, max_k, &mut rng) {
        Ok(t) => t,
        Err(e @ ManipulateError::NoEntities { .. }) => {
            return Err(DocOutcome::Failure(e.to_string()))
        }
        Err(e) => return Err(DocOutcome::Fatal(e)),
    };

    let mut current = doc.clone();
    let mut records = Vec::new();
    for (surface, etype) in targets {
        let proposal = match strategy {
            ReplacementStrategy::RandomMostFrequent { band_size } => {
                propose_replacement_random(table, etype, Band::Top, *band_size, &surface, &mut rng)
                    .map(|s| (s, 0, false))
            }
            ReplacementStrategy::RandomLeastFrequent { band_size } => propose_replacement_random(
                table,
                etype,
                Band::Bottom,
                *band_size,
                &surface,
                &mut rng,
            )
            .map(|s| (s, 0, false)),
            ReplacementStrategy::Generated { max_attempts } => {
                let ctx = match generated.as_mut() {
                    Some(ctx) => ctx,
                    None => return Err(DocOutcome::Fatal(ManipulateError::MissingGeneratorContext)),
                };
                propose_replacement_generated(
                    &current,
                    &surface,
                    etype,
                    ctx.port,
                    *max_attempts,
                    &ctx.fallback,
                    table,
                    ctx.annotator,
                    ctx.max_tokens,
                    &mut rng,
                )
                .map(|p| (p.surface, p.attempts_used, p.fallback_used))
            }
        };
        match proposal {
            Ok((replacement, attempts_used, fallback_used)) => {
                current = match apply_replacement(&current, &surface, &replacement) {
                    Ok(d) => d,
                    Err(e) => return Err(DocOutcome::Fatal(e)),
                };
                records.push(ManipulationRecord {
                    doc_id: doc.id.clone(),
                    original_surface: surface,
                    replacement_surface: replacement,
                    etype,
                    strategy: strategy.clone(),
                    attempts_used,
                    fallback_used,
                });
            }
            // Constraint exhaustion on this target; try the next one.
            Err(ManipulateError::EmptyBand { .. }) => continue,
            Err(e @ ManipulateError::GeneratorUnavailable(_)) => {
                return Err(DocOutcome::Fatal(e))
            }
            Err(e) => return Err(DocOutcome::Fatal(e)),
        }
    }
    if records.is_empty() {
        return Err(DocOutcome::Failure("all proposals failed".to_string()));
    }
    Ok((current, records))
}

/// Writes manipulation records as JSON Lines.
pub fn save_records(
    records: &[ManipulationRecord],
    path: impl AsRef<Path>,
) -> Result<(), ManipulateError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| ManipulateError::WriteFailed {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    for rec in records {
        let json = serde_json::to_string(rec).expect("record serializes");
        writeln!(w, "{json}").map_err(|source| ManipulateError::WriteFailed {
            path: path.display().to_string(),
            source,
        })?;
    }
    w.flush().map_err(|source| ManipulateError::WriteFailed {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ManipulationRecord>, ManipulateError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| ManipulateError::ReadFailed {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| ManipulateError::ReadFailed {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| ManipulateError::MalformedRecord {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}
