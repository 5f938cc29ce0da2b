//! Pipeline configuration: one TOML file with dotted sections; CLI flags
//! override keys one-for-one (`--train.epochs=3`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusFormat;
use crate::detector::{ModelConfig, TrainConfig};
use crate::kgraph::TripleFormat;
use crate::manipulate::{ReplacementStrategy, SplitFractions};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub corpus: CorpusSection,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub graph: GraphSection,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub generator: GeneratorSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paths {
    pub corpus: PathBuf,
    pub kb: PathBuf,
    pub gazetteer: PathBuf,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSection {
    pub format: CorpusFormat,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            format: CorpusFormat::JsonlAnnotated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    RandomMostFrequent,
    RandomLeastFrequent,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSection {
    pub strategy: StrategyKind,
    pub band_size: usize,
    pub max_attempts: usize,
    pub max_k: usize,
    pub split: SplitFractions,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            strategy: StrategyKind::RandomMostFrequent,
            band_size: crate::manipulate::DEFAULT_BAND_SIZE,
            max_attempts: crate::manipulate::DEFAULT_MAX_ATTEMPTS,
            max_k: 1,
            split: SplitFractions {
                train: 0.8,
                valid: 0.1,
                test: 0.1,
            },
        }
    }
}

impl DatasetSection {
    pub fn strategy(&self) -> ReplacementStrategy {
        match self.strategy {
            StrategyKind::RandomMostFrequent => ReplacementStrategy::RandomMostFrequent {
                band_size: self.band_size,
            },
            StrategyKind::RandomLeastFrequent => ReplacementStrategy::RandomLeastFrequent {
                band_size: self.band_size,
            },
            StrategyKind::Generated => ReplacementStrategy::Generated {
                max_attempts: self.max_attempts,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFlavor {
    Kb,
    Cooccurrence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphSection {
    pub flavor: GraphFlavor,
    pub kb_format: TripleFormat,
    /// Per-entity one-hop triple cap with seeded subsampling; absent = off.
    pub triple_cap: Option<usize>,
}

impl Default for GraphSection {
    fn default() -> Self {
        GraphSection {
            flavor: GraphFlavor::Kb,
            kb_format: TripleFormat::NTriples,
            triple_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSection {
    /// HTTP endpoint; empty/absent means the local n-gram generator.
    pub endpoint: Option<String>,
    pub max_tokens: usize,
    pub timeout_secs: u64,
    pub ngram_order: usize,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        GeneratorSection {
            endpoint: None,
            max_tokens: crate::manipulate::DEFAULT_GENERATION_TOKENS,
            timeout_secs: 30,
            ngram_order: 3,
        }
    }
}

impl PipelineConfig {
    /// Parses the TOML file and applies `key.path=value` overrides.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<PipelineConfig, PipelineError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut table: toml::Table = raw
            .parse()
            .map_err(|e| PipelineError::Config(format!("config parse error: {e}")))?;
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        let config: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| PipelineError::Config(format!("invalid config: {e}")))?;
        Ok(config)
    }

    /// Structural validation independent of any stage.
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.dataset
            .split
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.dataset
            .strategy()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.dataset.max_k == 0 {
            return Err(PipelineError::Config("dataset.max_k must be positive".into()));
        }
        self.model
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }

    /// Fails when a stage input path is missing.
    pub fn require_paths(&self, paths: &[&Path]) -> Result<(), PipelineError> {
        for p in paths {
            if !p.exists() {
                return Err(PipelineError::Config(format!(
                    "required input path does not exist: {}",
                    p.display()
                )));
            }
        }
        Ok(())
    }
}

fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<(), PipelineError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(PipelineError::Config(format!("bad override key `{key}`")));
    }
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                PipelineError::Config(format!("override `{key}` crosses a non-table value"))
            })?;
    }
    let parsed = parse_toml_value(value);
    current.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

/// Interprets the override as a TOML literal, falling back to a string.
fn parse_toml_value(value: &str) -> toml::Value {
    let probe = format!("v = {value}");
    if let Ok(t) = probe.parse::<toml::Table>() {
        if let Some(v) = t.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(value.to_string())
}
