//! Batch pipeline: ingest → build-kb → make-dataset → train → eval → stats,
//! driven by one TOML config. Every stage writes its artifacts plus a
//! manifest of content hashes; all randomness flows from the master seed
//! through labeled sub-seeds.

mod config;
mod manifest;

pub use config::{
    CorpusSection, DatasetSection, GeneratorSection, GraphFlavor, GraphSection, Paths,
    PipelineConfig, StrategyKind,
};
pub use manifest::{config_hash, manifest_path, sha256_file, Manifest};

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{load_documents, load_gazetteer, save_documents, Annotator, Document, Label};
use crate::detector::{
    load_checkpoint, predict_batch, save_checkpoint, train_from, DetectorParams, TrainConfig,
};
use crate::eval::{
    dataset_stats, detection_metrics, entity_metrics, metrics_to_csv, metrics_to_json, round2,
    unknown_entity_subset, EntityKey,
};
use crate::generator::{GeneratorPort, HttpGenerator, HttpGeneratorConfig, NgramGenerator};
use crate::kgraph::{
    build_cooccurrence_graph, build_factual_graph, index_kb, parse_triples, FactualGraph,
    GraphOptions, KnowledgeBase, Triple,
};
use crate::manipulate::{build_dataset, save_records, GeneratedContext, ReplacementStrategy};
use crate::seeding::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    BuildKb,
    MakeDataset,
    Train,
    Eval,
    Stats,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::BuildKb,
        Stage::MakeDataset,
        Stage::Train,
        Stage::Eval,
        Stage::Stats,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::BuildKb => "build-kb",
            Stage::MakeDataset => "make-dataset",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Stats => "stats",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Configuration or usage problem; maps to exit code 2.
    #[error("{0}")]
    Config(String),
    /// A module failed while doing the work; maps to exit code 1.
    #[error("[{code}] {message}")]
    Module { code: &'static str, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Module { .. } => 1,
        }
    }

    /// Single-line machine-parseable rendering.
    pub fn to_json_line(&self) -> String {
        let (code, message) = match self {
            PipelineError::Config(m) => ("config", m.clone()),
            PipelineError::Module { code, message } => (*code, message.clone()),
        };
        serde_json::json!({"code": code, "message": message}).to_string()
    }
}

macro_rules! module_error_from {
    ($ty:ty, $code:literal) => {
        impl From<$ty> for PipelineError {
            fn from(e: $ty) -> Self {
                PipelineError::Module {
                    code: $code,
                    message: e.to_string(),
                }
            }
        }
    };
}

module_error_from!(crate::corpus::CorpusError, "corpus");
module_error_from!(crate::kgraph::KgraphError, "kgraph");
module_error_from!(crate::manipulate::ManipulateError, "manipulate");
module_error_from!(crate::detector::DetectorError, "detector");
module_error_from!(crate::eval::EvalError, "eval");

/// Artifact locations inside the configured output directory.
pub struct Artifacts<'a> {
    dir: &'a Path,
}

impl<'a> Artifacts<'a> {
    pub fn new(dir: &'a Path) -> Self {
        Artifacts { dir }
    }

    pub fn annotated(&self) -> PathBuf {
        self.dir.join("annotated.jsonl")
    }

    pub fn kb(&self) -> PathBuf {
        self.dir.join("kb.jsonl")
    }

    pub fn split(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.jsonl"))
    }

    pub fn manipulations(&self) -> PathBuf {
        self.dir.join("manipulations.jsonl")
    }

    pub fn failures(&self) -> PathBuf {
        self.dir.join("failures.jsonl")
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.dir.join("checkpoint.json")
    }

    pub fn history(&self) -> PathBuf {
        self.dir.join("history.json")
    }

    pub fn metrics_json(&self) -> PathBuf {
        self.dir.join("metrics.json")
    }

    pub fn metrics_csv(&self) -> PathBuf {
        self.dir.join("metrics.csv")
    }

    pub fn unknown_subset(&self) -> PathBuf {
        self.dir.join("unknown_subset.json")
    }

    pub fn stats(&self) -> PathBuf {
        self.dir.join("stats.json")
    }
}

/// Runs one stage: validates the config, does the work, writes the stage
/// manifest. Wall time is logged to stderr, not recorded in the manifest, so
/// reruns from identical inputs are byte-identical.
pub fn run(stage: Stage, config: &PipelineConfig) -> Result<(), PipelineError> {
    config.validate()?;
    std::fs::create_dir_all(&config.paths.output_dir).map_err(|e| PipelineError::Module {
        code: "io",
        message: format!(
            "cannot create output dir {}: {e}",
            config.paths.output_dir.display()
        ),
    })?;

    let start = Instant::now();
    let (inputs, outputs) = match stage {
        Stage::Ingest => run_ingest(config)?,
        Stage::BuildKb => run_build_kb(config)?,
        Stage::MakeDataset => run_make_dataset(config)?,
        Stage::Train => run_train(config)?,
        Stage::Eval => run_eval(config)?,
        Stage::Stats => run_stats(config)?,
    };

    let manifest = Manifest {
        stage: stage.name().to_string(),
        config_hash: config_hash(config),
        seed: config.seed,
        input_hashes: manifest::hash_files(&inputs)?,
        output_hashes: manifest::hash_files(&outputs)?,
    };
    manifest::write_manifest(&manifest, &config.paths.output_dir)?;
    eprintln!(
        "stage={} status=ok wall_time_secs={:.3}",
        stage.name(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn run_ingest(config: &PipelineConfig) -> Result<(Vec<PathBuf>, Vec<PathBuf>), PipelineError> {
    let corpus_path = &config.paths.corpus;
    let mut inputs = vec![corpus_path.clone()];
    config.require_paths(&[corpus_path])?;

    let docs = load_documents(corpus_path, config.corpus.format)?;
    let docs = match config.corpus.format {
        crate::corpus::CorpusFormat::JsonlAnnotated => docs,
        crate::corpus::CorpusFormat::JsonlRaw => {
            config.require_paths(&[&config.paths.gazetteer])?;
            inputs.push(config.paths.gazetteer.clone());
            let annotator = Annotator::new(load_gazetteer(&config.paths.gazetteer)?);
            docs.par_iter().map(|d| annotator.annotate(d)).collect()
        }
    };

    let artifacts = Artifacts::new(&config.paths.output_dir);
    save_documents(&docs, artifacts.annotated())?;
    Ok((inputs, vec![artifacts.annotated()]))
}

fn run_build_kb(config: &PipelineConfig) -> Result<(Vec<PathBuf>, Vec<PathBuf>), PipelineError> {
    config.require_paths(&[&config.paths.kb])?;
    let outcome = parse_triples(&config.paths.kb, config.graph.kb_format)?;
    if outcome.skipped_count > 0 {
        eprintln!(
            "build-kb: skipped {} malformed line(s)",
            outcome.skipped_count
        );
    }
    let kb = index_kb(outcome.triples);
    let artifacts = Artifacts::new(&config.paths.output_dir);
    write_kb_artifact(&kb, &artifacts.kb())?;
    Ok((vec![config.paths.kb.clone()], vec![artifacts.kb()]))
}

fn run_make_dataset(config: &PipelineConfig) -> Result<(Vec<PathBuf>, Vec<PathBuf>), PipelineError> {
    let artifacts = Artifacts::new(&config.paths.output_dir);
    let annotated = artifacts.annotated();
    config.require_paths(&[&annotated])?;
    let mut inputs = vec![annotated.clone()];

    let docs = load_documents(&annotated, crate::corpus::CorpusFormat::JsonlAnnotated)?;
    let strategy = config.dataset.strategy();

    // The generated strategy needs the annotator for candidate detection and
    // a generator port; everything else runs without them.
    let annotator;
    let mut ngram: Option<NgramGenerator> = None;
    let mut http: Option<HttpGenerator> = None;
    let generated = if matches!(strategy, ReplacementStrategy::Generated { .. }) {
        config.require_paths(&[&config.paths.gazetteer])?;
        inputs.push(config.paths.gazetteer.clone());
        annotator = Annotator::new(load_gazetteer(&config.paths.gazetteer)?);
        let port: &mut dyn GeneratorPort = match &config.generator.endpoint {
            Some(endpoint) if !endpoint.is_empty() => {
                let mut http_cfg = HttpGeneratorConfig::new(endpoint.clone());
                http_cfg.timeout = std::time::Duration::from_secs(config.generator.timeout_secs);
                http.insert(HttpGenerator::new(http_cfg))
            }
            _ => ngram.insert(NgramGenerator::train(
                docs.iter().map(|d| d.text.as_str()),
                config.generator.ngram_order,
                derive_seed(config.seed, "generator"),
            )),
        };
        Some(GeneratedContext {
            port,
            annotator: &annotator,
            fallback: ReplacementStrategy::RandomMostFrequent {
                band_size: config.dataset.band_size,
            },
            max_tokens: config.generator.max_tokens,
        })
    } else {
        None
    };

    let build = build_dataset(
        &docs,
        &strategy,
        config.dataset.max_k,
        config.dataset.split,
        config.seed,
        generated,
    )?;

    save_documents(&build.splits.train, artifacts.split("train"))?;
    save_documents(&build.splits.valid, artifacts.split("valid"))?;
    save_documents(&build.splits.test, artifacts.split("test"))?;
    save_records(&build.records, artifacts.manipulations())?;
    write_jsonl(&build.failures, &artifacts.failures())?;

    Ok((
        inputs,
        vec![
            artifacts.split("train"),
            artifacts.split("valid"),
            artifacts.split("test"),
            artifacts.manipulations(),
            artifacts.failures(),
        ],
    ))
}

fn run_train(config: &PipelineConfig) -> Result<(Vec<PathBuf>, Vec<PathBuf>), PipelineError> {
    let artifacts = Artifacts::new(&config.paths.output_dir);
    let train_path = artifacts.split("train");
    let valid_path = artifacts.split("valid");
    config.require_paths(&[&train_path, &valid_path])?;
    let mut inputs = vec![train_path.clone(), valid_path.clone()];

    let train_docs = load_documents(&train_path, crate::corpus::CorpusFormat::JsonlAnnotated)?;
    let valid_docs = load_documents(&valid_path, crate::corpus::CorpusFormat::JsonlAnnotated)?;

    let kb = match config.graph.flavor {
        GraphFlavor::Kb => {
            let kb_path = artifacts.kb();
            config.require_paths(&[&kb_path])?;
            inputs.push(kb_path.clone());
            Some(read_kb_artifact(&kb_path)?)
        }
        GraphFlavor::Cooccurrence => None,
    };
    let train_graphs = build_graphs(&train_docs, kb.as_ref(), config);
    let valid_graphs = build_graphs(&valid_docs, kb.as_ref(), config);

    let mut train_cfg: TrainConfig = config.train.clone();
    train_cfg.seed = derive_seed(config.seed, "train");
    let mut params =
        DetectorParams::init(&config.model, &train_graphs, &train_docs, train_cfg.seed)?;
    if let Some(emb_path) = &config.paths.embeddings {
        config.require_paths(&[emb_path])?;
        inputs.push(emb_path.clone());
        let n = params.embeddings.load_word2vec(emb_path)?;
        eprintln!("train: loaded {n} pretrained embedding row(s)");
    }
    let outcome = train_from(
        params,
        &train_docs,
        &train_graphs,
        &valid_docs,
        &valid_graphs,
        &train_cfg,
    )?;

    save_checkpoint(&outcome.params, artifacts.checkpoint())?;
    let history_json = serde_json::to_string(&outcome.history).expect("history serializes");
    write_text(&artifacts.history(), &history_json)?;

    Ok((inputs, vec![artifacts.checkpoint(), artifacts.history()]))
}

fn run_eval(config: &PipelineConfig) -> Result<(Vec<PathBuf>, Vec<PathBuf>), PipelineError> {
    let artifacts = Artifacts::new(&config.paths.output_dir);
    let test_path = artifacts.split("test");
    let ckpt_path = artifacts.checkpoint();
    let kb_path = artifacts.kb();
    config.require_paths(&[&test_path, &ckpt_path, &kb_path])?;

    let test_docs = load_documents(&test_path, crate::corpus::CorpusFormat::JsonlAnnotated)?;
    let params = load_checkpoint(&ckpt_path)?;
    let kb = read_kb_artifact(&kb_path)?;

    let graphs = build_graphs(&test_docs, Some(&kb), config);
    let predictions = predict_batch(&test_docs, &graphs, &params)?;

    let pred_labels: Vec<(String, Label)> = predictions
        .iter()
        .map(|p| (p.doc_id.clone(), p.label))
        .collect();
    let gold_labels: Vec<(String, Label)> =
        test_docs.iter().map(|d| (d.id.clone(), d.label)).collect();
    let accuracy = detection_metrics(&pred_labels, &gold_labels)?;

    let mut entity_preds: Vec<(EntityKey, bool)> = Vec::new();
    let mut entity_gold: Vec<(EntityKey, bool)> = Vec::new();
    for (doc, pred) in test_docs.iter().zip(&predictions) {
        for ep in &pred.entities {
            let key = (doc.id.clone(), ep.surface.clone());
            entity_preds.push((key.clone(), ep.manipulated));
            entity_gold.push((key, doc.manipulated_surfaces.contains(&ep.surface)));
        }
    }
    let mut report = entity_metrics(&entity_preds, &entity_gold)?;
    report.detection_accuracy = accuracy;
    report.n_articles = test_docs.len();

    let subset = unknown_entity_subset(&test_docs, &kb, derive_seed(config.seed, "eval/subset"));
    let subset_accuracy = |include: &dyn Fn(&Document) -> bool| -> f64 {
        let picked: Vec<usize> = test_docs
            .iter()
            .enumerate()
            .filter(|(_, d)| subset.contains(&d.id) && include(d))
            .map(|(i, _)| i)
            .collect();
        if picked.is_empty() {
            return 0.0;
        }
        let correct = picked
            .iter()
            .filter(|&&i| predictions[i].label == test_docs[i].label)
            .count();
        correct as f64 / picked.len() as f64
    };
    let balanced_accuracy = subset_accuracy(&|_| true);
    let manipulated_only_accuracy = subset_accuracy(&|d| d.label == Label::Manipulated);

    let metrics_json =
        serde_json::to_string_pretty(&metrics_to_json(&report)).expect("metrics serialize");
    write_text(&artifacts.metrics_json(), &metrics_json)?;
    write_text(&artifacts.metrics_csv(), &metrics_to_csv(&report))?;
    let subset_json = serde_json::json!({
        "subset_size": subset.subset_size,
        "percent_of_test": round2(subset.percent_of_test),
        "manipulated_count": subset.manipulated_ids.len(),
        "human_count": subset.human_ids.len(),
        "balanced_accuracy_pct": round2(100.0 * balanced_accuracy),
        "manipulated_only_accuracy_pct": round2(100.0 * manipulated_only_accuracy),
    });
    write_text(
        &artifacts.unknown_subset(),
        &serde_json::to_string_pretty(&subset_json).expect("subset serializes"),
    )?;

    Ok((
        vec![test_path, ckpt_path, kb_path],
        vec![
            artifacts.metrics_json(),
            artifacts.metrics_csv(),
            artifacts.unknown_subset(),
        ],
    ))
}

fn run_stats(config: &PipelineConfig) -> Result<(Vec<PathBuf>, Vec<PathBuf>), PipelineError> {
    let artifacts = Artifacts::new(&config.paths.output_dir);
    let paths = [
        artifacts.split("train"),
        artifacts.split("valid"),
        artifacts.split("test"),
        artifacts.kb(),
    ];
    config.require_paths(&[&paths[0], &paths[1], &paths[2], &paths[3]])?;

    let train = load_documents(&paths[0], crate::corpus::CorpusFormat::JsonlAnnotated)?;
    let valid = load_documents(&paths[1], crate::corpus::CorpusFormat::JsonlAnnotated)?;
    let test = load_documents(&paths[2], crate::corpus::CorpusFormat::JsonlAnnotated)?;
    let kb = read_kb_artifact(&paths[3])?;

    let stats = dataset_stats(
        &[
            ("train", &train[..]),
            ("valid", &valid[..]),
            ("test", &test[..]),
        ],
        &kb,
    );
    let json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    write_text(&artifacts.stats(), &json)?;

    Ok((paths.to_vec(), vec![artifacts.stats()]))
}

/// Graphs for a document set under the configured flavor, in document order.
pub fn build_graphs(
    docs: &[Document],
    kb: Option<&KnowledgeBase>,
    config: &PipelineConfig,
) -> Vec<FactualGraph> {
    match (config.graph.flavor, kb) {
        (GraphFlavor::Kb, Some(kb)) => {
            let options = GraphOptions {
                triple_cap: config.graph.triple_cap,
                seed: derive_seed(config.seed, "graphs"),
            };
            docs.par_iter()
                .map(|d| build_factual_graph(d, kb, options))
                .collect()
        }
        _ => docs.par_iter().map(build_cooccurrence_graph).collect(),
    }
}

fn write_kb_artifact(kb: &KnowledgeBase, path: &Path) -> Result<(), PipelineError> {
    let mut out = String::new();
    for t in kb.triples() {
        out.push_str(&serde_json::to_string(t).expect("triple serializes"));
        out.push('\n');
    }
    write_text(path, &out)
}

fn read_kb_artifact(path: &Path) -> Result<KnowledgeBase, PipelineError> {
    let file = std::fs::File::open(path).map_err(|e| PipelineError::Module {
        code: "io",
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let reader = std::io::BufReader::new(file);
    let mut triples: Vec<Triple> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Module {
            code: "io",
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Triple = serde_json::from_str(&line).map_err(|e| PipelineError::Module {
            code: "kgraph",
            message: format!("bad KB artifact line {}: {e}", idx + 1),
        })?;
        triples.push(t);
    }
    Ok(index_kb(triples))
}

fn write_jsonl<T: serde::Serialize>(items: &[T], path: &Path) -> Result<(), PipelineError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("item serializes"));
        out.push('\n');
    }
    write_text(path, &out)
}

fn write_text(path: &Path, content: &str) -> Result<(), PipelineError> {
    let mut f = std::fs::File::create(path).map_err(|e| PipelineError::Module {
        code: "io",
        message: format!("cannot write {}: {e}", path.display()),
    })?;
    f.write_all(content.as_bytes())
        .map_err(|e| PipelineError::Module {
            code: "io",
            message: format!("cannot write {}: {e}", path.display()),
        })
}
