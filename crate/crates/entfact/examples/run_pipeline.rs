//! Drive all six pipeline stages in-process from a generated config, then
//! show the manifests. The `entfact` binary exposes the same stages on the
//! command line.
//!
//! Run with: `cargo run --example run_pipeline`

use std::io::Write as _;

use entfact::pipeline::{run, PipelineConfig, Stage};
use entfact::seeding::rng_for;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = rng_for(4, "pipeline-example");

    let mut corpus = std::fs::File::create(dir.path().join("corpus.jsonl"))?;
    for i in 0..120 {
        let p = rng.random_range(0..10);
        let text = format!(
            "Resident{p} spent the weekend in Borough{} with family.",
            p % 5
        );
        writeln!(
            corpus,
            "{}",
            serde_json::json!({"id": format!("c{i:04}"), "text": text})
        )?;
    }
    let mut gaz = std::fs::File::create(dir.path().join("gazetteer.tsv"))?;
    for i in 0..10 {
        writeln!(gaz, "Resident{i}\tPER")?;
    }
    for i in 0..5 {
        writeln!(gaz, "Borough{i}\tLOC")?;
    }
    let mut kb = std::fs::File::create(dir.path().join("kb.nt"))?;
    for i in 0..10 {
        writeln!(
            kb,
            "<http://x/Resident{i}> <http://x/home> <http://x/Borough{}> .",
            i % 5
        )?;
    }
    std::fs::write(
        dir.path().join("config.toml"),
        r#"
seed = 17

[paths]
corpus = "corpus.jsonl"
kb = "kb.nt"
gazetteer = "gazetteer.tsv"
output_dir = "out"

[corpus]
format = "jsonl-raw"

[dataset]
strategy = "random-most-frequent"
band_size = 100
max_k = 1
split = { train = 0.5, valid = 0.2, test = 0.3 }

[model]
d_node = 8
d_text = 8
gcn_layers = 2
min_node_frequency = 2
dropout_rate = 0.0

[train]
learning_rate = 0.01
batch_size = 8
epochs = 4
"#,
    )?;

    // Paths in the config are relative to the process working directory.
    std::env::set_current_dir(dir.path())?;
    let config = PipelineConfig::load(std::path::Path::new("config.toml"), &[])?;
    for stage in Stage::ALL {
        run(stage, &config)?;
        let manifest = std::fs::read_to_string(
            config
                .paths
                .output_dir
                .join(format!("manifest-{}.json", stage.name())),
        )?;
        println!("{} manifest: {manifest}\n", stage.name());
    }

    let metrics =
        std::fs::read_to_string(config.paths.output_dir.join("metrics.json"))?;
    println!("metrics.json:\n{metrics}");
    Ok(())
}
