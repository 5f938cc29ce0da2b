//! Train the joint detector on a corpus whose manipulations contradict
//! planted KB facts, then checkpoint and reload it.
//!
//! Run with: `cargo run --example train_detector`

use entfact::corpus::{Annotator, Document, EntityType, Label};
use entfact::detector::{
    load_checkpoint, predict_batch, save_checkpoint, train, ModelConfig, TrainConfig,
};
use entfact::kgraph::{build_factual_graph, index_kb, FactualGraph, GraphOptions, Triple};
use entfact::manipulate::{build_dataset, ReplacementStrategy, SplitFractions};
use entfact::seeding::rng_for;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Planted world: each resident has one home borough, recorded in the KB.
    let residents: Vec<String> = (0..60).map(|i| format!("Resident{i}")).collect();
    let boroughs: Vec<String> = (0..10).map(|i| format!("Borough{i}")).collect();
    let mut gaz: Vec<(String, EntityType)> = residents
        .iter()
        .map(|p| (p.clone(), EntityType::Person))
        .collect();
    gaz.extend(boroughs.iter().map(|l| (l.clone(), EntityType::Location)));
    let annotator = Annotator::new(gaz);
    let kb = index_kb(
        (0..residents.len())
            .map(|i| Triple::new(residents[i].clone(), "home", boroughs[i % boroughs.len()].clone())),
    );

    let mut rng = rng_for(21, "example-train");
    let docs: Vec<Document> = (0..600)
        .map(|i| {
            let p = rng.random_range(0..residents.len());
            let text = format!(
                "{} hosted a dinner in {} last night.",
                residents[p],
                boroughs[p % boroughs.len()],
            );
            annotator.annotate(&Document::new_human(format!("doc{i:04}"), text))
        })
        .collect();

    // Manipulations swap an entity for another of the same type, which breaks
    // the person-home pairing the KB encodes.
    let build = build_dataset(
        &docs,
        &ReplacementStrategy::most_frequent(),
        1,
        SplitFractions {
            train: 0.6,
            valid: 0.2,
            test: 0.2,
        },
        33,
        None,
    )?;

    let graphs = |set: &[Document]| -> Vec<FactualGraph> {
        set.iter()
            .map(|d| build_factual_graph(d, &kb, GraphOptions::default()))
            .collect()
    };
    let model = ModelConfig {
        d_node: 16,
        d_text: 16,
        gcn_layers: 2,
        min_node_frequency: 3,
        dropout_rate: 0.0,
        ..Default::default()
    };
    let config = TrainConfig {
        learning_rate: 0.01,
        batch_size: 16,
        epochs: 6,
        seed: 5,
        ..Default::default()
    };
    let outcome = train(
        &build.splits.train,
        &graphs(&build.splits.train),
        &build.splits.valid,
        &graphs(&build.splits.valid),
        &model,
        &config,
    )?;
    for stat in &outcome.history {
        println!(
            "epoch {:>2}  train loss {:.4}  valid accuracy {:.3}",
            stat.epoch, stat.train_loss, stat.valid_accuracy
        );
    }

    let dir = tempfile::tempdir()?;
    let ckpt = dir.path().join("checkpoint.json");
    save_checkpoint(&outcome.params, &ckpt)?;
    let reloaded = load_checkpoint(&ckpt)?;

    let test_graphs = graphs(&build.splits.test);
    let preds = predict_batch(&build.splits.test, &test_graphs, &reloaded)?;
    let correct = preds
        .iter()
        .zip(&build.splits.test)
        .filter(|(p, d)| p.label == d.label)
        .count();
    println!(
        "\ntest accuracy {:.3} over {} documents",
        correct as f64 / preds.len() as f64,
        preds.len()
    );
    if let Some((pred, doc)) = preds
        .iter()
        .zip(&build.splits.test)
        .find(|(_, d)| d.label == Label::Manipulated)
    {
        println!(
            "sample manipulated doc {}: predicted {:?} (p_manipulated {:.3})",
            doc.id, pred.label, pred.probabilities[1]
        );
        for e in &pred.entities {
            println!(
                "  entity {:<12} flagged={} p={:.3}",
                e.surface, e.manipulated, e.probability_manipulated
            );
        }
    }
    Ok(())
}
