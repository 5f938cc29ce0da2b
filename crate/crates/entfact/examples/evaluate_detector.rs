//! Metrics over synthetic predictions: detection accuracy, entity P/R/F1,
//! paired bootstrap significance, the unknown-entity subset, and dataset
//! statistics.
//!
//! Run with: `cargo run --example evaluate_detector`

use entfact::corpus::{Annotator, Document, EntityType, Label};
use entfact::eval::{
    bootstrap_significance, dataset_stats, detection_metrics, entity_metrics, metrics_to_csv,
    metrics_to_json, unknown_entity_subset, EntityKey,
};
use entfact::kgraph::{index_kb, Triple};
use entfact::manipulate::apply_replacement;
use entfact::seeding::rng_for;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let orgs: Vec<String> = (0..10).map(|i| format!("Firm{i}")).collect();
    let annotator = Annotator::new(
        orgs.iter()
            .map(|s| (s.clone(), EntityType::Organization)),
    );
    let mut rng = rng_for(1, "eval-example");

    // Balanced test set: half the docs get one entity swapped.
    let docs: Vec<Document> = (0..400)
        .map(|i| {
            let a = rng.random_range(0..orgs.len());
            let mut b = rng.random_range(0..orgs.len());
            while b == a {
                b = rng.random_range(0..orgs.len());
            }
            let text = format!("{} sued {} over patents.", orgs[a], orgs[b]);
            let doc = annotator.annotate(&Document::new_human(format!("d{i:03}"), text));
            if i % 2 == 0 {
                let mut c = rng.random_range(0..orgs.len());
                while c == a || c == b {
                    c = rng.random_range(0..orgs.len());
                }
                apply_replacement(&doc, &orgs[a].clone(), &orgs[c].clone()).unwrap()
            } else {
                doc
            }
        })
        .collect();
    let gold: Vec<(String, Label)> = docs.iter().map(|d| (d.id.clone(), d.label)).collect();

    // Two synthetic detectors: A errs on 10% of docs, B on 25%.
    let flip = |l: Label| match l {
        Label::HumanWritten => Label::Manipulated,
        Label::Manipulated => Label::HumanWritten,
    };
    let system = |error_rate: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<(String, Label)> {
        docs.iter()
            .map(|d| {
                let label = if rng.random::<f64>() < error_rate {
                    flip(d.label)
                } else {
                    d.label
                };
                (d.id.clone(), label)
            })
            .collect()
    };
    let preds_a = system(0.10, &mut rng);
    let preds_b = system(0.25, &mut rng);

    println!("accuracy A: {:.3}", detection_metrics(&preds_a, &gold)?);
    println!("accuracy B: {:.3}", detection_metrics(&preds_b, &gold)?);

    let labels_only = |preds: &[(String, Label)]| -> Vec<Label> {
        preds.iter().map(|(_, l)| *l).collect()
    };
    let gold_labels = labels_only(&gold);
    let mut boot_rng = rng_for(2, "boot");
    let p = bootstrap_significance(
        &labels_only(&preds_a),
        &labels_only(&preds_b),
        &gold_labels,
        10_000,
        &mut boot_rng,
    )?;
    println!("paired bootstrap p (A over B): {p:.5}");

    // Entity-level report for system A flagging entities at random.
    let mut entity_preds: Vec<(EntityKey, bool)> = Vec::new();
    let mut entity_gold: Vec<(EntityKey, bool)> = Vec::new();
    for doc in &docs {
        for (surface, _) in doc.distinct_surfaces() {
            let key = (doc.id.clone(), surface.to_string());
            entity_gold.push((key.clone(), doc.manipulated_surfaces.contains(surface)));
            entity_preds.push((key, rng.random::<f64>() < 0.1));
        }
    }
    let mut report = entity_metrics(&entity_preds, &entity_gold)?;
    report.detection_accuracy = detection_metrics(&preds_a, &gold)?;
    report.n_articles = docs.len();
    println!("\nmetrics report:\n{}", serde_json::to_string_pretty(&metrics_to_json(&report))?);
    println!("csv:\n{}", metrics_to_csv(&report));

    // KB knows only even-numbered firms, so docs whose written-in surfaces
    // are odd-numbered form the unknown-entity subset.
    let kb = index_kb(
        orgs.iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == 0)
            .map(|(_, s)| Triple::new(s.clone(), "industry", "Law")),
    );
    let subset = unknown_entity_subset(&docs, &kb, 9);
    println!(
        "unknown-entity subset: {} docs ({:.1}% of test), {} manipulated + {} human",
        subset.subset_size,
        subset.percent_of_test,
        subset.manipulated_ids.len(),
        subset.human_ids.len()
    );

    let stats = dataset_stats(&[("test", &docs)], &kb);
    println!("\nsplit statistics:\n{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}
