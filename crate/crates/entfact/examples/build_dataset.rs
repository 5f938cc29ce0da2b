//! Assemble a labeled dataset: split a human corpus, manipulate half of each
//! split, and inspect the manipulation log.
//!
//! Run with: `cargo run --example build_dataset`

use entfact::corpus::{Annotator, Document, EntityType, Label};
use entfact::manipulate::{build_dataset, ReplacementStrategy, SplitFractions};
use entfact::seeding::rng_for;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Synthetic human corpus over a small entity universe.
    let orgs: Vec<String> = (0..12).map(|i| format!("Venture{i}")).collect();
    let locs: Vec<String> = (0..8).map(|i| format!("Harborview{i}")).collect();
    let people: Vec<String> = (0..10).map(|i| format!("Reporter{i}")).collect();
    let mut gaz: Vec<(String, EntityType)> = Vec::new();
    gaz.extend(orgs.iter().map(|s| (s.clone(), EntityType::Organization)));
    gaz.extend(locs.iter().map(|s| (s.clone(), EntityType::Location)));
    gaz.extend(people.iter().map(|s| (s.clone(), EntityType::Person)));
    let annotator = Annotator::new(gaz);

    let mut rng = rng_for(3, "example-corpus");
    let docs: Vec<Document> = (0..200)
        .map(|i| {
            let text = format!(
                "{} wrote that {} acquired {} in {}.",
                people[rng.random_range(0..people.len())],
                orgs[rng.random_range(0..orgs.len())],
                orgs[rng.random_range(0..orgs.len())],
                locs[rng.random_range(0..locs.len())],
            );
            annotator.annotate(&Document::new_human(format!("doc{i:03}"), text))
        })
        .collect();

    let build = build_dataset(
        &docs,
        &ReplacementStrategy::least_frequent(),
        2,
        SplitFractions {
            train: 0.6,
            valid: 0.2,
            test: 0.2,
        },
        11,
        None,
    )?;

    for (name, split) in [
        ("train", &build.splits.train),
        ("valid", &build.splits.valid),
        ("test", &build.splits.test),
    ] {
        let manipulated = split.iter().filter(|d| d.label == Label::Manipulated).count();
        println!(
            "{name:<5} {:>4} documents, {manipulated} manipulated / {} human",
            split.len(),
            split.len() - manipulated
        );
    }
    println!(
        "\n{} replacements applied, {} documents failed manipulation",
        build.records.len(),
        build.failures.len()
    );
    for rec in build.records.iter().take(5) {
        println!(
            "  {}: {} -> {} ({})",
            rec.doc_id, rec.original_surface, rec.replacement_surface, rec.etype
        );
    }
    Ok(())
}
