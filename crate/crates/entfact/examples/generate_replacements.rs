//! Propose replacement entities with the three strategies, including the
//! constrained generative loop over the local n-gram port.
//!
//! Run with: `cargo run --example generate_replacements`

use entfact::corpus::{Annotator, Document, EntityType};
use entfact::generator::NgramGenerator;
use entfact::manipulate::{
    apply_replacement, build_frequency_table, propose_replacement_generated,
    propose_replacement_random, Band, ReplacementStrategy,
};
use entfact::seeding::rng_for;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let orgs = [
        "PubNub",
        "Hewlett Packard Enterprise (HPE)",
        "Relay Ventures",
        "Sapphire Ventures",
        "Scale Venture Partners",
        "Cisco Investments",
        "Bosch",
        "Ericsson",
        "Samsung",
    ];
    let annotator = Annotator::new(
        orgs.iter()
            .map(|s| (s.to_string(), EntityType::Organization)),
    );

    // A small corpus: the funding article plus filler mentioning Samsung so
    // the n-gram model can propose it after "funding from".
    let article = "PubNub, a startup that develops the infrastructure to power key features in \
real-time applications and devices covering chat, tracking, and internet of things (IoT), has \
raised $23 million in a series D round of funding from Hewlett Packard Enterprise (HPE), Relay \
Ventures, Sapphire Ventures, Scale Venture Partners, Cisco Investments, Bosch, and Ericsson.";
    let filler = [
        "Backers include Hewlett Packard Enterprise (HPE), Samsung, and Bosch.",
        "The fund was joined by Hewlett Packard Enterprise (HPE), Samsung, and Ericsson.",
        "Hewlett Packard Enterprise (HPE), Samsung and Cisco Investments led the round.",
        "Analysts watched Hewlett Packard Enterprise (HPE), Samsung, and Bosch closely.",
    ];
    let mut docs: Vec<Document> = vec![annotator.annotate(&Document::new_human("t1", article))];
    for (i, f) in filler.iter().enumerate() {
        docs.push(annotator.annotate(&Document::new_human(format!("f{i}"), *f)));
    }

    let table = build_frequency_table(&docs);
    let mut rng = rng_for(7, "example");

    let top = propose_replacement_random(
        &table,
        EntityType::Organization,
        Band::Top,
        3,
        "Relay Ventures",
        &mut rng,
    )?;
    let bottom = propose_replacement_random(
        &table,
        EntityType::Organization,
        Band::Bottom,
        3,
        "Relay Ventures",
        &mut rng,
    )?;
    println!("random most-frequent proposal:  {top}");
    println!("random least-frequent proposal: {bottom}");

    let mut port = NgramGenerator::train(docs.iter().map(|d| d.text.as_str()), 3, 42);
    let proposal = propose_replacement_generated(
        &docs[0],
        "Relay Ventures",
        EntityType::Organization,
        &mut port,
        10,
        &ReplacementStrategy::most_frequent(),
        &table,
        &annotator,
        4,
        &mut rng,
    )?;
    println!(
        "generated proposal:             {} (attempts {}, fallback {})",
        proposal.surface, proposal.attempts_used, proposal.fallback_used
    );

    let manipulated = apply_replacement(&docs[0], "Relay Ventures", &proposal.surface)?;
    println!("\nmanipulated article:\n{}", manipulated.text);
    println!("\nmanipulated surfaces: {:?}", manipulated.manipulated_surfaces);
    Ok(())
}
