//! Parse a KB dump, index it, and build the two per-document graph flavors.
//!
//! Run with: `cargo run --example factual_graphs`

use entfact::corpus::{Annotator, Document, EntityType};
use entfact::kgraph::{
    build_cooccurrence_graph, build_factual_graph, index_kb, kb_coverage_stats, parse_triples,
    GraphOptions, TripleFormat,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let kb_path = dir.path().join("kb.nt");
    std::fs::write(
        &kb_path,
        concat!(
            "<http://kb.example/Elvis_Presley> <http://rel.example/homeLocation> <http://kb.example/Graceland> .\n",
            "<http://kb.example/Elvis_Presley> <http://rel.example/occupation> \"singer\"^^<http://rel.example/Text> .\n",
            "<http://kb.example/Bosch> <http://rel.example/headquarters> <http://kb.example/Stuttgart> .\n",
            "<http://kb.example/Bosch> <http://rel.example/industry> <http://kb.example/Engineering> .\n",
            "malformed line that will be skipped\n",
            "<http://kb.example/Stuttgart> <http://rel.example/country> <http://kb.example/Germany> .\n",
        ),
    )?;

    let parsed = parse_triples(&kb_path, TripleFormat::NTriples)?;
    println!(
        "parsed {} triples, skipped {} malformed line(s)",
        parsed.triples.len(),
        parsed.skipped_count
    );
    let kb = index_kb(parsed.triples);
    for t in kb.one_hop("elvis presley") {
        println!("  one-hop: {} --{}--> {}", t.subject, t.relation, t.object);
    }

    let annotator = Annotator::new([
        ("Elvis Presley".to_string(), EntityType::Person),
        ("Bosch".to_string(), EntityType::Organization),
        ("Stuttgart".to_string(), EntityType::Location),
    ]);
    let doc = annotator.annotate(&Document::new_human(
        "d1",
        "Elvis Presley never visited Bosch. Stuttgart hosted the fair.",
    ));

    let kb_graph = build_factual_graph(&doc, &kb, GraphOptions::default());
    println!(
        "\nKB graph: {} nodes, {} edges, doc entities {:?}",
        kb_graph.node_count(),
        kb_graph.edges.len(),
        kb_graph.doc_entity_nodes
    );
    println!("{}", serde_json::to_string_pretty(&kb_graph.to_json())?);

    let cooc = build_cooccurrence_graph(&doc);
    println!(
        "co-occurrence graph: {} nodes, {} edges",
        cooc.node_count(),
        cooc.edges.len()
    );

    let stats = kb_coverage_stats(std::slice::from_ref(&doc), &kb);
    println!("average entity coverage: {:.1}%", stats.avg_entity_coverage_pct);
    Ok(())
}
