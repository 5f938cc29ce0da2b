//! Ingest a raw JSONL corpus, annotate it with a gazetteer, and write the
//! annotated corpus format.
//!
//! Run with: `cargo run --example annotate_corpus`

use entfact::corpus::{
    load_documents, load_gazetteer, save_documents, split_sentences, Annotator, CorpusFormat,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let corpus_path = dir.path().join("corpus.jsonl");
    let gazetteer_path = dir.path().join("gazetteer.tsv");

    std::fs::write(
        &corpus_path,
        concat!(
            r#"{"id":"d1","text":"Samsung and Samsung Ventures met in Seoul. Ada Lovelace attended."}"#,
            "\n",
            r#"{"id":"d2","text":"Bosch opened a plant near Stuttgart last spring."}"#,
            "\n",
        ),
    )?;
    std::fs::write(
        &gazetteer_path,
        "Samsung\tORG\nSamsung Ventures\tORG\nBosch\tORG\nSeoul\tLOC\nStuttgart\tLOC\nAda Lovelace\tPER\n",
    )?;

    let raw = load_documents(&corpus_path, CorpusFormat::JsonlRaw)?;
    let annotator = Annotator::new(load_gazetteer(&gazetteer_path)?);
    let annotated: Vec<_> = raw.iter().map(|d| annotator.annotate(d)).collect();

    for doc in &annotated {
        println!("document {} ({} sentences)", doc.id, split_sentences(&doc.text).len());
        for m in &doc.mentions {
            println!(
                "  [{:>3}, {:>3}) {:<4} {:?} (sentence {})",
                m.start, m.end, m.etype, m.surface, m.sentence_index
            );
        }
    }

    let out_path = dir.path().join("annotated.jsonl");
    save_documents(&annotated, &out_path)?;
    let reloaded = load_documents(&out_path, CorpusFormat::JsonlAnnotated)?;
    assert_eq!(annotated, reloaded);
    println!("\nround-trip through {} ok", out_path.display());
    Ok(())
}
