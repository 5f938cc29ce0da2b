//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use entfact::corpus::{Annotator, Document, EntityType, Label};
use entfact::detector::{
    backward, forward_doc, gcn_forward, train, DetectorParams, GcnLayerParams, Gradients,
    ModelConfig, RunMode, TrainConfig,
};
use entfact::eval::{
    bootstrap_significance, detection_metrics, entity_metrics, f1, ConfusionCounts,
};
use entfact::generator::NgramGenerator;
use entfact::kgraph::{
    build_cooccurrence_graph, build_factual_graph, index_kb, normalize, parse_triples,
    FactualGraph, GraphOptions, KnowledgeBase, Triple, TripleFormat,
};
use entfact::manipulate::{
    build_dataset, surfaces_overlap, GeneratedContext, ManipulationRecord, ReplacementStrategy,
    SplitFractions,
};
use entfact::seeding::rng_for;

fn pass(n: usize, what: &str, start: Instant) {
    println!(
        "ACCEPTANCE {n:02} PASS ({:.2}s) - {what}",
        start.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness: central finite differences vs analytic gradients.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_01_gradient_correctness() {
    let start = Instant::now();

    let annotator = Annotator::new([
        ("Bosch".to_string(), EntityType::Organization),
        ("Ericsson".to_string(), EntityType::Organization),
        ("Stuttgart".to_string(), EntityType::Location),
    ]);
    let kb = index_kb([
        Triple::new("Bosch", "hq", "Stuttgart"),
        Triple::new("Ericsson", "hq", "Stockholm"),
        Triple::new("Stuttgart", "country", "Germany"),
    ]);
    let mut doc_a = annotator.annotate(&Document::new_human(
        "a",
        "Bosch met Ericsson in Stuttgart today.",
    ));
    doc_a.label = Label::Manipulated;
    doc_a.manipulated_surfaces.insert("Ericsson".to_string());
    let doc_b = annotator.annotate(&Document::new_human("b", "Stuttgart greeted Bosch."));
    let graph_a = build_factual_graph(&doc_a, &kb, GraphOptions::default());
    let graph_b = build_factual_graph(&doc_b, &kb, GraphOptions::default());
    assert!(graph_a.node_count() <= 8 && graph_b.node_count() <= 8);

    let config = ModelConfig {
        d_node: 4,
        d_text: 6,
        gcn_layers: 2,
        min_node_frequency: 1,
        dropout_rate: 0.0,
        ..Default::default()
    };
    let docs = [doc_a, doc_b];
    let graphs = [graph_a, graph_b];
    let params = DetectorParams::init(&config, &graphs, &docs, 13).unwrap();

    // No ReLU pre-activation may sit within 1e-6 of its kink for this seed.
    for (d, g) in docs.iter().zip(&graphs) {
        let fwd = forward_doc(d, g, &params, RunMode::Infer, None).unwrap();
        for p in fwd.fuse_pre.iter() {
            assert!(p.abs() > 1e-6, "fusion pre-activation too close to zero");
        }
        for (_, pre, _) in &fwd.entity {
            for p in pre.iter() {
                assert!(p.abs() > 1e-6, "entity pre-activation too close to zero");
            }
        }
    }

    let batch_loss = |p: &DetectorParams| -> f64 {
        docs.iter()
            .zip(&graphs)
            .map(|(d, g)| {
                forward_doc(d, g, p, RunMode::Infer, None)
                    .unwrap()
                    .loss(p.config.entity_class_weights, true)
            })
            .sum::<f64>()
            / docs.len() as f64
    };

    let mut grads = Gradients::zeros_like(&params);
    for (d, g) in docs.iter().zip(&graphs) {
        let fwd = forward_doc(d, g, &params, RunMode::Infer, None).unwrap();
        backward(&fwd, &params, &mut grads);
    }
    grads.scale(1.0 / docs.len() as f64);

    let eps = 1e-5;
    let flat: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
    let mut probe = params.clone();
    let mut max_rel = 0.0f64;
    let mut checked = 0usize;
    for (t, tensor) in flat.iter().enumerate() {
        for (i, &analytic) in tensor.iter().enumerate() {
            let orig = probe.slices_mut()[t][i];
            probe.slices_mut()[t][i] = orig + eps;
            let up = batch_loss(&probe);
            probe.slices_mut()[t][i] = orig - eps;
            let down = batch_loss(&probe);
            probe.slices_mut()[t][i] = orig;
            let fd = (up - down) / (2.0 * eps);
            let rel = (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1.0);
            max_rel = max_rel.max(rel);
            checked += 1;
        }
    }
    assert!(
        max_rel < 1e-4,
        "max relative error {max_rel} over {checked} parameters"
    );
    assert!(start.elapsed().as_secs_f64() < 10.0, "runtime budget exceeded");
    pass(1, &format!("finite differences agree on {checked} parameters (max rel err {max_rel:.2e})"), start);
}

// ---------------------------------------------------------------------------
// 2. GCN oracle equivalence on 100 random graphs.
// ---------------------------------------------------------------------------

/// Dense oracle: H_{k+1} = tanh(D^-1 A H W^T + 1 b^T), with 0/0 := 0.
fn dense_gcn_oracle(
    n: usize,
    edges: &[(usize, usize)],
    h1: &Array2<f64>,
    layers: &[GcnLayerParams],
) -> Vec<Array2<f64>> {
    let mut a = Array2::<f64>::zeros((n, n));
    for &(s, d) in edges {
        a[(d, s)] = 1.0; // row v lists in-neighbors u
    }
    let mut norm = a.clone();
    for v in 0..n {
        let deg: f64 = a.row(v).sum();
        if deg > 0.0 {
            for u in 0..n {
                norm[(v, u)] /= deg;
            }
        }
    }
    let mut states = vec![h1.clone()];
    for layer in layers {
        let h = states.last().unwrap();
        let agg = norm.dot(h);
        let pre = agg.dot(&layer.w.t());
        let mut next = Array2::zeros((n, layer.b.len()));
        for v in 0..n {
            for j in 0..layer.b.len() {
                next[(v, j)] = (pre[(v, j)] + layer.b[j]).tanh();
            }
        }
        states.push(next);
    }
    states
}

#[test]
fn acceptance_02_gcn_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = rng_for(2, "gcn-oracle");
    for case in 0..100 {
        let n = rng.random_range(1..=12);
        let mut edges = Vec::new();
        for s in 0..n {
            for d in 0..n {
                if s != d && rng.random::<f64>() < 0.3 {
                    edges.push((s, d));
                }
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(s, d) in &edges {
            neighbors[d].push(s);
        }
        for l in &mut neighbors {
            l.sort_unstable();
        }
        let d_in = rng.random_range(1..=5);
        let d_mid = rng.random_range(1..=5);
        let d_out = rng.random_range(1..=5);
        let h1 = Array2::from_shape_fn((n, d_in), |_| rng.random::<f64>() * 2.0 - 1.0);
        let layers = vec![
            GcnLayerParams {
                w: Array2::from_shape_fn((d_mid, d_in), |_| rng.random::<f64>() - 0.5),
                b: Array1::from_shape_fn(d_mid, |_| rng.random::<f64>() - 0.5),
            },
            GcnLayerParams {
                w: Array2::from_shape_fn((d_out, d_mid), |_| rng.random::<f64>() - 0.5),
                b: Array1::from_shape_fn(d_out, |_| rng.random::<f64>() - 0.5),
            },
        ];
        let sparse = gcn_forward(&neighbors, &h1, &layers).unwrap();
        let dense = dense_gcn_oracle(n, &edges, &h1, &layers);
        for (s, d) in sparse.iter().zip(&dense) {
            for (x, y) in s.iter().zip(d.iter()) {
                assert!((x - y).abs() <= 1e-10, "case {case}: {x} vs {y}");
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0, "runtime budget exceeded");
    pass(2, "sparse forward matches dense-adjacency oracle on 100 graphs", start);
}

// ---------------------------------------------------------------------------
// 3. Manipulation invariant suite: 1,000 docs per strategy, zero violations.
// ---------------------------------------------------------------------------

struct SyntheticWorld {
    docs: Vec<Document>,
    annotator: Annotator,
    types_by_surface: BTreeMap<String, EntityType>,
}

fn synthetic_world(n_docs: usize, seed: u64) -> SyntheticWorld {
    let mut pools: Vec<(EntityType, Vec<String>)> = vec![
        (
            EntityType::Person,
            (0..40).map(|i| format!("Reporter{i}")).collect(),
        ),
        (
            EntityType::Organization,
            (0..40).map(|i| format!("Compania{i}")).collect(),
        ),
        (
            EntityType::Location,
            (0..40).map(|i| format!("Harborville{i}")).collect(),
        ),
    ];
    // A couple of multi-word surfaces keep span arithmetic honest.
    pools[1].1.push("Relay Ventures".to_string());
    pools[1].1.push("Scale Venture Partners".to_string());
    let mut gaz = Vec::new();
    let mut types_by_surface = BTreeMap::new();
    for (etype, surfaces) in &pools {
        for s in surfaces {
            gaz.push((s.clone(), *etype));
            types_by_surface.insert(s.clone(), *etype);
        }
    }
    let annotator = Annotator::new(gaz);
    let mut rng = rng_for(seed, "world");
    let docs = (0..n_docs)
        .map(|i| {
            let pick = |rng: &mut ChaCha8Rng, t: usize| {
                let pool = &pools[t].1;
                pool[rng.random_range(0..pool.len())].clone()
            };
            let p1 = pick(&mut rng, 0);
            let o1 = pick(&mut rng, 1);
            let o2 = pick(&mut rng, 1);
            let l1 = pick(&mut rng, 2);
            let text = format!(
                "{p1} reported that {o1} acquired {o2} last week. The deal closed in {l1}. {p1} said more news will follow.",
            );
            annotator.annotate(&Document::new_human(format!("doc{i:05}"), text))
        })
        .collect();
    SyntheticWorld {
        docs,
        annotator,
        types_by_surface,
    }
}

fn boundary_aligned_mention_positions(doc: &Document, surface: &str) -> usize {
    doc.mentions.iter().filter(|m| m.surface == surface).count()
}

fn check_records(
    world: &SyntheticWorld,
    originals: &BTreeMap<String, Document>,
    outputs: &BTreeMap<String, Document>,
    records: &[ManipulationRecord],
) {
    let mut by_doc: BTreeMap<&str, Vec<&ManipulationRecord>> = BTreeMap::new();
    for rec in records {
        // Type preservation.
        assert_eq!(
            world.types_by_surface.get(&rec.original_surface),
            Some(&rec.etype),
            "original type mismatch in {rec:?}"
        );
        if let Some(t) = world.types_by_surface.get(&rec.replacement_surface) {
            assert_eq!(*t, rec.etype, "replacement type mismatch in {rec:?}");
        }
        assert_ne!(rec.original_surface, rec.replacement_surface);
        // Generated non-fallback: mutual non-substring, case-insensitive.
        if matches!(rec.strategy, ReplacementStrategy::Generated { .. }) && !rec.fallback_used {
            assert!(
                !surfaces_overlap(&rec.original_surface, &rec.replacement_surface),
                "overlap violation in {rec:?}"
            );
        }
        by_doc.entry(rec.doc_id.as_str()).or_default().push(rec);
    }

    for (doc_id, recs) in &by_doc {
        let before = &originals[*doc_id];
        let after = &outputs[*doc_id];
        assert_eq!(after.label, Label::Manipulated);
        after.validate().expect("output document invariants");
        // All-occurrence replacement: no mention of a replaced original
        // survives unless a later record reintroduced that surface.
        for rec in recs {
            let reintroduced = recs
                .iter()
                .any(|other| other.replacement_surface == rec.original_surface);
            if !reintroduced {
                assert_eq!(
                    boundary_aligned_mention_positions(after, &rec.original_surface),
                    0,
                    "unreplaced occurrence of {} in {doc_id}",
                    rec.original_surface
                );
            }
        }
        // Minimal edit: untouched mention surfaces keep their multiset.
        let touched: std::collections::BTreeSet<&str> = recs
            .iter()
            .flat_map(|r| {
                [
                    r.original_surface.as_str(),
                    r.replacement_surface.as_str(),
                ]
            })
            .collect();
        let multiset = |d: &Document| {
            let mut m: BTreeMap<String, usize> = BTreeMap::new();
            for mention in &d.mentions {
                if !touched.contains(mention.surface.as_str()) {
                    *m.entry(mention.surface.clone()).or_insert(0) += 1;
                }
            }
            m
        };
        assert_eq!(multiset(before), multiset(after), "minimal edit violated in {doc_id}");
    }

    // Label soundness over the whole output set.
    for (id, doc) in outputs {
        let has_record = by_doc.contains_key(id.as_str());
        assert_eq!(
            doc.label == Label::Manipulated,
            has_record,
            "label soundness violated for {id}"
        );
    }
}

#[test]
fn acceptance_03_manipulation_invariants() {
    let start = Instant::now();
    let fractions = SplitFractions {
        train: 0.5,
        valid: 0.25,
        test: 0.25,
    };
    let strategies = [
        ReplacementStrategy::RandomMostFrequent { band_size: 20 },
        ReplacementStrategy::RandomLeastFrequent { band_size: 20 },
        ReplacementStrategy::Generated { max_attempts: 5 },
    ];
    for (si, strategy) in strategies.iter().enumerate() {
        let world = synthetic_world(1000, 31 + si as u64);
        let originals: BTreeMap<String, Document> = world
            .docs
            .iter()
            .map(|d| (d.id.clone(), d.clone()))
            .collect();
        let mut port = NgramGenerator::train(
            world.docs.iter().map(|d| d.text.as_str()),
            3,
            77 + si as u64,
        );
        let generated = matches!(strategy, ReplacementStrategy::Generated { .. }).then_some(
            GeneratedContext {
                port: &mut port,
                annotator: &world.annotator,
                fallback: ReplacementStrategy::RandomMostFrequent { band_size: 20 },
                max_tokens: 6,
            },
        );
        let build = build_dataset(&world.docs, strategy, 2, fractions, 91 + si as u64, generated)
            .unwrap();
        assert!(!build.records.is_empty());
        let outputs: BTreeMap<String, Document> = build
            .splits
            .train
            .iter()
            .chain(&build.splits.valid)
            .chain(&build.splits.test)
            .map(|d| (d.id.clone(), d.clone()))
            .collect();
        check_records(&world, &originals, &outputs, &build.records);
        if let ReplacementStrategy::Generated { .. } = strategy {
            let non_fallback = build.records.iter().filter(|r| !r.fallback_used).count();
            assert!(non_fallback > 0, "generated strategy never produced a candidate");
        }
    }
    assert!(start.elapsed().as_secs_f64() < 30.0, "runtime budget exceeded");
    pass(3, "zero invariant violations over 1,000 docs x 3 strategies", start);
}

// ---------------------------------------------------------------------------
// 4. Fixture replay of the worked funding-article example.
// ---------------------------------------------------------------------------

const FUNDING_HUMAN: &str = "PubNub, a startup that develops the infrastructure to power key \
features in real-time applications and devices covering chat, tracking, and internet of things \
(IoT), has raised $23 million in a series D round of funding from Hewlett Packard Enterprise \
(HPE), Relay Ventures, Sapphire Ventures, Scale Venture Partners, Cisco Investments, Bosch, and \
Ericsson.";

const FUNDING_MANIPULATED: &str = "PubNub, a startup that develops the infrastructure to power \
key features in real-time applications and devices covering chat, tracking, and internet of \
things (IoT), has raised $23 million in a series D round of funding from Hewlett Packard \
Enterprise (HPE), Samsung, Sapphire Ventures, Scale Venture Partners, Cisco Investments, Bosch, \
and Ericsson.";

#[test]
fn acceptance_04_funding_article_replay() {
    let start = Instant::now();
    let orgs = [
        "PubNub",
        "Hewlett Packard Enterprise (HPE)",
        "Relay Ventures",
        "Sapphire Ventures",
        "Scale Venture Partners",
        "Cisco Investments",
        "Bosch",
        "Ericsson",
    ];
    let annotator = Annotator::new(
        orgs.iter()
            .map(|s| (s.to_string(), EntityType::Organization)),
    );
    let doc = annotator.annotate(&Document::new_human("funding", FUNDING_HUMAN));
    assert_eq!(doc.mentions.len(), orgs.len());

    let out = entfact::manipulate::apply_replacement(&doc, "Relay Ventures", "Samsung").unwrap();
    assert_eq!(out.text, FUNDING_MANIPULATED);
    assert_eq!(out.label, Label::Manipulated);
    assert!(out.manipulated_surfaces.contains("Samsung"));
    out.validate().unwrap();
    pass(4, "replacement replays the fixture text exactly", start);
}

// ---------------------------------------------------------------------------
// 5. Directional claim: detection gets easier as max_k grows.
// ---------------------------------------------------------------------------

/// Corpus with a frequency signal: head entities recur constantly, tail
/// entities are one-offs; replacements come from the rare tail.
fn frequency_world(n_docs: usize, seed: u64) -> (Vec<Document>, Annotator) {
    let head: Vec<(String, EntityType)> = (0..30)
        .flat_map(|i| {
            [
                (format!("Anchor{i}"), EntityType::Person),
                (format!("Consortium{i}"), EntityType::Organization),
                (format!("Metropolis{i}"), EntityType::Location),
            ]
        })
        .collect();
    let tail: Vec<(String, EntityType)> = (0..1500)
        .flat_map(|i| {
            [
                (format!("Stranger{i}"), EntityType::Person),
                (format!("Shopfront{i}"), EntityType::Organization),
                (format!("Hamlet{i}"), EntityType::Location),
            ]
        })
        .collect();
    let mut gaz = head.clone();
    gaz.extend(tail.iter().cloned());
    let annotator = Annotator::new(gaz);

    let mut rng = rng_for(seed, "freq-world");
    let mut tail_cursor = 0usize;
    let docs = (0..n_docs)
        .map(|i| {
            let h = |rng: &mut ChaCha8Rng, t: usize| {
                let idx = rng.random_range(0..30);
                match t {
                    0 => format!("Anchor{idx}"),
                    1 => format!("Consortium{idx}"),
                    _ => format!("Metropolis{idx}"),
                }
            };
            let p = h(&mut rng, 0);
            let o1 = h(&mut rng, 1);
            let mut o2 = h(&mut rng, 1);
            while o2 == o1 {
                o2 = h(&mut rng, 1);
            }
            let l = h(&mut rng, 2);
            // ~30% of human docs naturally carry one rare tail entity.
            let fifth = if rng.random::<f64>() < 0.3 {
                let (s, _) = &tail[tail_cursor % tail.len()];
                tail_cursor += 3; // skip types to vary
                s.clone()
            } else {
                let mut extra = h(&mut rng, 0);
                while extra == p {
                    extra = h(&mut rng, 0);
                }
                extra
            };
            let text = format!(
                "{p} covered the merger of {o1} and {o2} in {l}. Analysts cited {fifth} after the call."
            );
            annotator.annotate(&Document::new_human(format!("f{i:05}"), text))
        })
        .collect();
    (docs, annotator)
}

fn train_and_score(
    docs: &[Document],
    max_k: usize,
    seed: u64,
    model: &ModelConfig,
) -> f64 {
    let fractions = SplitFractions {
        train: 0.5,
        valid: 0.1,
        test: 0.4,
    };
    let strategy = ReplacementStrategy::RandomLeastFrequent { band_size: 1200 };
    let build = build_dataset(docs, &strategy, max_k, fractions, seed, None).unwrap();
    let graphs = |set: &[Document]| -> Vec<FactualGraph> {
        set.iter().map(build_cooccurrence_graph).collect()
    };
    let train_graphs = graphs(&build.splits.train);
    let valid_graphs = graphs(&build.splits.valid);
    let test_graphs = graphs(&build.splits.test);
    let cfg = TrainConfig {
        learning_rate: 0.01,
        batch_size: 16,
        epochs: 5,
        warmup_fraction: 0.1,
        seed,
        ..Default::default()
    };
    let outcome = train(
        &build.splits.train,
        &train_graphs,
        &build.splits.valid,
        &valid_graphs,
        model,
        &cfg,
    )
    .unwrap();
    let preds =
        entfact::detector::predict_batch(&build.splits.test, &test_graphs, &outcome.params)
            .unwrap();
    let correct = preds
        .iter()
        .zip(&build.splits.test)
        .filter(|(p, d)| p.label == d.label)
        .count();
    correct as f64 / build.splits.test.len() as f64
}

#[test]
fn acceptance_05_more_replacements_easier_detection() {
    let start = Instant::now();
    let model = ModelConfig {
        d_node: 16,
        d_text: 16,
        gcn_layers: 2,
        min_node_frequency: 5,
        dropout_rate: 0.0,
        ..Default::default()
    };
    let mut gaps = Vec::new();
    let mut acc1s = Vec::new();
    let mut acc3s = Vec::new();
    for seed in 0..5u64 {
        let (docs, _) = frequency_world(2000, 100 + seed);
        let acc1 = train_and_score(&docs, 1, 1000 + seed, &model);
        let acc3 = train_and_score(&docs, 3, 1000 + seed, &model);
        gaps.push(100.0 * (acc3 - acc1));
        acc1s.push(acc1);
        acc3s.push(acc3);
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_gap = gaps[2];
    assert!(
        median_gap >= 3.0,
        "median k=3 minus k=1 accuracy gap {median_gap:.2} points (gaps {gaps:?}, acc1 {acc1s:?}, acc3 {acc3s:?})"
    );
    assert!(start.elapsed().as_secs_f64() < 600.0, "runtime budget exceeded");
    pass(
        5,
        &format!("median accuracy gap k=3 vs k=1 is {median_gap:.1} points (>= 3)"),
        start,
    );
}

// ---------------------------------------------------------------------------
// 6. Factual knowledge helps: full detector vs encoder-only ablation.
// ---------------------------------------------------------------------------

/// Corpus whose manipulations break planted home-location facts. Persons are
/// numerous (hard to memorize from text); the KB pins each one's home.
fn kb_world(n_docs: usize, seed: u64) -> (Vec<Document>, KnowledgeBase, Annotator) {
    let n_persons = 400;
    let n_locations = 20;
    let persons: Vec<String> = (0..n_persons).map(|i| format!("Resident{i}")).collect();
    let locations: Vec<String> = (0..n_locations).map(|i| format!("Borough{i}")).collect();
    let mut gaz: Vec<(String, EntityType)> = persons
        .iter()
        .map(|p| (p.clone(), EntityType::Person))
        .collect();
    gaz.extend(locations.iter().map(|l| (l.clone(), EntityType::Location)));
    let annotator = Annotator::new(gaz);
    let kb = index_kb(
        (0..n_persons).map(|i| Triple::new(persons[i].clone(), "home", locations[i % n_locations].clone())),
    );
    let mut rng = rng_for(seed, "kb-world");
    let docs = (0..n_docs)
        .map(|i| {
            let p = rng.random_range(0..n_persons);
            let text = format!(
                "{} spent the weekend in {} with family. Later {} returned to work.",
                persons[p],
                locations[p % n_locations],
                persons[p],
            );
            annotator.annotate(&Document::new_human(format!("k{i:05}"), text))
        })
        .collect();
    (docs, kb, annotator)
}

fn train_kb_and_score(
    docs: &[Document],
    kb: &KnowledgeBase,
    use_graph: bool,
    seed: u64,
) -> (f64, Vec<Label>, Vec<Label>) {
    let fractions = SplitFractions {
        train: 0.5,
        valid: 0.1,
        test: 0.4,
    };
    let strategy = ReplacementStrategy::RandomMostFrequent { band_size: 5000 };
    let build = build_dataset(docs, &strategy, 1, fractions, seed, None).unwrap();
    let graphs = |set: &[Document]| -> Vec<FactualGraph> {
        set.iter()
            .map(|d| build_factual_graph(d, kb, GraphOptions::default()))
            .collect()
    };
    let model = ModelConfig {
        d_node: 16,
        d_text: 16,
        gcn_layers: 2,
        min_node_frequency: 5,
        dropout_rate: 0.0,
        use_graph,
        ..Default::default()
    };
    let cfg = TrainConfig {
        learning_rate: 0.01,
        batch_size: 16,
        epochs: 5,
        warmup_fraction: 0.1,
        seed,
        ..Default::default()
    };
    let train_graphs = graphs(&build.splits.train);
    let valid_graphs = graphs(&build.splits.valid);
    let test_graphs = graphs(&build.splits.test);
    let outcome = train(
        &build.splits.train,
        &train_graphs,
        &build.splits.valid,
        &valid_graphs,
        &model,
        &cfg,
    )
    .unwrap();
    let preds =
        entfact::detector::predict_batch(&build.splits.test, &test_graphs, &outcome.params)
            .unwrap();
    let pred_labels: Vec<Label> = preds.iter().map(|p| p.label).collect();
    let gold: Vec<Label> = build.splits.test.iter().map(|d| d.label).collect();
    let correct = pred_labels
        .iter()
        .zip(&gold)
        .filter(|(p, g)| p == g)
        .count();
    (correct as f64 / gold.len() as f64, pred_labels, gold)
}

#[test]
fn acceptance_06_factual_knowledge_helps() {
    let start = Instant::now();
    let mut gaps = Vec::new();
    let mut p_values = Vec::new();
    for seed in 0..5u64 {
        let (docs, kb, _) = kb_world(2000, 200 + seed);
        let (acc_full, preds_full, gold) = train_kb_and_score(&docs, &kb, true, 2000 + seed);
        let (acc_ablation, preds_ablation, gold2) =
            train_kb_and_score(&docs, &kb, false, 2000 + seed);
        assert_eq!(gold, gold2);
        gaps.push(100.0 * (acc_full - acc_ablation));
        let mut rng = rng_for(3000 + seed, "acceptance-boot");
        let p = bootstrap_significance(&preds_full, &preds_ablation, &gold, 2000, &mut rng)
            .unwrap();
        p_values.push(p);
    }
    let mut sorted_gaps = gaps.clone();
    sorted_gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_gap = sorted_gaps[2];
    let mut sorted_p = p_values.clone();
    sorted_p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_p = sorted_p[2];
    assert!(
        median_gap >= 5.0,
        "median full-vs-ablation gap {median_gap:.2} points (gaps {gaps:?})"
    );
    assert!(
        median_p < 0.01,
        "median bootstrap p {median_p} (p values {p_values:?})"
    );
    assert!(start.elapsed().as_secs_f64() < 900.0, "runtime budget exceeded");
    pass(
        6,
        &format!("graph branch adds {median_gap:.1} accuracy points (median), p = {median_p}"),
        start,
    );
}

// ---------------------------------------------------------------------------
// 7. Metrics identity suite.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_metrics_identities() {
    let start = Instant::now();
    let mut rng = rng_for(7, "metrics");
    for _ in 0..10_000 {
        let counts = ConfusionCounts {
            tp: rng.random_range(0..20),
            fp: rng.random_range(0..20),
            tn: rng.random_range(0..20),
            fn_: rng.random_range(0..20),
        };
        let p = counts.precision();
        let r = counts.recall();
        let m = entfact::eval::ClassMetrics::from_counts(&counts);
        // F1 identity, exactly.
        let expect = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        assert_eq!(m.f1, expect);
        assert_eq!(m.f1, f1(p, r));
        // Zero-denominator conventions, exactly.
        if counts.tp + counts.fp == 0 {
            assert_eq!(p, 0.0);
        }
        if counts.tp + counts.fn_ == 0 {
            assert_eq!(r, 0.0);
        }
        assert!((0.0..=1.0).contains(&m.f1));
    }

    // Coin-flip detector on balanced gold.
    let gold: Vec<(String, Label)> = (0..10_000)
        .map(|i| {
            let l = if i % 2 == 0 {
                Label::HumanWritten
            } else {
                Label::Manipulated
            };
            (format!("d{i}"), l)
        })
        .collect();
    let preds: Vec<(String, Label)> = gold
        .iter()
        .map(|(id, _)| {
            let l = if rng.random::<bool>() {
                Label::Manipulated
            } else {
                Label::HumanWritten
            };
            (id.clone(), l)
        })
        .collect();
    let acc = detection_metrics(&preds, &gold).unwrap();
    assert!(
        (0.48..=0.52).contains(&acc),
        "coin-flip accuracy {acc} outside [0.48, 0.52]"
    );

    // Spot-check the full report path on a random instance.
    let ekeys: Vec<((String, String), bool)> = (0..500)
        .map(|i| ((format!("d{}", i / 5), format!("E{i}")), rng.random::<bool>()))
        .collect();
    let pred_keys: Vec<((String, String), bool)> = ekeys
        .iter()
        .map(|(k, _)| (k.clone(), rng.random::<bool>()))
        .collect();
    let report = entity_metrics(&pred_keys, &ekeys).unwrap();
    assert_eq!(report.entity_counts.total(), 500);
    pass(7, "10,000 confusion configurations satisfy the identities exactly", start);
}

// ---------------------------------------------------------------------------
// 8. Full-pipeline determinism through the CLI binary.
// ---------------------------------------------------------------------------

fn write_pipeline_fixtures(dir: &std::path::Path) {
    // Corpus: raw JSONL over a small entity universe.
    let mut corpus = std::fs::File::create(dir.join("corpus.jsonl")).unwrap();
    let mut rng = rng_for(8, "cli-fixture");
    for i in 0..60 {
        let p = rng.random_range(0..6);
        let text = format!(
            "Resident{p} spent the weekend in Borough{} with family.",
            p % 3
        );
        writeln!(
            corpus,
            "{}",
            serde_json::json!({"id": format!("c{i:03}"), "text": text})
        )
        .unwrap();
    }
    let mut gaz = std::fs::File::create(dir.join("gazetteer.tsv")).unwrap();
    for i in 0..6 {
        writeln!(gaz, "Resident{i}\tPER").unwrap();
    }
    for i in 0..3 {
        writeln!(gaz, "Borough{i}\tLOC").unwrap();
    }
    let mut kb = std::fs::File::create(dir.join("kb.nt")).unwrap();
    for i in 0..6 {
        writeln!(
            kb,
            "<http://x/Resident{i}> <http://x/home> <http://x/Borough{}> .",
            i % 3
        )
        .unwrap();
    }
    std::fs::write(
        dir.join("config.toml"),
        r#"
seed = 11

[paths]
corpus = "corpus.jsonl"
kb = "kb.nt"
gazetteer = "gazetteer.tsv"
output_dir = "out"

[corpus]
format = "jsonl-raw"

[dataset]
strategy = "random-most-frequent"
band_size = 50
max_k = 1
split = { train = 0.5, valid = 0.2, test = 0.3 }

[model]
d_node = 6
d_text = 6
gcn_layers = 1
min_node_frequency = 2
dropout_rate = 0.1

[train]
learning_rate = 0.01
batch_size = 8
epochs = 2
"#,
    )
    .unwrap();
}

fn run_cli(dir: &std::path::Path, stage: &str) {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_entfact"))
        .current_dir(dir)
        .args([stage, "--config", "config.toml"])
        .status()
        .expect("binary runs");
    assert!(status.success(), "stage {stage} failed in {}", dir.display());
}

#[test]
fn acceptance_08_pipeline_determinism() {
    let start = Instant::now();
    let stages = ["ingest", "build-kb", "make-dataset", "train", "eval", "stats"];

    let run_all = || -> BTreeMap<String, Vec<u8>> {
        let dir = tempfile::tempdir().unwrap();
        write_pipeline_fixtures(dir.path());
        for stage in stages {
            run_cli(dir.path(), stage);
        }
        stages
            .iter()
            .map(|s| {
                let path = dir.path().join("out").join(format!("manifest-{s}.json"));
                (s.to_string(), std::fs::read(path).unwrap())
            })
            .collect()
    };

    let first = run_all();
    let second = run_all();
    for stage in stages {
        assert_eq!(
            first[stage], second[stage],
            "manifest for {stage} differs between runs"
        );
    }
    pass(8, "two full CLI runs produce byte-identical manifests at every stage", start);
}

// ---------------------------------------------------------------------------
// 9. KB parser conformance and one-hop oracle.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_kb_parser_conformance() {
    let start = Instant::now();
    let mut rng = rng_for(9, "kb-fixture");
    let mut lines = Vec::new();
    for i in 0..45 {
        let subj = format!("Entity_{}", i % 17);
        let rel = format!("rel{}", i % 5);
        lines.push(format!("<http://kb/{subj}> <http://kb/{rel}> <http://kb/Object_{i}> ."));
    }
    // Five planted malformations.
    lines.push("just some words".to_string());
    lines.push("<http://kb/A> <http://kb/r> .".to_string());
    lines.push("<http://kb/A <http://kb/r> <http://kb/B> .".to_string());
    lines.push("<http://kb/A> <http://kb/r> <http://kb/B>".to_string());
    lines.push("<http://kb/A> <http://kb/r> bare .".to_string());
    assert_eq!(lines.len(), 50);
    // Deterministic interleave of the malformed lines.
    for i in 0..lines.len() {
        let j = rng.random_range(0..lines.len());
        lines.swap(i, j);
    }
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "{}", lines.join("\n")).unwrap();

    let outcome = parse_triples(f.path(), TripleFormat::NTriples).unwrap();
    assert_eq!(outcome.triples.len(), 45, "expected 45 triples");
    assert_eq!(outcome.skipped_count, 5, "expected 5 skipped lines");

    let kb = index_kb(outcome.triples.clone());
    // Linear-scan oracle on 500 random queries.
    for q in 0..500 {
        let query = if q % 3 == 0 {
            format!("entity {}", rng.random_range(0..25))
        } else if q % 3 == 1 {
            format!("Entity {}", rng.random_range(0..17))
        } else {
            format!("  ENTITY   {} ", rng.random_range(0..17))
        };
        let got: Vec<&Triple> = kb.one_hop(&query);
        let expect: Vec<&Triple> = outcome
            .triples
            .iter()
            .filter(|t| normalize(&t.subject) == normalize(&query))
            .collect();
        assert_eq!(got, expect, "query {query:?}");
    }
    pass(9, "45 triples + 5 skips, one-hop matches the linear-scan oracle on 500 queries", start);
}

// ---------------------------------------------------------------------------
// 10. Dataset protocol replay: 15,000 docs split 5,000/2,000/8,000.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_10_dataset_protocol_replay() {
    let start = Instant::now();
    let world = synthetic_world(15_000, 10);
    let fractions = SplitFractions {
        train: 1.0 / 3.0,
        valid: 2.0 / 15.0,
        test: 8.0 / 15.0,
    };
    let build = build_dataset(
        &world.docs,
        &ReplacementStrategy::RandomMostFrequent { band_size: 5000 },
        1,
        fractions,
        12,
        None,
    )
    .unwrap();
    assert_eq!(build.splits.train.len(), 5000);
    assert_eq!(build.splits.valid.len(), 2000);
    assert_eq!(build.splits.test.len(), 8000);
    for (name, split) in [
        ("train", &build.splits.train),
        ("valid", &build.splits.valid),
        ("test", &build.splits.test),
    ] {
        let manipulated = split
            .iter()
            .filter(|d| d.label == Label::Manipulated)
            .count();
        assert_eq!(
            manipulated,
            split.len() / 2,
            "{name}: expected floor(n/2) manipulated documents"
        );
    }
    // Every manipulated doc has provenance and vice versa.
    let recorded: std::collections::BTreeSet<&str> =
        build.records.iter().map(|r| r.doc_id.as_str()).collect();
    assert_eq!(recorded.len(), 7500);
    assert!(build.failures.is_empty(), "unexpected failures: {:?}", build.failures);
    pass(10, "15,000 docs split 5,000/2,000/8,000 with exact floor-half class balance", start);
}
