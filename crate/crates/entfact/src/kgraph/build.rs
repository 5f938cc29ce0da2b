//! Per-document factual graph construction.

use std::collections::{HashMap, HashSet};

use rand::seq::index::sample;

use crate::corpus::Document;
use crate::seeding::rng_for;

use super::{FactualGraph, GraphNode, KnowledgeBase, NodeKind};

/// Options for KB graph construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct GraphOptions {
    /// Optional per-entity cap on one-hop triples, applied by seeded uniform
    /// subsampling. Mitigates knowledge noise from popular entities; off by
    /// default.
    pub triple_cap: Option<usize>,
    /// Seed for the subsampling; only used when `triple_cap` is set.
    pub seed: u64,
}

struct GraphBuilder {
    nodes: Vec<GraphNode>,
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
    entity_by_surface: HashMap<String, usize>,
    relation_by_key: HashMap<(String, usize), usize>,
}

impl GraphBuilder {
    fn new() -> Self {
        GraphBuilder {
            nodes: Vec::new(),
            edges: Vec::new(),
            edge_set: HashSet::new(),
            entity_by_surface: HashMap::new(),
            relation_by_key: HashMap::new(),
        }
    }

    fn entity(&mut self, surface: &str) -> usize {
        if let Some(&id) = self.entity_by_surface.get(surface) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(GraphNode {
            id,
            kind: NodeKind::Entity,
            surface: surface.to_string(),
        });
        self.entity_by_surface.insert(surface.to_string(), id);
        id
    }

    /// Relation nodes are keyed per (relation surface, subject node) so that a
    /// shared relation name does not become a hub conflating unrelated facts.
    fn relation(&mut self, surface: &str, subject: usize) -> usize {
        let key = (surface.to_string(), subject);
        if let Some(&id) = self.relation_by_key.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(GraphNode {
            id,
            kind: NodeKind::Relation,
            surface: surface.to_string(),
        });
        self.relation_by_key.insert(key, id);
        id
    }

    fn edge(&mut self, src: usize, dst: usize) {
        if self.edge_set.insert((src, dst)) {
            self.edges.push((src, dst));
        }
    }

    fn finish(self, doc_entity_nodes: Vec<usize>) -> FactualGraph {
        let mut in_neighbors = vec![Vec::new(); self.nodes.len()];
        for &(s, d) in &self.edges {
            in_neighbors[d].push(s);
        }
        for l in &mut in_neighbors {
            l.sort_unstable();
        }
        FactualGraph {
            nodes: self.nodes,
            edges: self.edges,
            doc_entity_nodes,
            in_neighbors,
        }
    }
}

/// Builds the KB factual graph for a document: one entity node per distinct
/// mention surface (isolated when the KB has nothing), and for each one-hop
/// triple a per-subject relation node plus the object entity, with edges
/// subject→relation and relation→object.
pub fn build_factual_graph(doc: &Document, kb: &KnowledgeBase, options: GraphOptions) -> FactualGraph {
    let mut b = GraphBuilder::new();
    let doc_surfaces = doc.distinct_surfaces();
    let doc_entity_nodes: Vec<usize> = doc_surfaces.iter().map(|(s, _)| b.entity(s)).collect();

    for (surface, _) in &doc_surfaces {
        let subject_id = b.entity(surface);
        let mut hops = kb.one_hop(surface);
        if let Some(cap) = options.triple_cap {
            if hops.len() > cap {
                let mut rng = rng_for(options.seed, &format!("triple-cap/{}/{surface}", doc.id));
                let mut keep = sample(&mut rng, hops.len(), cap).into_vec();
                keep.sort_unstable();
                hops = keep.into_iter().map(|i| hops[i]).collect();
            }
        }
        for triple in hops {
            let rel_id = b.relation(&triple.relation, subject_id);
            let obj_id = b.entity(&triple.object);
            b.edge(subject_id, rel_id);
            b.edge(rel_id, obj_id);
        }
    }
    b.finish(doc_entity_nodes)
}

/// Builds the sentence co-occurrence graph: entity nodes only, with a pair of
/// directed edges between entities that share at least one sentence.
pub fn build_cooccurrence_graph(doc: &Document) -> FactualGraph {
    let mut b = GraphBuilder::new();
    let doc_entity_nodes: Vec<usize> = doc
        .distinct_surfaces()
        .iter()
        .map(|(s, _)| b.entity(s))
        .collect();

    let mut by_sentence: HashMap<usize, Vec<usize>> = HashMap::new();
    for m in &doc.mentions {
        let id = b.entity(&m.surface);
        let ids = by_sentence.entry(m.sentence_index).or_default();
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    let mut sentences: Vec<_> = by_sentence.into_iter().collect();
    sentences.sort_by_key(|(idx, _)| *idx);
    for (_, ids) in sentences {
        for i in 0..ids.len() {
            for j in (i + 1)..ids.len() {
                b.edge(ids[i], ids[j]);
                b.edge(ids[j], ids[i]);
            }
        }
    }
    b.finish(doc_entity_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Annotator, Document, EntityType};
    use crate::kgraph::{index_kb, Triple};

    fn annotated(text: &str, surfaces: &[(&str, EntityType)]) -> Document {
        let annotator = Annotator::new(surfaces.iter().map(|(s, t)| (s.to_string(), *t)));
        annotator.annotate(&Document::new_human("d", text))
    }

    #[test]
    fn single_triple_gives_three_nodes_two_edges() {
        let doc = annotated("E rose.", &[("E", EntityType::Organization)]);
        let kb = index_kb([Triple::new("E", "r", "O")]);
        let g = build_factual_graph(&doc, &kb, GraphOptions::default());
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
        assert_eq!(g.doc_entity_nodes, vec![0]);
        assert_eq!(g.nodes[1].kind, NodeKind::Relation);
    }

    #[test]
    fn uncovered_entity_is_an_isolated_node() {
        let doc = annotated("E rose.", &[("E", EntityType::Organization)]);
        let kb = index_kb([]);
        let g = build_factual_graph(&doc, &kb, GraphOptions::default());
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
        assert_eq!(g.doc_entity_nodes, vec![0]);
    }

    #[test]
    fn shared_object_merges_but_relations_stay_per_subject() {
        let doc = annotated(
            "E1 met E2.",
            &[("E1", EntityType::Organization), ("E2", EntityType::Organization)],
        );
        let kb = index_kb([Triple::new("E1", "r", "X"), Triple::new("E2", "r", "X")]);
        let g = build_factual_graph(&doc, &kb, GraphOptions::default());
        let entity_surfaces: Vec<&str> = g
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Entity)
            .map(|n| n.surface.as_str())
            .collect();
        assert_eq!(entity_surfaces, vec!["E1", "E2", "X"]);
        let relation_count = g.nodes.iter().filter(|n| n.kind == NodeKind::Relation).count();
        assert_eq!(relation_count, 2);
        assert_eq!(g.edges.len(), 4);
    }

    #[test]
    fn kb_graph_is_bipartite_by_hop() {
        let doc = annotated(
            "A met B.",
            &[("A", EntityType::Person), ("B", EntityType::Person)],
        );
        let kb = index_kb([
            Triple::new("A", "knows", "B"),
            Triple::new("A", "bornIn", "X"),
            Triple::new("B", "knows", "A"),
        ]);
        let g = build_factual_graph(&doc, &kb, GraphOptions::default());
        for &(s, d) in &g.edges {
            let ok = matches!(
                (g.nodes[s].kind, g.nodes[d].kind),
                (NodeKind::Entity, NodeKind::Relation) | (NodeKind::Relation, NodeKind::Entity)
            );
            assert!(ok, "edge {s}->{d} violates hop structure");
        }
        // Every relation node has in-degree and out-degree >= 1.
        for n in g.nodes.iter().filter(|n| n.kind == NodeKind::Relation) {
            assert!(g.edges.iter().any(|&(_, d)| d == n.id));
            assert!(g.edges.iter().any(|&(s, _)| s == n.id));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let doc = annotated(
            "A met B in C.",
            &[
                ("A", EntityType::Person),
                ("B", EntityType::Person),
                ("C", EntityType::Location),
            ],
        );
        let kb = index_kb([
            Triple::new("A", "knows", "B"),
            Triple::new("B", "livesIn", "C"),
            Triple::new("C", "partOf", "D"),
        ]);
        let g1 = build_factual_graph(&doc, &kb, GraphOptions::default());
        let g2 = build_factual_graph(&doc, &kb, GraphOptions::default());
        assert_eq!(g1, g2);
    }

    #[test]
    fn triple_cap_subsamples_deterministically() {
        let doc = annotated("E rose.", &[("E", EntityType::Organization)]);
        let triples: Vec<Triple> = (0..20).map(|i| Triple::new("E", "r", format!("O{i}"))).collect();
        let kb = index_kb(triples);
        let opts = GraphOptions {
            triple_cap: Some(5),
            seed: 9,
        };
        let g1 = build_factual_graph(&doc, &kb, opts);
        let g2 = build_factual_graph(&doc, &kb, opts);
        assert_eq!(g1, g2);
        // 1 doc entity + 1 relation node (shared key) + 5 objects.
        assert_eq!(g1.doc_entity_nodes.len(), 1);
        assert_eq!(
            g1.nodes.iter().filter(|n| n.kind == NodeKind::Entity).count(),
            6
        );
    }

    #[test]
    fn adding_a_triple_never_removes_structure() {
        let doc = annotated(
            "A met B.",
            &[("A", EntityType::Person), ("B", EntityType::Person)],
        );
        let base = vec![Triple::new("A", "knows", "B"), Triple::new("B", "livesIn", "X")];
        let mut extended = base.clone();
        extended.push(Triple::new("A", "bornIn", "Y"));

        let g1 = build_factual_graph(&doc, &index_kb(base), GraphOptions::default());
        let g2 = build_factual_graph(&doc, &index_kb(extended), GraphOptions::default());

        let semantic = |g: &FactualGraph| {
            let key = |id: usize| {
                let n = &g.nodes[id];
                match n.kind {
                    NodeKind::Entity => format!("E:{}", n.surface),
                    NodeKind::Relation => {
                        let subj = g
                            .edges
                            .iter()
                            .find(|&&(_, d)| d == id)
                            .map(|&(s, _)| g.nodes[s].surface.clone())
                            .unwrap_or_default();
                        format!("R:{}@{}", n.surface, subj)
                    }
                }
            };
            let nodes: std::collections::BTreeSet<String> =
                g.nodes.iter().map(|n| key(n.id)).collect();
            let edges: std::collections::BTreeSet<(String, String)> =
                g.edges.iter().map(|&(s, d)| (key(s), key(d))).collect();
            (nodes, edges)
        };
        let (n1, e1) = semantic(&g1);
        let (n2, e2) = semantic(&g2);
        assert!(n1.is_subset(&n2));
        assert!(e1.is_subset(&e2));
    }

    #[test]
    fn cooccurrence_same_sentence_links_both_ways() {
        let doc = annotated(
            "A met B.",
            &[("A", EntityType::Person), ("B", EntityType::Person)],
        );
        let g = build_cooccurrence_graph(&doc);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 2);
        assert!(g.edges.contains(&(0, 1)) && g.edges.contains(&(1, 0)));
    }

    #[test]
    fn cooccurrence_different_sentences_stay_isolated() {
        let doc = annotated(
            "A arrived. B left.",
            &[("A", EntityType::Person), ("B", EntityType::Person)],
        );
        let g = build_cooccurrence_graph(&doc);
        assert_eq!(g.nodes.len(), 2);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn cooccurrence_matches_pairwise_oracle() {
        let doc = annotated(
            "A met B and C. D saw C. E slept.",
            &[
                ("A", EntityType::Person),
                ("B", EntityType::Person),
                ("C", EntityType::Person),
                ("D", EntityType::Person),
                ("E", EntityType::Person),
            ],
        );
        let g = build_cooccurrence_graph(&doc);

        // O(n^2) oracle over mention pairs.
        let mut expected = std::collections::BTreeSet::new();
        for a in &doc.mentions {
            for b in &doc.mentions {
                if a.surface != b.surface && a.sentence_index == b.sentence_index {
                    expected.insert((a.surface.clone(), b.surface.clone()));
                }
            }
        }
        let got: std::collections::BTreeSet<(String, String)> = g
            .edges
            .iter()
            .map(|&(s, d)| (g.nodes[s].surface.clone(), g.nodes[d].surface.clone()))
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn doc_entity_nodes_count_matches_distinct_surfaces() {
        let doc = annotated(
            "A met B. A left.",
            &[("A", EntityType::Person), ("B", EntityType::Person)],
        );
        let kb = index_kb([Triple::new("A", "knows", "B")]);
        let g = build_factual_graph(&doc, &kb, GraphOptions::default());
        assert_eq!(g.doc_entity_nodes.len(), doc.distinct_surfaces().len());
    }
}
