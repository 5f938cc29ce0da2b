//! Knowledge-base triples and per-document factual graphs.

mod build;
mod parse;
mod stats;

pub use build::{build_cooccurrence_graph, build_factual_graph, GraphOptions};
pub use parse::{parse_triples, ParseOutcome, TripleFormat};
pub use stats::{kb_coverage_stats, CoverageStats};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A subject-relation-object fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        relation: impl Into<String>,
        object: impl Into<String>,
    ) -> Triple {
        Triple {
            subject: subject.into(),
            relation: relation.into(),
            object: object.into(),
        }
    }
}

/// Surface normalization used for all KB lookups: lowercase, collapse internal
/// whitespace, trim.
pub fn normalize(surface: &str) -> String {
    surface
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// An indexed, deduplicated triple store.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    triples: Vec<Triple>,
    subject_index: HashMap<String, Vec<usize>>,
}

/// Builds a [`KnowledgeBase`]: exact-duplicate triples are dropped and the
/// survivors indexed by normalized subject.
pub fn index_kb(triples: impl IntoIterator<Item = Triple>) -> KnowledgeBase {
    let mut kb = KnowledgeBase::default();
    let mut seen = std::collections::HashSet::new();
    for t in triples {
        if !seen.insert(t.clone()) {
            continue;
        }
        let key = normalize(&t.subject);
        kb.subject_index
            .entry(key)
            .or_default()
            .push(kb.triples.len());
        kb.triples.push(t);
    }
    kb
}

impl KnowledgeBase {
    /// All triples whose normalized subject equals the normalized query
    /// surface: the query entity's one-hop neighborhood.
    pub fn one_hop(&self, surface: &str) -> Vec<&Triple> {
        match self.subject_index.get(&normalize(surface)) {
            Some(indices) => indices.iter().map(|&i| &self.triples[i]).collect(),
            None => Vec::new(),
        }
    }

    pub fn contains_subject(&self, surface: &str) -> bool {
        self.subject_index.contains_key(&normalize(surface))
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Entity,
    Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub kind: NodeKind,
    pub surface: String,
}

/// Per-document directed graph of entity and relation nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactualGraph {
    pub nodes: Vec<GraphNode>,
    /// Directed `(src, dst)` pairs, deduplicated, in insertion order.
    pub edges: Vec<(usize, usize)>,
    /// Node ids of the document's entities, in first-mention order.
    pub doc_entity_nodes: Vec<usize>,
    /// Per node, in-neighbors sorted ascending (the aggregation set N(v)).
    pub in_neighbors: Vec<Vec<usize>>,
}

impl FactualGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Undirected neighbor lists (union of in- and out-neighbors), sorted.
    pub fn symmetric_neighbors(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.nodes.len()];
        for &(s, d) in &self.edges {
            lists[d].push(s);
            lists[s].push(d);
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        lists
    }

    /// Debug dump matching the documented JSON schema.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nodes": self.nodes.iter().map(|n| serde_json::json!({
                "id": n.id,
                "kind": n.kind,
                "surface": n.surface,
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(s, d)| vec![s, d]).collect::<Vec<_>>(),
            "doc_entity_nodes": self.doc_entity_nodes,
        })
    }
}

#[derive(Debug, Error)]
pub enum KgraphError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{malformed} of {total} non-empty lines malformed; wrong format flag?")]
    FormatError { malformed: usize, total: usize },
}
