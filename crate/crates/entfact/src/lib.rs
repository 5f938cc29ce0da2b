//! Toolkit for fabricating entity-manipulated news datasets and detecting them.
//!
//! The crate is organized around a small pipeline:
//!
//! 1. [`corpus`] ingests JSONL news corpora and attaches typed entity mentions,
//!    either pre-annotated or via a deterministic gazetteer annotator.
//! 2. [`manipulate`] builds frequency tables, picks target entities and replaces
//!    them with three strategies (most-frequent band, least-frequent band, or a
//!    constrained generative proposal through a [`generator`] port).
//! 3. [`kgraph`] parses knowledge-base triple dumps and builds per-document
//!    factual graphs (KB one-hop or sentence co-occurrence).
//! 4. [`detector`] trains a joint model: GCN over the factual graph fused with a
//!    document encoder, an article classifier and a per-entity classifier, all
//!    with hand-derived gradients.
//! 5. [`eval`] computes detection accuracy, entity precision/recall/F1, paired
//!    bootstrap significance, unknown-entity subsets and dataset statistics.
//! 6. [`pipeline`] orchestrates everything from a single TOML config with
//!    labeled sub-seeds and content-hash manifests.
//!
//! See the `examples/` directory for one runnable example per capability, and
//! the `entfact` binary for the batch pipeline.

pub mod corpus;
pub mod detector;
pub mod eval;
pub mod generator;
pub mod kgraph;
pub mod manipulate;
pub mod pipeline;
pub mod seeding;
