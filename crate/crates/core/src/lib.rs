//! Knowledge-graph embedding core.
//!
//! Everything in this crate is allocation-only (`alloc`) and IO-free so it can
//! be embedded anywhere; file formats, threads and the command line live in the
//! `kge` companion crate.
//!
//! Module map:
//! - [`kg`]: vocabularies, triples, triple stores and semantic labels
//! - [`models`]: TransE, DistMult, ComplEx, SimplE and RotatE scores and gradients
//! - [`splitter`]: reciprocal-aware train/valid/test splitting and unseen-entity repair
//! - [`trainer`]: negative sampling, self-adversarial loss and SGD
//! - [`eval`]: filtered ranking, metrics and relation categories
//! - [`probe`]: linear entity classification and cosine bootstrap power

#![cfg_attr(not(test), no_std)]
// `!(x <= y)` is used on purpose so NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod eval;
pub mod kg;
mod math;
pub mod models;
pub mod probe;
pub mod splitter;
pub mod trainer;

pub use eval::{FilterSet, Metrics, RankingOutcome, Slot, Target};
pub use kg::{EntityId, RelationId, SemanticLabels, Split, Triple, TripleStore, Vocabulary};
pub use models::{EmbeddingTable, ModelConfig, ModelKind, Norm};
pub use trainer::{Checkpoint, TrainConfig};
