//! Knowledge-graph embedding toolkit: file formats, UMLS ingestion, threaded
//! training and evaluation, and the `kge` command line. Models, training and
//! metrics live in [`kge_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod ingest;
pub mod parallel;
pub mod report;
pub mod tsv;

pub use error::{Error, Result};
