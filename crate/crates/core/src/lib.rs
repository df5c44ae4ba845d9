//! Core algorithms for stance-specific argument image retrieval.
//!
//! Everything here is pure computation over in-memory data and builds with
//! `no_std` + `alloc`: query preparation, the BM25 inverted index, the
//! stance gate, prompt construction and the procedural reference-image
//! generator, SIFT features with randomized kd-tree matching and RANSAC
//! homographies, the pipeline orchestration, and the evaluation metrics.
//! File formats, HTTP clients and the command line live in the `argimg`
//! companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bm25;
pub mod error;
pub mod eval;
pub mod hash;
pub mod imagegen;
pub mod pipeline;
pub mod query;
pub mod stance;
pub mod types;
pub mod vision;

pub use error::{Error, Result};
pub use types::{Annotation, ImageDocument, Label, RunEntry, Stance, Topic};
