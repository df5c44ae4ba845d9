//! File formats, corpus access, inference-service clients and the
//! multi-threaded runner behind the `argimg` command.

pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod image_io;
pub mod index_file;
pub mod infer;
pub mod judgments;
pub mod report;
pub mod resources;
pub mod runfile;
pub mod runner;
pub mod synth;
pub mod topics;

pub use corpus::Corpus;
pub use error::{Error, Result};
pub use infer::InferClient;
