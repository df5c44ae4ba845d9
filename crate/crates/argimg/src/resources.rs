//! Zipf table and verb lexicon overrides.

use std::fs;
use std::path::Path;

use argimg_core::query::{QueryBuilder, VerbLexicon, ZipfTable, DEFAULT_ZIPF_THRESHOLD};

use crate::error::{Error, Result};

pub fn load_zipf(path: &Path) -> Result<ZipfTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ZipfTable::parse_tsv(&text).map_err(|e| match e {
        argimg_core::Error::Parse { line, message } => Error::parse(path, line, message),
        other => other.into(),
    })
}

pub fn load_verbs(path: &Path) -> Result<VerbLexicon> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(VerbLexicon::from_lines(&text))
}

/// Query builder over the bundled English resources unless overridden.
pub fn query_builder(zipf: Option<&Path>, verbs: Option<&Path>, threshold: Option<f64>) -> Result<QueryBuilder> {
    let zipf = zipf.map(load_zipf).transpose()?.unwrap_or_else(ZipfTable::english);
    let verbs = verbs.map(load_verbs).transpose()?.unwrap_or_else(VerbLexicon::english);
    Ok(QueryBuilder::new(verbs, zipf, threshold.unwrap_or(DEFAULT_ZIPF_THRESHOLD)))
}
