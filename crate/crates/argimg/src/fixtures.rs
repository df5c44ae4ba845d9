//! Stance fixture files for the stub scorer: a JSON array of
//! `{"text": str | "text_hash": u64, "query": str, "scores": [f64; 3]}`.

use std::fs;
use std::path::Path;

use argimg_core::stance::StubScorer;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fixture {
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    text_hash: Option<u64>,
    query: String,
    scores: [f64; 3],
}

pub fn parse_fixtures(text: &str, path: &Path) -> Result<StubScorer> {
    let items: Vec<Fixture> = serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let mut scorer = StubScorer::new();
    for (i, f) in items.into_iter().enumerate() {
        let hash = match (f.text, f.text_hash) {
            (Some(t), None) => StubScorer::text_key(&t),
            (None, Some(h)) => h,
            _ => {
                return Err(Error::parse(
                    path,
                    0,
                    format!("fixture {i}: exactly one of text and text_hash is required"),
                ))
            }
        };
        scorer.insert_fixture_by_hash(hash, &f.query, f.scores);
    }
    Ok(scorer)
}

pub fn load_fixtures(path: &Path) -> Result<StubScorer> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fixtures(&text, path)
}
