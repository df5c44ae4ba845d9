//! Topics as JSON lines: `{"id": 1, "question": "..."}`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use argimg_core::Topic;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopicLine {
    id: u32,
    question: String,
}

/// Parses topics in file order. Blank lines are skipped; `path` is only
/// used in error messages.
pub fn parse_topics(text: &str, path: &Path) -> Result<Vec<Topic>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let t: TopicLine = serde_json::from_str(line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if t.id == 0 {
            return Err(Error::parse(path, line_no, "topic id must be positive"));
        }
        if t.question.trim().is_empty() {
            return Err(Error::parse(path, line_no, "empty question"));
        }
        if !seen.insert(t.id) {
            return Err(Error::DuplicateTopic {
                path: path.to_path_buf(),
                line: line_no,
                id: t.id,
            });
        }
        out.push(Topic {
            id: t.id,
            question: t.question,
        });
    }
    Ok(out)
}

pub fn load_topics(path: &Path) -> Result<Vec<Topic>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_topics(&text, path)
}

pub fn format_topics(topics: &[Topic]) -> String {
    topics
        .iter()
        .map(|t| serde_json::json!({"id": t.id, "question": t.question}).to_string() + "\n")
        .collect()
}
