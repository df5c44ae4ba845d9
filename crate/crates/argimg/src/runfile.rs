//! Run files: `topic_id stance image_id rank score tag`, single spaces, six
//! decimal scores, LF endings.

use std::fs;
use std::path::Path;

use argimg_core::types::validate_run;
use argimg_core::{RunEntry, Stance};

use crate::error::{Error, Result};

pub fn format_entry(e: &RunEntry) -> String {
    format!(
        "{} {} {} {} {:.6} {}",
        e.topic_id, e.stance, e.image_id, e.rank, e.score, e.tag
    )
}

/// Serializes a valid run. Scores round to six decimals, so a read-back
/// is exact only for scores representable at that precision.
pub fn format_run(entries: &[RunEntry]) -> Result<String> {
    validate_run(entries)?;
    let mut out = String::new();
    for e in entries {
        out.push_str(&format_entry(e));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_run(entries: &[RunEntry], path: &Path) -> Result<()> {
    let text = format_run(entries)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_line(line: &str) -> std::result::Result<RunEntry, String> {
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != 6 || fields.iter().any(|f| f.is_empty()) {
        return Err(format!("expected 6 single-space separated fields, got {line:?}"));
    }
    let topic_id: u32 = fields[0].parse().map_err(|_| format!("bad topic id {:?}", fields[0]))?;
    if topic_id == 0 {
        return Err("topic id must be positive".into());
    }
    let stance: Stance = fields[1].parse().map_err(|_| format!("bad stance {:?}", fields[1]))?;
    let rank: u32 = fields[3].parse().map_err(|_| format!("bad rank {:?}", fields[3]))?;
    if rank == 0 {
        return Err("ranks are 1-based".into());
    }
    let score: f64 = fields[4].parse().map_err(|_| format!("bad score {:?}", fields[4]))?;
    if !score.is_finite() {
        return Err("score must be finite".into());
    }
    Ok(RunEntry {
        topic_id,
        stance,
        image_id: fields[2].to_string(),
        rank,
        score,
        tag: fields[5].to_string(),
    })
}

/// Parses and validates a run; `path` is only used in error messages.
pub fn parse_run(text: &str, path: &Path) -> Result<Vec<RunEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        out.push(parse_line(line).map_err(|m| Error::parse(path, i + 1, m))?);
    }
    validate_run(&out)?;
    Ok(out)
}

pub fn read_run(path: &Path) -> Result<Vec<RunEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run(&text, path)
}
