//! Annotation and qrels TSV files.
//!
//! Annotations: `image_id<TAB>topic_id<TAB>annotator_id<TAB>label`.
//! Qrels: `topic_id<TAB>image_id<TAB>label`.

use std::fs;
use std::path::Path;

use argimg_core::eval::Qrels;
use argimg_core::{Annotation, Label};

use crate::error::{Error, Result};

fn fields(line: &str, n: usize) -> std::result::Result<Vec<&str>, String> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != n || f.iter().any(|x| x.is_empty()) {
        return Err(format!("expected {n} tab-separated fields, got {line:?}"));
    }
    Ok(f)
}

fn topic(s: &str) -> std::result::Result<u32, String> {
    match s.parse::<u32>() {
        Ok(t) if t > 0 => Ok(t),
        _ => Err(format!("bad topic id {s:?}")),
    }
}

fn label(s: &str) -> std::result::Result<Label, String> {
    s.parse().map_err(|_| format!("bad label {s:?}"))
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_annotations(text: &str, path: &Path) -> Result<Vec<Annotation>> {
    lines(text)
        .map(|(n, line)| {
            let parse = || -> std::result::Result<Annotation, String> {
                let f = fields(line, 4)?;
                Ok(Annotation {
                    image_id: f[0].to_string(),
                    topic_id: topic(f[1])?,
                    annotator_id: f[2].to_string(),
                    label: label(f[3])?,
                })
            };
            parse().map_err(|m| Error::parse(path, n, m))
        })
        .collect()
}

pub fn load_annotations(path: &Path) -> Result<Vec<Annotation>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text, path)
}

pub fn format_annotations(annotations: &[Annotation]) -> String {
    annotations
        .iter()
        .map(|a| format!("{}\t{}\t{}\t{}\n", a.image_id, a.topic_id, a.annotator_id, a.label))
        .collect()
}

/// Parses qrels; a repeated key is an error.
pub fn parse_qrels(text: &str, path: &Path) -> Result<Qrels> {
    let mut q = Qrels::new();
    for (n, line) in lines(text) {
        let f = fields(line, 3).map_err(|m| Error::parse(path, n, m))?;
        let t = topic(f[0]).map_err(|m| Error::parse(path, n, m))?;
        let l = label(f[2]).map_err(|m| Error::parse(path, n, m))?;
        if q.insert((t, f[1].to_string()), l).is_some() {
            return Err(Error::parse(path, n, format!("duplicate judgment for ({t}, {})", f[1])));
        }
    }
    Ok(q)
}

pub fn load_qrels(path: &Path) -> Result<Qrels> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_qrels(&text, path)
}

pub fn format_qrels(qrels: &Qrels) -> String {
    qrels
        .iter()
        .map(|((t, id), l)| format!("{t}\t{id}\t{l}\n"))
        .collect()
}

pub fn write_qrels(qrels: &Qrels, path: &Path) -> Result<()> {
    fs::write(path, format_qrels(qrels)).map_err(|e| Error::io(path, e))
}
