//! On-disk BM25 index: a `ARGIMG-BM25 <version>` line followed by JSON.

use std::fs;
use std::path::Path;

use argimg_core::bm25::Index;

use crate::error::{Error, Result};

pub const MAGIC: &str = "ARGIMG-BM25";
pub const VERSION: u32 = 1;

pub fn encode_index(index: &Index) -> String {
    let body = serde_json::to_string(index).expect("index serializes");
    format!("{MAGIC} {VERSION}\n{body}\n")
}

pub fn decode_index(text: &str, path: &Path) -> Result<Index> {
    let bad = |m: String| Error::IndexFormat {
        path: path.to_path_buf(),
        message: m,
    };
    let (header, body) = text.split_once('\n').ok_or_else(|| bad("missing header".into()))?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| bad(format!("unexpected header {header:?}")))?;
    if version != VERSION {
        return Err(bad(format!("version {version}, expected {VERSION}")));
    }
    let index: Index = serde_json::from_str(body).map_err(|e| bad(e.to_string()))?;
    index.validate().map_err(|e| bad(e.to_string()))?;
    Ok(index)
}

pub fn write_index(index: &Index, path: &Path) -> Result<()> {
    fs::write(path, encode_index(index)).map_err(|e| Error::io(path, e))
}

pub fn read_index(path: &Path) -> Result<Index> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_index(&text, path)
}
