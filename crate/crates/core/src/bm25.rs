//! Inverted index with BM25 ranking over (truncated) page text.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::query::{tokenize, VerbLexicon};

pub const DEFAULT_MAX_CHARS: usize = 4096;
pub const DEFAULT_K: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredImage {
    pub image_id: String,
    pub score: f64,
}

/// A `(doc ordinal, term frequency)` pair.
pub type Posting = (u32, u32);

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Index {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_len: Vec<u32>,
    avg_len: f64,
    doc_ids: Vec<String>,
    max_chars: usize,
}

/// Lowercased non-punctuation tokens of the first `max_chars` characters.
pub fn index_terms(text: &str, max_chars: usize) -> Vec<String> {
    let end = text
        .char_indices()
        .nth(max_chars)
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    tokenize(&text[..end], &VerbLexicon::default())
        .into_iter()
        .filter(|t| !t.is_punct)
        .map(|t| t.text)
        .collect()
}

impl Index {
    /// Builds the index from `(image_id, page_text)` pairs; ordinals follow
    /// iteration order.
    pub fn build<'a, I>(docs: I, max_chars: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        if max_chars == 0 {
            return Err(Error::InvalidArgument("max_chars must be positive"));
        }
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_len = Vec::new();
        let mut doc_ids = Vec::new();
        for (ordinal, (id, text)) in docs.into_iter().enumerate() {
            let terms = index_terms(text, max_chars);
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for t in &terms {
                *counts.entry(t.clone()).or_default() += 1;
            }
            for (term, tf) in counts {
                postings.entry(term).or_default().push((ordinal as u32, tf));
            }
            doc_len.push(terms.len() as u32);
            doc_ids.push(String::from(id));
        }
        if doc_ids.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let avg_len = doc_len.iter().map(|&l| f64::from(l)).sum::<f64>() / doc_len.len() as f64;
        Ok(Self {
            postings,
            doc_len,
            avg_len,
            doc_ids,
            max_chars,
        })
    }

    pub fn build_from_documents(docs: &[crate::ImageDocument], max_chars: usize) -> Result<Self> {
        Self::build(docs.iter().map(|d| (d.id.as_str(), d.page_text.as_str())), max_chars)
    }

    /// Re-checks structural invariants; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        let n = self.doc_ids.len();
        if n == 0 || self.doc_len.len() != n {
            return Err(Error::InvalidArgument("index document tables are inconsistent"));
        }
        for list in self.postings.values() {
            if list.windows(2).any(|w| w[0].0 >= w[1].0)
                || list.iter().any(|&(d, tf)| d as usize >= n || tf == 0)
            {
                return Err(Error::InvalidArgument("index postings are not sorted or out of range"));
            }
        }
        let mean = self.doc_len.iter().map(|&l| f64::from(l)).sum::<f64>() / n as f64;
        if (mean - self.avg_len).abs() > 1e-9 * mean.max(1.0) {
            return Err(Error::InvalidArgument("index average length is inconsistent"));
        }
        Ok(())
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avg_len(&self) -> f64 {
        self.avg_len
    }

    pub fn doc_len(&self) -> &[u32] {
        &self.doc_len
    }

    pub fn doc_id(&self, ordinal: usize) -> &str {
        &self.doc_ids[ordinal]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn max_chars(&self) -> usize {
        self.max_chars
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_terms(&self) -> usize {
        self.postings.len()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.num_docs() as f64;
        let df = self.postings(term).len() as f64;
        libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
    }

    fn term_weight(&self, idf: f64, tf: u32, ordinal: usize, p: Bm25Params) -> f64 {
        let tf = f64::from(tf);
        let dl = f64::from(self.doc_len[ordinal]);
        let norm = if self.avg_len > 0.0 {
            1.0 - p.b + p.b * dl / self.avg_len
        } else {
            1.0 - p.b
        };
        idf * tf * (p.k1 + 1.0) / (tf + p.k1 * norm)
    }

    /// BM25 score of one document. Duplicate query terms count once.
    pub fn score(&self, query_terms: &[String], ordinal: usize, params: Bm25Params) -> f64 {
        assert!(ordinal < self.num_docs(), "document ordinal out of range");
        let distinct: BTreeSet<&str> = query_terms.iter().map(String::as_str).collect();
        distinct
            .into_iter()
            .filter_map(|t| {
                let list = self.postings(t);
                list.binary_search_by_key(&(ordinal as u32), |&(d, _)| d)
                    .ok()
                    .map(|pos| self.term_weight(self.idf(t), list[pos].1, ordinal, params))
            })
            .sum()
    }

    /// Top-`k` documents with positive score, by score descending then id.
    pub fn retrieve(&self, query_terms: &[String], k: usize, params: Bm25Params) -> Vec<ScoredImage> {
        self.retrieve_ordinals(query_terms, k, params)
            .into_iter()
            .map(|(ord, score)| ScoredImage {
                image_id: self.doc_ids[ord].clone(),
                score,
            })
            .collect()
    }

    /// Same as [`Index::retrieve`] but returns document ordinals.
    pub fn retrieve_ordinals(&self, query_terms: &[String], k: usize, params: Bm25Params) -> Vec<(usize, f64)> {
        let distinct: BTreeSet<&str> = query_terms.iter().map(String::as_str).collect();
        let mut acc = vec![0.0f64; self.num_docs()];
        let mut touched = vec![false; self.num_docs()];
        for t in distinct {
            let idf = self.idf(t);
            for &(d, tf) in self.postings(t) {
                acc[d as usize] += self.term_weight(idf, tf, d as usize, params);
                touched[d as usize] = true;
            }
        }
        let mut hits: Vec<(usize, f64)> = acc
            .into_iter()
            .enumerate()
            .filter(|&(d, s)| touched[d] && s > 0.0)
            .collect();
        hits.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.doc_ids[a.0].cmp(&self.doc_ids[b.0]))
        });
        hits.truncate(k);
        hits
    }
}
