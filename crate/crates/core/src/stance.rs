//! Zero-shot stance scoring and the stance gate.
//!
//! A scorer receives a text and three candidate labels (`pro <q>`,
//! `contra <q>`, `neutral <q>`) and returns one probability per label. The
//! gate puts candidates whose most probable label matches the query stance
//! first, and orders both partitions by the probability of the target label.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hash::{stable_hash, unit_f64};
use crate::query::Query;
use crate::types::{ImageDocument, Stance};

pub const LABEL_PREFIXES: [&str; 3] = ["pro", "contra", "neutral"];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StanceScores {
    pub pro: f64,
    pub contra: f64,
    pub neutral: f64,
}

impl StanceScores {
    /// Normalizes raw non-negative scores in label order.
    pub fn from_raw(raw: [f64; 3]) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Scorer(format!("malformed scores {raw:?}")));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::Scorer(format!("scores {raw:?} sum to zero")));
        }
        Ok(Self {
            pro: raw[0] / sum,
            contra: raw[1] / sum,
            neutral: raw[2] / sum,
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pro, self.contra, self.neutral]
    }

    /// Index of the most probable label (first wins on ties).
    pub fn argmax(&self) -> usize {
        let a = self.as_array();
        let mut best = 0;
        for i in 1..3 {
            if a[i] > a[best] {
                best = i;
            }
        }
        best
    }

    pub fn target(&self, stance: Stance) -> f64 {
        match stance {
            Stance::Pro => self.pro,
            Stance::Con => self.contra,
        }
    }
}

/// Which text of a document is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StanceSource {
    PageText,
    ImageText,
    Both,
}

/// Zero-shot classifier protocol.
pub trait StanceScorer {
    /// Returns one non-negative score per label, in label order.
    fn classify(&self, text: &str, labels: &[String; 3]) -> Result<[f64; 3]>;
}

impl<T: StanceScorer + ?Sized> StanceScorer for &T {
    fn classify(&self, text: &str, labels: &[String; 3]) -> Result<[f64; 3]> {
        (**self).classify(text, labels)
    }
}

/// `pro <q>`, `contra <q>`, `neutral <q>` with any leading `not` removed
/// from `<q>`.
pub fn stance_labels(query: &Query) -> Result<[String; 3]> {
    let terms = query.unnegated_terms();
    if terms.is_empty() {
        return Err(Error::EmptyQuery {
            topic_id: query.topic_id,
        });
    }
    let q = terms.join(" ");
    Ok(LABEL_PREFIXES.map(|p| format!("{p} {q}")))
}

pub fn score_stance<S: StanceScorer + ?Sized>(scorer: &S, text: &str, query: &Query) -> Result<StanceScores> {
    let labels = stance_labels(query)?;
    StanceScores::from_raw(scorer.classify(text, &labels)?)
}

fn score_document<S: StanceScorer + ?Sized>(
    scorer: &S,
    doc: &ImageDocument,
    query: &Query,
    source: StanceSource,
) -> Result<StanceScores> {
    match source {
        StanceSource::PageText => score_stance(scorer, &doc.page_text, query),
        StanceSource::ImageText => score_stance(scorer, &doc.image_text, query),
        StanceSource::Both => {
            let page = score_stance(scorer, &doc.page_text, query)?;
            if doc.image_text == doc.page_text {
                return Ok(page);
            }
            let image = score_stance(scorer, &doc.image_text, query)?;
            let mean = [
                (page.pro + image.pro) / 2.0,
                (page.contra + image.contra) / 2.0,
                (page.neutral + image.neutral) / 2.0,
            ];
            StanceScores::from_raw(mean)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatedCandidate {
    /// Position in the gate's input list.
    pub input_index: usize,
    pub image_id: String,
    pub scores: StanceScores,
    /// Whether the most probable label is the query's stance.
    pub agrees: bool,
}

/// Orders candidates: stance-agreeing first, then by target-label
/// probability descending, then image id; keeps the first `keep`.
pub fn stance_gate<S: StanceScorer + ?Sized>(
    candidates: &[(&ImageDocument, f64)],
    query: &Query,
    scorer: &S,
    source: StanceSource,
    keep: usize,
) -> Result<Vec<GatedCandidate>> {
    if keep == 0 {
        return Err(Error::InvalidArgument("keep must be at least 1"));
    }
    let target_idx = match query.stance {
        Stance::Pro => 0,
        Stance::Con => 1,
    };
    let mut out = Vec::with_capacity(candidates.len());
    for (i, (doc, _)) in candidates.iter().enumerate() {
        let scores = score_document(scorer, doc, query, source)?;
        out.push(GatedCandidate {
            input_index: i,
            image_id: doc.id.clone(),
            agrees: scores.argmax() == target_idx,
            scores,
        });
    }
    let stance = query.stance;
    out.sort_by(|a, b| {
        b.agrees
            .cmp(&a.agrees)
            .then_with(|| b.scores.target(stance).total_cmp(&a.scores.target(stance)))
            .then_with(|| a.image_id.cmp(&b.image_id))
    });
    out.truncate(keep);
    Ok(out)
}

/// Deterministic model-free scorer.
///
/// Fixture entries keyed by `(stable_hash(text), query)` are returned
/// verbatim; anything else gets a softmax over pseudo-random logits derived
/// from `(text, label)`.
#[derive(Debug, Clone, Default)]
pub struct StubScorer {
    fixtures: BTreeMap<(u64, String), [f64; 3]>,
}

impl StubScorer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text_key(text: &str) -> u64 {
        stable_hash(&[b"stance-text", text.as_bytes()])
    }

    /// Registers scores for `text` under query string `query` (the label
    /// text after the stance prefix).
    pub fn insert_fixture(&mut self, text: &str, query: &str, scores: [f64; 3]) {
        self.fixtures.insert((Self::text_key(text), query.to_string()), scores);
    }

    pub fn insert_fixture_by_hash(&mut self, text_hash: u64, query: &str, scores: [f64; 3]) {
        self.fixtures.insert((text_hash, query.to_string()), scores);
    }

    pub fn fixture_count(&self) -> usize {
        self.fixtures.len()
    }
}

impl StanceScorer for StubScorer {
    fn classify(&self, text: &str, labels: &[String; 3]) -> Result<[f64; 3]> {
        let query = labels[0]
            .strip_prefix("pro ")
            .unwrap_or(labels[0].as_str());
        if let Some(s) = self.fixtures.get(&(Self::text_key(text), query.to_string())) {
            return Ok(*s);
        }
        let logits = labels.clone().map(|l| {
            let h = stable_hash(&[b"stance-stub", text.as_bytes(), l.as_bytes()]);
            4.0 * unit_f64(h, 0)
        });
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps = logits.map(|l| libm::exp(l - max));
        let sum: f64 = exps.iter().sum();
        Ok(exps.map(|e| e / sum))
    }
}
