//! Shared domain records: topics, corpus documents, run rows, annotations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::vision::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stance {
    Pro,
    Con,
}

impl Stance {
    pub const BOTH: [Stance; 2] = [Stance::Pro, Stance::Con];

    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Pro => "PRO",
            Stance::Con => "CON",
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PRO" => Ok(Stance::Pro),
            "CON" => Ok(Stance::Con),
            _ => Err(Error::InvalidArgument("stance must be PRO or CON")),
        }
    }
}

/// Relevance label assigned by an annotator (or by curation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    OffTopic,
    Pro,
    Con,
    Neutral,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::OffTopic, Label::Pro, Label::Con, Label::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::OffTopic => "OFF_TOPIC",
            Label::Pro => "PRO",
            Label::Con => "CON",
            Label::Neutral => "NEUTRAL",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_on_topic(self) -> bool {
        self != Label::OffTopic
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OFF_TOPIC" => Ok(Label::OffTopic),
            "PRO" => Ok(Label::Pro),
            "CON" => Ok(Label::Con),
            "NEUTRAL" => Ok(Label::Neutral),
            _ => Err(Error::InvalidArgument(
                "label must be one of OFF_TOPIC, PRO, CON, NEUTRAL",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Topic {
    pub id: u32,
    pub question: String,
}

/// One corpus image together with the text of the page it came from and the
/// text rendered inside the image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDocument {
    pub id: String,
    pub image: GrayImage,
    pub page_text: String,
    pub image_text: String,
}

/// One row of a run file.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunEntry {
    pub topic_id: u32,
    pub stance: Stance,
    pub image_id: String,
    pub rank: u32,
    pub score: f64,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Annotation {
    pub image_id: String,
    pub topic_id: u32,
    pub annotator_id: String,
    pub label: Label,
}

/// Checks the per-group run invariants: ranks `1..=k` contiguous in order,
/// scores finite and non-increasing, image ids unique within the group.
/// Groups themselves may appear in any order but must not be interleaved.
pub fn validate_run(entries: &[RunEntry]) -> Result<()> {
    let mut finished: BTreeSet<(u32, Stance)> = BTreeSet::new();
    let mut current: Option<(u32, Stance)> = None;
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut prev_score = f64::INFINITY;
    let mut expected_rank = 1u32;
    for e in entries {
        let key = (e.topic_id, e.stance);
        if current != Some(key) {
            if let Some(prev) = current {
                finished.insert(prev);
            }
            if finished.contains(&key) {
                return Err(Error::InvalidRun(format!(
                    "group ({}, {}) is not contiguous",
                    e.topic_id, e.stance
                )));
            }
            current = Some(key);
            seen.clear();
            prev_score = f64::INFINITY;
            expected_rank = 1;
        }
        if e.topic_id == 0 {
            return Err(Error::InvalidRun(format!("topic id must be positive ({})", e.image_id)));
        }
        if e.rank != expected_rank {
            return Err(Error::InvalidRun(format!(
                "group ({}, {}): expected rank {}, found {}",
                e.topic_id, e.stance, expected_rank, e.rank
            )));
        }
        if !e.score.is_finite() || e.score > prev_score {
            return Err(Error::InvalidRun(format!(
                "group ({}, {}): score at rank {} is not finite and non-increasing",
                e.topic_id, e.stance, e.rank
            )));
        }
        if e.image_id.is_empty() || e.image_id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidRun(format!(
                "image id {:?} is empty or contains whitespace",
                e.image_id
            )));
        }
        if e.tag.is_empty() || e.tag.chars().any(char::is_whitespace) {
            return Err(Error::InvalidRun(format!("tag {:?} is empty or contains whitespace", e.tag)));
        }
        if !seen.insert(e.image_id.as_str()) {
            return Err(Error::InvalidRun(format!(
                "group ({}, {}): duplicate image id {}",
                e.topic_id, e.stance, e.image_id
            )));
        }
        prev_score = e.score;
        expected_rank += 1;
    }
    Ok(())
}

/// Groups run entries by `(topic_id, stance)`, keeping rank order.
pub fn group_run(entries: &[RunEntry]) -> BTreeMap<(u32, Stance), Vec<&RunEntry>> {
    let mut groups: BTreeMap<(u32, Stance), Vec<&RunEntry>> = BTreeMap::new();
    for e in entries {
        groups.entry((e.topic_id, e.stance)).or_default().push(e);
    }
    for group in groups.values_mut() {
        group.sort_by_key(|e| e.rank);
    }
    groups
}
