use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Annotation, Label, Stance};

/// Curated label per `(topic_id, image_id)`.
pub type Qrels = BTreeMap<(u32, String), Label>;

pub const RATERS: usize = 3;

/// Majority label of three annotations; with three distinct labels the
/// image is on topic for at least two raters and becomes `Neutral`.
pub fn curate(labels: &[Label]) -> Option<Label> {
    if labels.len() != RATERS {
        return None;
    }
    for (i, a) in labels.iter().enumerate() {
        if labels[i + 1..].contains(a) {
            return Some(*a);
        }
    }
    debug_assert!(labels.iter().filter(|l| l.is_on_topic()).count() >= 2);
    Some(Label::Neutral)
}

/// Groups annotations by `(topic, image)` and curates each group.
pub fn curate_all(annotations: &[Annotation]) -> Result<Qrels> {
    let mut groups: BTreeMap<(u32, String), Vec<(&str, Label)>> = BTreeMap::new();
    for a in annotations {
        groups
            .entry((a.topic_id, a.image_id.clone()))
            .or_default()
            .push((a.annotator_id.as_str(), a.label));
    }
    let mut qrels = Qrels::new();
    for ((topic_id, image_id), group) in groups {
        let mut annotators: Vec<&str> = group.iter().map(|g| g.0).collect();
        annotators.sort_unstable();
        annotators.dedup();
        let labels: Vec<Label> = group.iter().map(|g| g.1).collect();
        let label = match curate(&labels) {
            Some(l) if annotators.len() == labels.len() => l,
            _ => {
                return Err(Error::RaterCount {
                    topic_id,
                    found: labels.len(),
                    image_id,
                    expected: RATERS,
                })
            }
        };
        qrels.insert((topic_id, image_id), label);
    }
    Ok(qrels)
}

/// Whether a curated label counts as relevant for a query of `stance`.
pub fn relevance(label: Label, stance: Stance, neutral_relevant: bool) -> bool {
    match (label, stance) {
        (Label::Pro, Stance::Pro) | (Label::Con, Stance::Con) => true,
        (Label::Neutral, _) => neutral_relevant,
        _ => false,
    }
}
