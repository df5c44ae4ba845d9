use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::qrels::{relevance, Qrels};
use super::ttest::{paired_t_test, TTest};
use crate::error::Result;
use crate::types::{group_run, RunEntry, Stance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Count curated `NEUTRAL` images as relevant for both stances.
    pub neutral_relevant: bool,
    /// Ranks considered by average precision; `None` uses the whole list.
    pub ap_depth: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            neutral_relevant: false,
            ap_depth: Some(10),
        }
    }
}

fn is_relevant(qrels: &Qrels, topic_id: u32, image_id: &str, stance: Stance, neutral: bool) -> bool {
    // unjudged images are non-relevant
    qrels
        .get(&(topic_id, String::from(image_id)))
        .is_some_and(|l| relevance(*l, stance, neutral))
}

/// Relevant judged images for a `(topic, stance)` query.
pub fn relevant_count(qrels: &Qrels, topic_id: u32, stance: Stance, neutral: bool) -> usize {
    qrels
        .range((topic_id, String::new())..)
        .take_while(|((t, _), _)| *t == topic_id)
        .filter(|(_, l)| relevance(**l, stance, neutral))
        .count()
}

/// Relevant images among the first `k` ranked ids, divided by `k`.
pub fn precision_at_k(ranked: &[&str], qrels: &Qrels, topic_id: u32, stance: Stance, k: usize, neutral: bool) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let hits = ranked
        .iter()
        .take(k)
        .filter(|id| is_relevant(qrels, topic_id, id, stance, neutral))
        .count();
    hits as f64 / k as f64
}

/// `(1/R) Σ P@r` over relevant ranks `r ≤ depth`, with `R` the number of
/// relevant judged images; 0 when `R == 0`.
pub fn average_precision(
    ranked: &[&str],
    qrels: &Qrels,
    topic_id: u32,
    stance: Stance,
    depth: Option<usize>,
    neutral: bool,
) -> f64 {
    let r = relevant_count(qrels, topic_id, stance, neutral);
    if r == 0 {
        return 0.0;
    }
    let depth = depth.unwrap_or(ranked.len());
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, id) in ranked.iter().take(depth).enumerate() {
        if is_relevant(qrels, topic_id, id, stance, neutral) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / r as f64
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupMetrics {
    pub topic_id: u32,
    pub stance: Stance,
    pub precision_at_10: f64,
    pub precision_at_1: f64,
    pub average_precision: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    pub t_statistic: f64,
    pub p_value: f64,
    pub df: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub groups: usize,
    pub precision_at_10: f64,
    pub precision_at_1: f64,
    pub map: f64,
    pub comparison: Option<Comparison>,
    pub per_group: Vec<GroupMetrics>,
    pub notices: Vec<String>,
}

fn group_metrics(run: &[RunEntry], qrels: &Qrels, topics: &[u32], cfg: &EvalConfig) -> Vec<GroupMetrics> {
    let groups = group_run(run);
    let mut topics: Vec<u32> = topics.to_vec();
    topics.sort_unstable();
    topics.dedup();
    let mut out = Vec::with_capacity(topics.len() * 2);
    for &t in &topics {
        for stance in Stance::BOTH {
            let ranked: Vec<&str> = groups
                .get(&(t, stance))
                .map(|g| g.iter().map(|e| e.image_id.as_str()).collect())
                .unwrap_or_default();
            out.push(GroupMetrics {
                topic_id: t,
                stance,
                precision_at_10: precision_at_k(&ranked, qrels, t, stance, 10, cfg.neutral_relevant),
                precision_at_1: precision_at_k(&ranked, qrels, t, stance, 1, cfg.neutral_relevant),
                average_precision: average_precision(&ranked, qrels, t, stance, cfg.ap_depth, cfg.neutral_relevant),
            });
        }
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Mean AP over every `(topic, stance)` of `topics`; groups absent from the
/// run contribute 0.
pub fn mean_ap(run: &[RunEntry], qrels: &Qrels, topics: &[u32], cfg: &EvalConfig) -> f64 {
    mean(group_metrics(run, qrels, topics, cfg).iter().map(|g| g.average_precision))
}

/// Aggregate metrics over `topics` × {PRO, CON}; with a baseline, a paired
/// t-test over per-group AP.
pub fn evaluate(
    run: &[RunEntry],
    qrels: &Qrels,
    topics: &[u32],
    baseline: Option<&[RunEntry]>,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let per_group = group_metrics(run, qrels, topics, cfg);
    let mut notices = Vec::new();
    notices.push(String::from(
        "significance: paired two-sided Student's t-test over per-(topic, stance) average precision",
    ));
    let known: BTreeMap<u32, ()> = per_group.iter().map(|g| (g.topic_id, ())).collect();
    let outside = run.iter().filter(|e| !known.contains_key(&e.topic_id)).count();
    if outside > 0 {
        notices.push(format!("{outside} run entries belong to topics outside the evaluated set and were ignored"));
    }
    let mut comparison = None;
    if let Some(base) = baseline {
        if qrels.is_empty() {
            notices.push(String::from("qrels are empty; significance test skipped"));
        } else {
            let base_groups = group_metrics(base, qrels, topics, cfg);
            let a: Vec<f64> = per_group.iter().map(|g| g.average_precision).collect();
            let b: Vec<f64> = base_groups.iter().map(|g| g.average_precision).collect();
            match paired_t_test(&a, &b) {
                Ok(TTest { t, p, df }) => {
                    comparison = Some(Comparison {
                        t_statistic: t,
                        p_value: p,
                        df,
                    })
                }
                Err(e) => notices.push(format!("significance test skipped: {e}")),
            }
        }
    }
    Ok(EvalReport {
        groups: per_group.len(),
        precision_at_10: mean(per_group.iter().map(|g| g.precision_at_10)),
        precision_at_1: mean(per_group.iter().map(|g| g.precision_at_1)),
        map: mean(per_group.iter().map(|g| g.average_precision)),
        comparison,
        per_group,
        notices,
    })
}
