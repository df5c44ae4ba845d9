use std::collections::BTreeSet;

use argimg_core::bm25::{Index, DEFAULT_MAX_CHARS};
use argimg_core::imagegen::{value_noise, StubGenerator};
use argimg_core::pipeline::{
    plan_groups, pool_runs, pooled_count, run_pipeline, OrderMode, PipelineConfig, PipelineId,
};
use argimg_core::query::QueryBuilder;
use argimg_core::stance::StubScorer;
use argimg_core::types::validate_run;
use argimg_core::{ImageDocument, RunEntry, Stance, Topic};
use proptest::prelude::*;

const TEXTS: [&str; 12] = [
    "sex education in schools is needed",
    "schools should not teach sex education",
    "education budgets for schools",
    "sex education reduces teen pregnancy",
    "a photo of a school bus",
    "students need education",
    "fossil fuels and climate",
    "ban fossil fuels now",
    "coal plants burn fossil fuels",
    "we need schools",
    "unrelated gardening tips",
    "education education education sex",
];

fn corpus() -> Vec<ImageDocument> {
    TEXTS
        .iter()
        .enumerate()
        .map(|(i, t)| ImageDocument {
            id: format!("I{i:02}"),
            image: value_noise(i as u64 + 100, 96, 96),
            page_text: t.to_string(),
            image_text: if i % 2 == 0 { t.to_string() } else { String::new() },
        })
        .collect()
}

fn topics() -> Vec<Topic> {
    vec![
        Topic { id: 1, question: "Do we need sex education in schools?".into() },
        Topic { id: 2, question: "Should governments ban fossil fuels?".into() },
        Topic { id: 3, question: "Is it the one?".into() },
    ]
}

fn index(docs: &[ImageDocument]) -> Index {
    Index::build_from_documents(docs, DEFAULT_MAX_CHARS).unwrap()
}

fn run(id: PipelineId, scorer: &StubScorer) -> argimg_core::pipeline::RunResult {
    let docs = corpus();
    let mut cfg = PipelineConfig::new(id);
    cfg.preselect_k = 8;
    cfg.output_depth = 5;
    run_pipeline(&cfg, &topics(), docs.as_slice(), &index(&docs), &QueryBuilder::default(), scorer, &StubGenerator)
        .unwrap()
}

#[test]
fn runs_are_valid_and_inside_preselection() {
    let docs = corpus();
    let idx = index(&docs);
    for id in [PipelineId::BaselineRef, PipelineId::P0, PipelineId::P1, PipelineId::P2, PipelineId::P3] {
        let mut cfg = PipelineConfig::new(id);
        cfg.preselect_k = 8;
        cfg.output_depth = 5;
        let scorer = StubScorer::new();
        let plan = plan_groups(&cfg, &topics(), docs.as_slice(), &idx, &QueryBuilder::default(), &scorer).unwrap();
        let result = run(id, &scorer);
        validate_run(&result.entries).unwrap();
        for e in &result.entries {
            let group = plan
                .groups
                .iter()
                .find(|g| g.query.topic_id == e.topic_id && g.query.stance == e.stance)
                .unwrap();
            let pre: BTreeSet<&str> = group.candidates.iter().map(|c| c.image_id.as_str()).collect();
            assert!(pre.contains(e.image_id.as_str()), "{id}: {} outside preselection", e.image_id);
            assert_eq!(e.tag, cfg.tag);
        }
    }
}

#[test]
fn empty_query_topic_is_skipped_with_warning() {
    let result = run(PipelineId::P0, &StubScorer::new());
    assert!(result.entries.iter().all(|e| e.topic_id != 3));
    assert!(result.warnings.iter().any(|w| w.starts_with("topic 3")));
    // the baseline uses the raw question and keeps topic 3 if it matches anything
    let base = run(PipelineId::BaselineRef, &StubScorer::new());
    assert!(base.entries.iter().any(|e| e.topic_id == 1));
}

#[test]
fn baseline_scores_are_bm25() {
    let docs = corpus();
    let idx = index(&docs);
    let result = run(PipelineId::BaselineRef, &StubScorer::new());
    let terms: Vec<String> = ["do", "we", "need", "sex", "education", "in", "schools"].map(String::from).to_vec();
    let want = idx.retrieve(&terms, 5, Default::default());
    let got: Vec<&RunEntry> = result.entries.iter().filter(|e| e.topic_id == 1 && e.stance == Stance::Pro).collect();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g.image_id, w.image_id);
        assert_eq!(g.score, w.score);
    }
}

#[test]
fn stance_gate_orders_agreeing_first() {
    let mut scorer = StubScorer::new();
    let q = "need sex education schools";
    scorer.insert_fixture(TEXTS[1], q, [0.01, 0.98, 0.01]);
    scorer.insert_fixture(TEXTS[5], q, [0.98, 0.01, 0.01]);
    let mut cfg = PipelineConfig::new(PipelineId::P1);
    cfg.preselect_k = 8;
    cfg.output_depth = 8;
    cfg.order = OrderMode::StanceDominant;
    let docs = corpus();
    let result = run_pipeline(
        &cfg,
        &topics(),
        docs.as_slice(),
        &index(&docs),
        &QueryBuilder::default(),
        &scorer,
        &StubGenerator,
    )
    .unwrap();
    validate_run(&result.entries).unwrap();
    let pro: Vec<&RunEntry> = result.entries.iter().filter(|e| e.topic_id == 1 && e.stance == Stance::Pro).collect();
    let con: Vec<&RunEntry> = result.entries.iter().filter(|e| e.topic_id == 1 && e.stance == Stance::Con).collect();
    assert_eq!(pro[0].image_id, "I05");
    assert_eq!(con[0].image_id, "I01");
}

#[test]
fn reruns_are_identical() {
    let a = run(PipelineId::P3, &StubScorer::new());
    let b = run(PipelineId::P3, &StubScorer::new());
    assert_eq!(a, b);
}

fn synthetic_runs(runs: usize, topics: u32, depth: u32, unique_per_topic: u32) -> Vec<Vec<RunEntry>> {
    (0..runs)
        .map(|r| {
            let mut v = Vec::new();
            for t in 1..=topics {
                for stance in Stance::BOTH {
                    for rank in 1..=depth {
                        let k = (r as u32 * 7 + rank * 3 + stance as u32) % unique_per_topic;
                        v.push(RunEntry {
                            topic_id: t,
                            stance,
                            image_id: format!("t{t}-i{k}"),
                            rank,
                            score: f64::from(depth - rank),
                            tag: format!("run{r}"),
                        });
                    }
                }
            }
            v
        })
        .collect()
}

#[test]
fn pooling_five_runs_gives_five_thousand() {
    let runs = synthetic_runs(5, 50, 10, 40);
    let refs: Vec<&[RunEntry]> = runs.iter().map(Vec::as_slice).collect();
    assert_eq!(pooled_count(&refs, 10), 5000);
    let expected: BTreeSet<(u32, String)> = runs
        .iter()
        .flatten()
        .map(|e| (e.topic_id, e.image_id.clone()))
        .collect();
    assert_eq!(pool_runs(&refs, 10), expected);
}

proptest! {
    #[test]
    fn pool_is_bounded_by_count(runs in 1usize..6, topics in 1u32..10, depth in 1u32..12, unique in 1u32..30) {
        let runs = synthetic_runs(runs, topics, depth, unique);
        let refs: Vec<&[RunEntry]> = runs.iter().map(Vec::as_slice).collect();
        let pool = pool_runs(&refs, depth as usize);
        prop_assert!(pool.len() <= pooled_count(&refs, depth as usize));
        prop_assert!(pool.len() <= (topics * unique.min(2 * depth * refs.len() as u32)) as usize);
        prop_assert_eq!(pool_runs(&[refs[0], refs[0]], depth as usize), pool_runs(&[refs[0]], depth as usize));
    }
}
