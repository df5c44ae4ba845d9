//! Multi-threaded pipeline execution. Produces the same result as
//! `argimg_core::pipeline::run_pipeline`.

use std::collections::BTreeMap;

use argimg_core::bm25::Index;
use argimg_core::imagegen::ImageGenerator;
use argimg_core::pipeline::{
    plan_groups, rank_group, DocumentSource, OrderMode, PipelineConfig, PipelineId, Plan, RunResult,
};
use argimg_core::query::QueryBuilder;
use argimg_core::stance::StanceScorer;
use argimg_core::vision::matching::Features;
use argimg_core::Topic;
use rayon::prelude::*;

pub fn run_parallel<D, S, G>(
    config: &PipelineConfig,
    topics: &[Topic],
    source: &D,
    index: &Index,
    builder: &QueryBuilder,
    scorer: &S,
    generator: &G,
) -> argimg_core::Result<RunResult>
where
    D: DocumentSource + Sync + ?Sized,
    S: StanceScorer + Sync + ?Sized,
    G: ImageGenerator + Sync + ?Sized,
{
    let plans = topics
        .par_iter()
        .map(|t| plan_groups(config, std::slice::from_ref(t), source, index, builder, scorer))
        .collect::<argimg_core::Result<Vec<Plan>>>()?;
    let mut plan = Plan::default();
    for p in plans {
        plan.groups.extend(p.groups);
        plan.warnings.extend(p.warnings);
    }
    let features: BTreeMap<usize, Features> =
        if config.id != PipelineId::BaselineRef && config.order == OrderMode::MatchDominant {
            let ordinals: Vec<usize> = plan.candidate_ordinals().into_iter().collect();
            ordinals
                .par_iter()
                .map(|&o| {
                    let doc = source.document(o)?;
                    Ok((o, Features::extract(&doc.image, &config.matching.sift)))
                })
                .collect::<argimg_core::Result<_>>()?
        } else {
            BTreeMap::new()
        };
    let groups = plan
        .groups
        .par_iter()
        .map(|g| rank_group(g, config, generator, &features))
        .collect::<argimg_core::Result<Vec<_>>>()?;
    Ok(RunResult::assemble(groups, plan.warnings))
}
