//! The run configurations: BM25 preselection, optional stance gating,
//! reference-image generation and match-score re-ranking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bm25::{Bm25Params, Index};
use crate::error::{Error, Result};
use crate::imagegen::{build_prompts, generate, ImageGenerator};
use crate::query::{tokenize, Query, QueryBuilder, VerbLexicon};
use crate::stance::{stance_gate, StanceScorer, StanceSource};
use crate::types::{ImageDocument, RunEntry, Stance, Topic};
use crate::vision::matching::{match_score_features, Features, MatchParams, ReferenceFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PipelineId {
    /// Plain BM25 on the raw question; stands in for the external baseline.
    BaselineRef,
    P0,
    P1,
    P2,
    P3,
}

impl PipelineId {
    pub fn stance_source(self) -> Option<StanceSource> {
        match self {
            PipelineId::P1 => Some(StanceSource::PageText),
            PipelineId::P2 => Some(StanceSource::ImageText),
            PipelineId::P3 => Some(StanceSource::Both),
            _ => None,
        }
    }

    pub fn default_tag(self) -> &'static str {
        match self {
            PipelineId::BaselineRef => "argimg-baseline-ref",
            PipelineId::P0 => "argimg-p0",
            PipelineId::P1 => "argimg-p1",
            PipelineId::P2 => "argimg-p2",
            PipelineId::P3 => "argimg-p3",
        }
    }
}

impl fmt::Display for PipelineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineId::BaselineRef => "baseline",
            PipelineId::P0 => "0",
            PipelineId::P1 => "1",
            PipelineId::P2 => "2",
            PipelineId::P3 => "3",
        })
    }
}

impl FromStr for PipelineId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" | "-1" => Ok(PipelineId::BaselineRef),
            "0" => Ok(PipelineId::P0),
            "1" => Ok(PipelineId::P1),
            "2" => Ok(PipelineId::P2),
            "3" => Ok(PipelineId::P3),
            _ => Err(Error::InvalidArgument("pipeline must be one of baseline, 0, 1, 2, 3")),
        }
    }
}

/// Final ordering of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMode {
    /// Match score, then stance/BM25 order, then image id.
    MatchDominant,
    /// Stance-gated order kept as is; scores become `depth - rank + 1`.
    StanceDominant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub id: PipelineId,
    pub preselect_k: usize,
    pub output_depth: usize,
    pub stance_source: Option<StanceSource>,
    pub bm25: Bm25Params,
    pub matching: MatchParams,
    pub order: OrderMode,
    pub tag: String,
}

impl PipelineConfig {
    pub fn new(id: PipelineId) -> Self {
        Self {
            id,
            preselect_k: crate::bm25::DEFAULT_K,
            output_depth: 10,
            stance_source: id.stance_source(),
            bm25: Bm25Params::default(),
            matching: MatchParams::default(),
            order: OrderMode::MatchDominant,
            tag: String::from(id.default_tag()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_depth == 0 || self.preselect_k == 0 {
            return Err(Error::InvalidArgument("preselect_k and output_depth must be positive"));
        }
        if self.output_depth > self.preselect_k {
            return Err(Error::InvalidArgument("output_depth must not exceed preselect_k"));
        }
        if self.tag.is_empty() || self.tag.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument("run tag must be non-empty without whitespace"));
        }
        Ok(())
    }
}

/// Random access to corpus documents by index ordinal.
pub trait DocumentSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn document(&self, ordinal: usize) -> Result<ImageDocument>;
}

impl DocumentSource for [ImageDocument] {
    fn len(&self) -> usize {
        <[ImageDocument]>::len(self)
    }

    fn document(&self, ordinal: usize) -> Result<ImageDocument> {
        self.get(ordinal)
            .cloned()
            .ok_or(Error::InvalidArgument("document ordinal out of range"))
    }
}

impl DocumentSource for Vec<ImageDocument> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn document(&self, ordinal: usize) -> Result<ImageDocument> {
        self.as_slice().document(ordinal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub ordinal: usize,
    pub image_id: String,
    pub bm25: f64,
}

/// Candidates for one `(topic, stance)` after preselection and gating, in
/// priority order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPlan {
    pub query: Query,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Plan {
    pub groups: Vec<GroupPlan>,
    pub warnings: Vec<String>,
}

impl Plan {
    /// Ordinals of every candidate that needs features.
    pub fn candidate_ordinals(&self) -> BTreeSet<usize> {
        self.groups
            .iter()
            .flat_map(|g| g.candidates.iter().map(|c| c.ordinal))
            .collect()
    }
}

fn baseline_query(topic: &Topic, stance: Stance) -> Query {
    let terms = tokenize(&topic.question, &VerbLexicon::default())
        .into_iter()
        .filter(|t| !t.is_punct)
        .map(|t| t.text)
        .collect();
    Query {
        topic_id: topic.id,
        stance,
        terms,
    }
}

fn check_alignment(index: &Index, source: &(impl DocumentSource + ?Sized)) -> Result<()> {
    if index.num_docs() != source.len() {
        return Err(Error::InvalidArgument("index and corpus differ in size"));
    }
    Ok(())
}

/// Builds queries, preselects and (optionally) stance-gates candidates for
/// every topic and stance. Topics whose query is empty are skipped with a
/// warning.
pub fn plan_groups<S: StanceScorer + ?Sized>(
    config: &PipelineConfig,
    topics: &[Topic],
    source: &(impl DocumentSource + ?Sized),
    index: &Index,
    builder: &QueryBuilder,
    scorer: &S,
) -> Result<Plan> {
    config.validate()?;
    check_alignment(index, source)?;
    let mut plan = Plan::default();
    for topic in topics {
        let queries = if config.id == PipelineId::BaselineRef {
            let pro = baseline_query(topic, Stance::Pro);
            if pro.terms.is_empty() {
                plan.warnings.push(format!("topic {}: empty query, skipped", topic.id));
                continue;
            }
            let mut con = pro.clone();
            con.stance = Stance::Con;
            [pro, con]
        } else {
            match builder.build_queries(topic) {
                Ok((pro, con)) => [pro, con],
                Err(e) => {
                    plan.warnings.push(format!("topic {}: {e}, skipped", topic.id));
                    continue;
                }
            }
        };
        for query in queries {
            let hits = index.retrieve_ordinals(&query.terms, config.preselect_k, config.bm25);
            let mut candidates: Vec<Candidate> = hits
                .iter()
                .map(|&(ordinal, bm25)| Candidate {
                    ordinal,
                    image_id: String::from(index.doc_id(ordinal)),
                    bm25,
                })
                .collect();
            if let (Some(src), false) = (config.stance_source, candidates.is_empty()) {
                let docs: Vec<ImageDocument> = candidates
                    .iter()
                    .map(|c| source.document(c.ordinal))
                    .collect::<Result<_>>()?;
                let pairs: Vec<(&ImageDocument, f64)> =
                    docs.iter().zip(&candidates).map(|(d, c)| (d, c.bm25)).collect();
                let gated = stance_gate(&pairs, &query, scorer, src, config.preselect_k)?;
                candidates = gated
                    .iter()
                    .map(|g| candidates[g.input_index].clone())
                    .collect();
            }
            plan.groups.push(GroupPlan { query, candidates });
        }
    }
    Ok(plan)
}

/// Read access to pre-extracted candidate features.
pub trait FeatureLookup {
    fn features(&self, ordinal: usize) -> Option<&Features>;
}

impl FeatureLookup for BTreeMap<usize, Features> {
    fn features(&self, ordinal: usize) -> Option<&Features> {
        self.get(&ordinal)
    }
}

/// Generated reference images for a query, with their features.
pub fn reference_features<G: ImageGenerator + ?Sized>(
    query: &Query,
    generator: &G,
    params: &MatchParams,
) -> Result<Vec<ReferenceFeatures>> {
    build_prompts(query)
        .iter()
        .map(|p| generate(generator, p).map(|img| ReferenceFeatures::extract(&img, params)))
        .collect()
}

/// Produces the run entries of one planned group.
pub fn rank_group<G: ImageGenerator + ?Sized>(
    group: &GroupPlan,
    config: &PipelineConfig,
    generator: &G,
    features: &(impl FeatureLookup + ?Sized),
) -> Result<Vec<RunEntry>> {
    let q = &group.query;
    let entry = |rank: usize, c: &Candidate, score: f64| RunEntry {
        topic_id: q.topic_id,
        stance: q.stance,
        image_id: c.image_id.clone(),
        rank: rank as u32 + 1,
        score,
        tag: config.tag.clone(),
    };
    if config.id == PipelineId::BaselineRef {
        return Ok(group
            .candidates
            .iter()
            .take(config.output_depth)
            .enumerate()
            .map(|(i, c)| entry(i, c, c.bm25))
            .collect());
    }
    if config.order == OrderMode::StanceDominant {
        let n = group.candidates.len().min(config.output_depth);
        return Ok(group
            .candidates
            .iter()
            .take(n)
            .enumerate()
            .map(|(i, c)| entry(i, c, (config.output_depth - i) as f64))
            .collect());
    }
    let refs = reference_features(q, generator, &config.matching)?;
    let mut scored: Vec<(usize, usize)> = Vec::with_capacity(group.candidates.len());
    for (pos, c) in group.candidates.iter().enumerate() {
        let f = features
            .features(c.ordinal)
            .ok_or(Error::InvalidArgument("missing features for a candidate"))?;
        scored.push((pos, match_score_features(f, &refs, &config.matching)));
    }
    scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored
        .iter()
        .take(config.output_depth)
        .enumerate()
        .map(|(i, &(pos, s))| entry(i, &group.candidates[pos], s as f64))
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunResult {
    pub entries: Vec<RunEntry>,
    pub warnings: Vec<String>,
}

impl RunResult {
    /// Orders groups by `(topic_id, stance)` regardless of completion order.
    pub fn assemble(groups: Vec<Vec<RunEntry>>, warnings: Vec<String>) -> Self {
        let mut groups: Vec<Vec<RunEntry>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
        groups.sort_by_key(|g| (g[0].topic_id, g[0].stance));
        Self {
            entries: groups.into_iter().flatten().collect(),
            warnings,
        }
    }
}

/// Extracts features for the given ordinals.
pub fn extract_features(
    source: &(impl DocumentSource + ?Sized),
    ordinals: &BTreeSet<usize>,
    params: &MatchParams,
) -> Result<BTreeMap<usize, Features>> {
    let mut out = BTreeMap::new();
    for &o in ordinals {
        let doc = source.document(o)?;
        out.insert(o, Features::extract(&doc.image, &params.sift));
    }
    Ok(out)
}

/// Runs one configuration end to end on a single thread.
pub fn run_pipeline<S: StanceScorer + ?Sized, G: ImageGenerator + ?Sized>(
    config: &PipelineConfig,
    topics: &[Topic],
    source: &(impl DocumentSource + ?Sized),
    index: &Index,
    builder: &QueryBuilder,
    scorer: &S,
    generator: &G,
) -> Result<RunResult> {
    let plan = plan_groups(config, topics, source, index, builder, scorer)?;
    let needs_features = config.id != PipelineId::BaselineRef && config.order == OrderMode::MatchDominant;
    let features = if needs_features {
        extract_features(source, &plan.candidate_ordinals(), &config.matching)?
    } else {
        BTreeMap::new()
    };
    let groups = plan
        .groups
        .iter()
        .map(|g| rank_group(g, config, generator, &features))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunResult::assemble(groups, plan.warnings))
}

/// Union of the top-`depth` `(topic, image)` pairs across runs.
pub fn pool_runs(runs: &[&[RunEntry]], depth: usize) -> BTreeSet<(u32, String)> {
    runs.iter()
        .flat_map(|r| r.iter())
        .filter(|e| (e.rank as usize) <= depth)
        .map(|e| (e.topic_id, e.image_id.clone()))
        .collect()
}

/// Number of pooled judgments before duplicate removal.
pub fn pooled_count(runs: &[&[RunEntry]], depth: usize) -> usize {
    runs.iter()
        .flat_map(|r| r.iter())
        .filter(|e| (e.rank as usize) <= depth)
        .count()
}
