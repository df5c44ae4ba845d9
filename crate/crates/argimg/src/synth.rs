//! Deterministic synthetic mini-corpus with known answers.
//!
//! For every topic, `planted` images are warped, noisy copies of the stub
//! reference images of the topic's PRO query, paired with PRO text. The
//! remaining images are value noise from unrelated seeds whose text still
//! mentions a topic, so preselection cannot separate them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use argimg_core::eval::Qrels;
use argimg_core::hash::stable_hash;
use argimg_core::imagegen::{build_prompts, generate, value_noise, StubGenerator, DEFAULT_SIZE};
use argimg_core::query::QueryBuilder;
use argimg_core::vision::{GrayImage, Homography};
use argimg_core::{ImageDocument, Label, Topic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::write_document;
use crate::error::{Error, Result};
use crate::judgments::format_qrels;
use crate::topics::format_topics;

pub const TOPICS: [(u32, &str); 4] = [
    (1, "Do we need sex education in schools?"),
    (2, "Should governments ban fossil fuels?"),
    (3, "Should students wear school uniforms?"),
    (4, "Should zoos exist?"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub planted_per_topic: usize,
    pub distractors_per_topic: usize,
    pub size: usize,
    /// Standard deviation of the additive pixel noise, in gray levels.
    pub noise_sigma: f64,
    pub max_rotation_deg: f64,
    pub max_shift: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            planted_per_topic: 5,
            distractors_per_topic: 5,
            size: DEFAULT_SIZE,
            noise_sigma: 4.0,
            max_rotation_deg: 12.0,
            max_shift: 16.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub topics: Vec<Topic>,
    /// Documents in id order.
    pub documents: Vec<ImageDocument>,
    /// Planted image ids per topic.
    pub planted: BTreeMap<u32, Vec<String>>,
    /// Planted images judged PRO for their topic.
    pub qrels: Qrels,
}

fn rng_for(parts: &[&[u8]]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stable_hash(parts))
}

/// Similarity plus a small projective term about the image centre.
fn random_warp(rng: &mut ChaCha8Rng, size: usize, p: &SynthParams) -> [[f64; 3]; 3] {
    let c = size as f64 / 2.0;
    let theta = rng.random_range(-p.max_rotation_deg..=p.max_rotation_deg).to_radians();
    let s = rng.random_range(0.9..=1.1);
    let tx = rng.random_range(-p.max_shift..=p.max_shift);
    let ty = rng.random_range(-p.max_shift..=p.max_shift);
    let px = rng.random_range(-1.5e-4..=1.5e-4);
    let py = rng.random_range(-1.5e-4..=1.5e-4);
    let (sin, cos) = theta.sin_cos();
    // H = T(c) * A * T(-c), A = [sR | t; p 1]
    let a = [[s * cos, -s * sin, tx], [s * sin, s * cos, ty], [px, py, 1.0]];
    let t_neg = [[1.0, 0.0, -c], [0.0, 1.0, -c], [0.0, 0.0, 1.0]];
    let t_pos = [[1.0, 0.0, c], [0.0, 1.0, c], [0.0, 0.0, 1.0]];
    mul(&mul(&t_pos, &a), &t_neg)
}

fn mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

fn add_noise(img: &GrayImage, rng: &mut ChaCha8Rng, sigma: f64) -> GrayImage {
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let bytes: Vec<u8> = img
        .to_u8()
        .iter()
        .map(|&v| (f64::from(v) + normal.sample(rng)).round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::from_u8(img.width(), img.height(), &bytes).expect("same dimensions")
}

/// Warped, noisy copy of `img` at the same size.
pub fn perturb(img: &GrayImage, rng: &mut ChaCha8Rng, p: &SynthParams) -> GrayImage {
    let h = random_warp(rng, img.width(), p);
    let inv = Homography::from_rows(h)
        .and_then(|h| h.inverse())
        .expect("warp is invertible")
        .to_rows();
    let warped = img.warp_inverse(&inv, img.width(), img.height(), 128.0);
    add_noise(&warped, rng, p.noise_sigma)
}

pub fn topics() -> Vec<Topic> {
    TOPICS
        .iter()
        .map(|&(id, q)| Topic {
            id,
            question: q.to_string(),
        })
        .collect()
}

/// Builds the corpus in memory. Ids are `img-NNNN`, assigned in a
/// shuffled order so id order carries no signal.
pub fn build(builder: &QueryBuilder, params: &SynthParams) -> Result<SynthCorpus> {
    let topics = topics();
    let per_topic = params.planted_per_topic + params.distractors_per_topic;
    let total = per_topic * topics.len();
    let mut order: Vec<usize> = (0..total).collect();
    {
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng_for(&[b"synth-ids"]));
    }
    let id_of = |slot: usize| format!("img-{:04}", order[slot] + 1);
    let mut documents = Vec::with_capacity(total);
    let mut planted: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    let mut qrels = Qrels::new();
    for (ti, topic) in topics.iter().enumerate() {
        let (pro, _) = builder.build_queries(topic)?;
        let terms = pro.text();
        let refs: Vec<GrayImage> = build_prompts(&pro)
            .iter()
            .map(|p| {
                let mut p = p.clone();
                p.width = params.size;
                p.height = params.size;
                generate(&StubGenerator, &p)
            })
            .collect::<argimg_core::Result<_>>()?;
        let tid = topic.id.to_le_bytes();
        for k in 0..params.planted_per_topic {
            let slot = ti * per_topic + k;
            let mut rng = rng_for(&[b"planted", &tid, &k.to_le_bytes()]);
            let id = id_of(slot);
            documents.push(ImageDocument {
                id: id.clone(),
                image: perturb(&refs[k % refs.len()], &mut rng, params),
                page_text: format!(
                    "{} Yes. Supporters agree: {terms}. The evidence is in favour and we support it.",
                    topic.question
                ),
                image_text: format!("yes {terms}"),
            });
            qrels.insert((topic.id, id.clone()), Label::Pro);
            planted.entry(topic.id).or_default().push(id);
        }
        for k in 0..params.distractors_per_topic {
            let slot = ti * per_topic + params.planted_per_topic + k;
            let seed = stable_hash(&[b"distractor", &tid, &k.to_le_bytes()]);
            documents.push(ImageDocument {
                id: id_of(slot),
                image: value_noise(seed, params.size, params.size),
                page_text: format!("{} A report on {terms} and related debates.", topic.question),
                image_text: String::new(),
            });
        }
    }
    documents.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(SynthCorpus {
        topics,
        documents,
        planted,
        qrels,
    })
}

/// Writes `corpus/`, `topics.jsonl` and `qrels.tsv` under `dir`.
pub fn write(corpus: &SynthCorpus, dir: &Path) -> Result<()> {
    let root = dir.join("corpus");
    fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    for doc in &corpus.documents {
        write_document(&root, doc, "png")?;
    }
    let p = dir.join("topics.jsonl");
    fs::write(&p, format_topics(&corpus.topics)).map_err(|e| Error::io(&p, e))?;
    let p = dir.join("qrels.tsv");
    fs::write(&p, format_qrels(&corpus.qrels)).map_err(|e| Error::io(&p, e))?;
    Ok(())
}
