//! Good-match filtering and the per-image match score.

use alloc::vec::Vec;

use super::ann::{AnnIndex, AnnParams};
use super::homography::{estimate_homography, inlier_count, RansacParams};
use super::image::GrayImage;
use super::sift::{detect_and_describe, Descriptor, Keypoint, SiftParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub query_idx: usize,
    pub train_idx: usize,
    /// L2 distance between the two descriptors.
    pub distance: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// Keep `best` when `best < threshold * second`.
    Ratio,
    /// Keep `best` when `best < threshold`.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams {
    pub mode: MatchMode,
    pub threshold: f32,
    /// Good matches needed before a homography is attempted.
    pub min_matches_for_homography: usize,
    pub sift: SiftParams,
    pub ann: AnnParams,
    pub ransac: RansacParams,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            mode: MatchMode::Ratio,
            threshold: 0.7,
            min_matches_for_homography: 8,
            sift: SiftParams::default(),
            ann: AnnParams::default(),
            ransac: RansacParams::default(),
        }
    }
}

/// Filters `(best, second)` neighbour pairs.
pub fn good_matches(pairs: &[(Match, Option<Match>)], mode: MatchMode, threshold: f32) -> Vec<Match> {
    pairs
        .iter()
        .filter(|(best, second)| match mode {
            MatchMode::Ratio => second.is_none_or(|s| best.distance < threshold * s.distance),
            MatchMode::Absolute => best.distance < threshold,
        })
        .map(|(best, _)| *best)
        .collect()
}

/// Keypoints with their descriptors (parallel lists).
#[derive(Debug, Clone, Default)]
pub struct Features {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

impl Features {
    pub fn extract(img: &GrayImage, params: &SiftParams) -> Self {
        let (keypoints, descriptors) = detect_and_describe(img, params);
        Self {
            keypoints,
            descriptors,
        }
    }

    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }
}

/// Features of a reference image plus the search index over its descriptors.
#[derive(Debug, Clone)]
pub struct ReferenceFeatures {
    pub features: Features,
    ann: Option<AnnIndex>,
}

impl ReferenceFeatures {
    pub fn new(features: Features, ann: AnnParams) -> Self {
        let ann = AnnIndex::build(&features.descriptors, ann).ok();
        Self { features, ann }
    }

    pub fn extract(img: &GrayImage, params: &MatchParams) -> Self {
        Self::new(Features::extract(img, &params.sift), params.ann)
    }
}

/// Outcome of matching one candidate against one reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairScore {
    pub good: usize,
    /// RANSAC inliers when a homography was estimated.
    pub inliers: Option<usize>,
}

impl PairScore {
    /// Inlier count when geometry was estimated, otherwise the good count.
    pub fn score(&self) -> usize {
        self.inliers.unwrap_or(self.good)
    }
}

/// Matches every candidate descriptor against the reference (2-NN),
/// filters good matches and, with enough of them, re-counts by RANSAC
/// inliers.
pub fn match_pair(candidate: &Features, reference: &ReferenceFeatures, params: &MatchParams) -> PairScore {
    let Some(ann) = reference.ann.as_ref() else {
        return PairScore { good: 0, inliers: None };
    };
    let pairs: Vec<(Match, Option<Match>)> = candidate
        .descriptors
        .iter()
        .enumerate()
        .filter_map(|(qi, d)| {
            let mut nn = ann.knn2(d);
            nn.iter_mut().for_each(|m| m.query_idx = qi);
            let best = *nn.first()?;
            Some((best, nn.get(1).copied()))
        })
        .collect();
    let good = good_matches(&pairs, params.mode, params.threshold);
    let mut inliers = None;
    if good.len() >= params.min_matches_for_homography {
        let (src, dst): (Vec<[f64; 2]>, Vec<[f64; 2]>) = good
            .iter()
            .map(|m| {
                let a = &candidate.keypoints[m.query_idx];
                let b = &reference.features.keypoints[m.train_idx];
                ([f64::from(a.x), f64::from(a.y)], [f64::from(b.x), f64::from(b.y)])
            })
            .unzip();
        if let Some((_, mask)) = estimate_homography(&src, &dst, &params.ransac) {
            inliers = Some(inlier_count(&mask));
        }
    }
    PairScore {
        good: good.len(),
        inliers,
    }
}

/// Sum of per-reference scores for pre-extracted features.
pub fn match_score_features(candidate: &Features, references: &[ReferenceFeatures], params: &MatchParams) -> usize {
    references
        .iter()
        .map(|r| match_pair(candidate, r, params).score())
        .sum()
}

/// Summed match score of `candidate` against every reference image.
pub fn match_score(candidate: &GrayImage, references: &[GrayImage], params: &MatchParams) -> Result<usize> {
    if references.is_empty() {
        return Err(Error::InvalidArgument("match_score needs at least one reference"));
    }
    let cand = Features::extract(candidate, &params.sift);
    let refs: Vec<ReferenceFeatures> = references
        .iter()
        .map(|r| ReferenceFeatures::extract(r, params))
        .collect();
    Ok(match_score_features(&cand, &refs, params))
}
