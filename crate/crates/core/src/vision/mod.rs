//! Local-feature image matching: SIFT keypoints and descriptors, a
//! randomized kd-tree forest for approximate 2-NN search, ratio/absolute
//! good-match filtering, RANSAC homographies and the summed match score.

pub mod ann;
pub mod homography;
pub mod image;
pub mod matching;
pub mod sift;

pub use ann::{AnnIndex, AnnParams};
pub use homography::{estimate_homography, Homography, RansacParams};
pub use image::GrayImage;
pub use matching::{good_matches, match_score, Features, Match, MatchMode, MatchParams, ReferenceFeatures};
pub use sift::{sift_describe, sift_detect, Descriptor, Keypoint, SiftParams};
