//! Independent reference implementations used by the integration and
//! acceptance tests. Written from the textbook definitions, sharing no code
//! with the library beyond its data types.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

/// Whitespace tokens, lowercased, with ASCII punctuation stripped from both
/// ends. Matches the library tokenizer on the alphanumeric toy corpora used
/// here.
pub fn naive_terms(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// BM25 score of every document for `query` (distinct terms).
pub fn bm25_scores(docs: &[Vec<String>], query: &[String], k1: f64, b: f64) -> Vec<f64> {
    let n = docs.len() as f64;
    let avg = docs.iter().map(|d| d.len()).sum::<usize>() as f64 / n;
    let mut seen = HashSet::new();
    let terms: Vec<&String> = query.iter().filter(|t| seen.insert(t.as_str())).collect();
    docs.iter()
        .map(|doc| {
            let mut s = 0.0;
            for t in &terms {
                let tf = doc.iter().filter(|w| w == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                let dl = doc.len() as f64;
                s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avg));
            }
            s
        })
        .collect()
}

/// Positive-score documents by score descending, then id ascending.
pub fn bm25_ranking(ids: &[String], scores: &[f64], k: usize) -> Vec<(String, f64)> {
    let mut r: Vec<(String, f64)> = ids
        .iter()
        .cloned()
        .zip(scores.iter().copied())
        .filter(|(_, s)| *s > 0.0)
        .collect();
    r.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    r.truncate(k);
    r
}

pub fn precision_at_k(ranked: &[String], relevant: &HashSet<String>, k: usize) -> f64 {
    let mut hits = 0;
    for i in 0..k {
        if i < ranked.len() && relevant.contains(&ranked[i]) {
            hits += 1;
        }
    }
    hits as f64 / k as f64
}

/// Mean over every relevant item of the precision at its rank, 0 for items
/// not retrieved within `depth`. Contributions are summed in rank order so
/// results are bit-comparable.
pub fn average_precision(ranked: &[String], relevant: &HashSet<String>, depth: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let mut positions: Vec<usize> = relevant
        .iter()
        .filter_map(|item| ranked.iter().take(depth).position(|r| r == item))
        .collect();
    positions.sort_unstable();
    let mut total = 0.0;
    for pos in positions {
        let hits = ranked[..=pos].iter().filter(|r| relevant.contains(*r)).count();
        total += hits as f64 / (pos + 1) as f64;
    }
    total / relevant.len() as f64
}

/// Fleiss' kappa straight from the definition, for `ratings[item][rater]`
/// category indices.
pub fn fleiss_kappa(ratings: &[Vec<usize>], categories: usize) -> f64 {
    let n_items = ratings.len() as f64;
    let n = ratings[0].len() as f64;
    let mut p_cat = vec![0.0; categories];
    let mut p_bar = 0.0;
    for item in ratings {
        let mut counts = HashMap::new();
        for &c in item {
            *counts.entry(c).or_insert(0usize) += 1;
            p_cat[c] += 1.0;
        }
        let agree: f64 = counts.values().map(|&c| (c * (c - 1)) as f64).sum();
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= n_items;
    let p_e: f64 = p_cat.iter().map(|c| (c / (n_items * n)).powi(2)).sum();
    (p_bar - p_e) / (1.0 - p_e)
}

/// Paired t statistic and two-sided p from the Student-t CDF in `statrs`.
pub fn paired_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    (t, 2.0 * (1.0 - dist.cdf(t.abs())))
}

/// Brute-force nearest neighbour index under squared L2, ties to the lower
/// index.
pub fn nearest(data: &[[f32; 128]], q: &[f32; 128]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, d) in data.iter().enumerate() {
        let dist: f64 = d.iter().zip(q).map(|(a, b)| ((a - b) as f64).powi(2)).sum();
        if dist < best.0 {
            best = (dist, i);
        }
    }
    best.1
}

/// Applies a row-major homography.
pub fn project(h: &[[f64; 3]; 3], p: [f64; 2]) -> [f64; 2] {
    let x = h[0][0] * p[0] + h[0][1] * p[1] + h[0][2];
    let y = h[1][0] * p[0] + h[1][1] * p[1] + h[1][2];
    let w = h[2][0] * p[0] + h[2][1] * p[1] + h[2][2];
    [x / w, y / w]
}
