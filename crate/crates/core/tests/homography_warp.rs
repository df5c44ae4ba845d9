mod oracle;

use std::time::Instant;

use argimg_core::vision::homography::inlier_count;
use argimg_core::vision::{estimate_homography, RansacParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRUE_H: [[f64; 3]; 3] = [[0.9, 0.12, 25.0], [-0.08, 1.05, 12.0], [2.0e-4, -1.0e-4, 1.0]];

fn warped_with_outliers(seed: u64, inliers: usize, outliers: usize) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut src = Vec::new();
    let mut dst = Vec::new();
    for _ in 0..inliers {
        let p = [rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)];
        src.push(p);
        dst.push(oracle::project(&TRUE_H, p));
    }
    for _ in 0..outliers {
        src.push([rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)]);
        dst.push([rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)]);
    }
    (src, dst)
}

fn grid_error(h: &[[f64; 3]; 3]) -> f64 {
    let mut worst = 0.0f64;
    for gy in 0..=10 {
        for gx in 0..=10 {
            let p = [gx as f64 * 50.0, gy as f64 * 50.0];
            let a = oracle::project(h, p);
            let b = oracle::project(&TRUE_H, p);
            worst = worst.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        }
    }
    worst
}

#[test]
fn recovers_known_warp_under_outliers() {
    let start = Instant::now();
    for seed in 0..20 {
        let (src, dst) = warped_with_outliers(seed, 50, 10);
        let (h, mask) = estimate_homography(&src, &dst, &RansacParams::default()).expect("model");
        let err = grid_error(&h.to_rows());
        assert!(err < 1.0, "seed {seed}: grid error {err}");
        assert!(inlier_count(&mask) as f64 >= 50.0 * 0.95, "seed {seed}: {} inliers", inlier_count(&mask));
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn noisy_inliers_stay_within_a_pixel() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (src, mut dst) = warped_with_outliers(7, 50, 10);
    for d in dst.iter_mut().take(50) {
        d[0] += rng.random_range(-0.3..0.3);
        d[1] += rng.random_range(-0.3..0.3);
    }
    let (h, _) = estimate_homography(&src, &dst, &RansacParams::default()).unwrap();
    assert!(grid_error(&h.to_rows()) < 1.0);
}

#[test]
fn identity_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<[f64; 2]> = (0..50)
        .map(|_| [rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)])
        .collect();
    let (h, mask) = estimate_homography(&pts, &pts, &RansacParams::default()).unwrap();
    assert_eq!(inlier_count(&mask), 50);
    let rows = h.to_rows();
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - want).abs() <= 1e-6, "h[{i}][{j}] = {v}");
        }
    }
}

#[test]
fn deterministic_for_equal_input() {
    let (src, dst) = warped_with_outliers(11, 50, 10);
    let a = estimate_homography(&src, &dst, &RansacParams::default()).unwrap();
    let b = estimate_homography(&src, &dst, &RansacParams::default()).unwrap();
    assert_eq!(a, b);
}
