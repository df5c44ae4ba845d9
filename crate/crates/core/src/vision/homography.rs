//! Normalized DLT and RANSAC for plane-to-plane homographies.

use alloc::vec::Vec;

use nalgebra::{Matrix3, SMatrix, SymmetricEigen, Vector3};

use crate::hash::{stable_hash, CounterRng};

/// 3×3 projective transform, scaled so `h[2][2] == 1` whenever that entry
/// is non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(pub Matrix3<f64>);

impl Homography {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    fn normalized(m: Matrix3<f64>) -> Option<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let m = if m[(2, 2)].abs() > 1e-12 { m / m[(2, 2)] } else { m };
        let det = m.determinant();
        if !det.is_finite() || det.abs() < 1e-12 {
            return None;
        }
        Some(Self(m))
    }

    /// Row-major constructor; `None` for singular or non-finite input.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Option<Self> {
        Self::normalized(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn inverse(&self) -> Option<Self> {
        self.0.try_inverse().and_then(Self::normalized)
    }

    /// Maps a point; `None` if it lands at infinity.
    pub fn apply(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let v = self.0 * Vector3::new(p[0], p[1], 1.0);
        if v[2].abs() < 1e-12 {
            return None;
        }
        Some([v[0] / v[2], v[1] / v[2]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    pub max_iterations: usize,
    /// Inlier bound on the symmetric transfer error, in pixels.
    pub reprojection_tolerance: f64,
    pub confidence: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            reprojection_tolerance: 3.0,
            confidence: 0.995,
        }
    }
}

/// Similarity moving the centroid to the origin with RMS distance √2.
fn normalizing_transform(pts: &[[f64; 2]]) -> Option<Matrix3<f64>> {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let ms = pts
        .iter()
        .map(|p| (p[0] - cx) * (p[0] - cx) + (p[1] - cy) * (p[1] - cy))
        .sum::<f64>()
        / n;
    if ms <= 1e-18 {
        return None;
    }
    let s = libm::sqrt(2.0 / ms);
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn transform(t: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    [t[(0, 0)] * p[0] + t[(0, 2)], t[(1, 1)] * p[1] + t[(1, 2)]]
}

/// Direct linear transform with Hartley normalization. Needs ≥ 4 pairs.
pub fn dlt(src: &[[f64; 2]], dst: &[[f64; 2]]) -> Option<Homography> {
    if src.len() < 4 || src.len() != dst.len() {
        return None;
    }
    let ts = normalizing_transform(src)?;
    let td = normalizing_transform(dst)?;
    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    for (s, d) in src.iter().zip(dst) {
        let [x, y] = transform(&ts, *s);
        let [u, v] = transform(&td, *d);
        let r1 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r2 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for row in [r1, r2] {
            for i in 0..9 {
                for j in 0..9 {
                    ata[(i, j)] += row[i] * row[j];
                }
            }
        }
    }
    let eig = SymmetricEigen::new(ata);
    let (min_idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let h = eig.eigenvectors.column(min_idx);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td.try_inverse()?;
    Homography::normalized(td_inv * hn * ts)
}

fn twice_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// True when any three of the four points are (nearly) collinear.
fn degenerate(p: &[[f64; 2]; 4]) -> bool {
    const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    TRIPLES
        .iter()
        .any(|t| twice_area(p[t[0]], p[t[1]], p[t[2]]).abs() < 1e-6)
}

/// Squared symmetric transfer error `d(x', Hx)² + d(x, H⁻¹x')²`.
pub fn symmetric_transfer_error_sq(h: &Homography, h_inv: &Homography, src: [f64; 2], dst: [f64; 2]) -> f64 {
    match (h.apply(src), h_inv.apply(dst)) {
        (Some(f), Some(b)) => {
            let (fx, fy) = (f[0] - dst[0], f[1] - dst[1]);
            let (bx, by) = (b[0] - src[0], b[1] - src[1]);
            fx * fx + fy * fy + bx * bx + by * by
        }
        _ => f64::INFINITY,
    }
}

fn inlier_mask(h: &Homography, src: &[[f64; 2]], dst: &[[f64; 2]], tol: f64) -> Option<(Vec<bool>, usize)> {
    let h_inv = h.inverse()?;
    let tol2 = tol * tol;
    let mask: Vec<bool> = src
        .iter()
        .zip(dst)
        .map(|(s, d)| symmetric_transfer_error_sq(h, &h_inv, *s, *d) < tol2)
        .collect();
    let count = mask.iter().filter(|&&m| m).count();
    Some((mask, count))
}

fn seed_for(src: &[[f64; 2]], dst: &[[f64; 2]]) -> u64 {
    let mut bytes = Vec::with_capacity((src.len() + dst.len()) * 16);
    for p in src.iter().chain(dst) {
        bytes.extend_from_slice(&p[0].to_bits().to_le_bytes());
        bytes.extend_from_slice(&p[1].to_bits().to_le_bytes());
    }
    stable_hash(&[b"ransac", &bytes])
}

/// RANSAC over minimal 4-point samples with adaptive iteration count and a
/// final least-squares refit on the consensus set. Returns `None` for fewer
/// than 4 correspondences or when no non-degenerate model is found.
pub fn estimate_homography(
    src: &[[f64; 2]],
    dst: &[[f64; 2]],
    params: &RansacParams,
) -> Option<(Homography, Vec<bool>)> {
    let n = src.len();
    if n < 4 || n != dst.len() {
        return None;
    }
    let tol = params.reprojection_tolerance;
    let mut rng = CounterRng::new(seed_for(src, dst));
    let mut best: Option<(Homography, Vec<bool>, usize)> = None;
    let mut needed = params.max_iterations as f64;
    let mut iter = 0usize;
    while (iter as f64) < needed && iter < params.max_iterations {
        iter += 1;
        let mut idx = [0usize; 4];
        for k in 0..4 {
            loop {
                let c = rng.below(n);
                if !idx[..k].contains(&c) {
                    idx[k] = c;
                    break;
                }
            }
        }
        let s4 = idx.map(|i| src[i]);
        let d4 = idx.map(|i| dst[i]);
        if degenerate(&s4) || degenerate(&d4) {
            continue;
        }
        let Some(h) = dlt(&s4, &d4) else { continue };
        let Some((mask, count)) = inlier_mask(&h, src, dst, tol) else {
            continue;
        };
        if count >= 4 && best.as_ref().is_none_or(|b| count > b.2) {
            let ratio = count as f64 / n as f64;
            let denom = libm::log(1.0 - libm::pow(ratio, 4.0));
            needed = if denom < 0.0 {
                libm::ceil(libm::log(1.0 - params.confidence) / denom)
            } else {
                0.0
            };
            best = Some((h, mask, count));
        }
    }
    let (h, mask, count) = best?;
    let (in_src, in_dst): (Vec<[f64; 2]>, Vec<[f64; 2]>) = src
        .iter()
        .zip(dst)
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|((s, d), _)| (*s, *d))
        .unzip();
    if let Some(refit) = dlt(&in_src, &in_dst) {
        if let Some((rmask, rcount)) = inlier_mask(&refit, src, dst, tol) {
            if rcount >= count {
                return Some((refit, rmask));
            }
        }
    }
    Some((h, mask))
}

/// Count of `true` entries in an inlier mask.
pub fn inlier_count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&m| m).count()
}
