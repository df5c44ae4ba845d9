//! Scale-invariant feature transform.
//!
//! Difference-of-Gaussian extrema over a doubled-resolution scale space,
//! refined to sub-pixel/sub-scale accuracy, filtered on contrast and edge
//! response, assigned dominant gradient orientations and described by
//! 4×4×8 gradient histograms. Coordinates use the image frame with `y`
//! pointing down; orientations are `atan2(dy, dx)` in that frame.

use alloc::vec;
use alloc::vec::Vec;
use core::f32::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::image::{downsample2, gaussian_blur, upsample2, GrayImage};
use crate::error::{Error, Result};

pub const DESCRIPTOR_LEN: usize = 128;
const DESCR_WIDTH: usize = 4;
const DESCR_BINS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftParams {
    /// Blur of the first level of every octave.
    pub sigma: f32,
    /// Scales sampled per octave.
    pub intervals: usize,
    /// Minimum |DoG| at the refined extremum (intensities in `[0, 1]`).
    pub contrast_threshold: f32,
    /// Principal curvature ratio bound `r`.
    pub edge_ratio: f32,
    /// Blur already present in the input image.
    pub assumed_blur: f32,
    pub double_image: bool,
    pub max_refine_steps: usize,
    pub image_border: usize,
    pub orientation_bins: usize,
    pub orientation_sigma_factor: f32,
    pub orientation_peak_ratio: f32,
    /// Histogram cell width in units of keypoint scale.
    pub descriptor_scale: f32,
    pub descriptor_clamp: f32,
    pub min_image_side: usize,
}

impl Default for SiftParams {
    fn default() -> Self {
        Self {
            sigma: 1.6,
            intervals: 3,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            assumed_blur: 0.5,
            double_image: true,
            max_refine_steps: 5,
            image_border: 5,
            orientation_bins: 36,
            orientation_sigma_factor: 1.5,
            orientation_peak_ratio: 0.8,
            descriptor_scale: 3.0,
            descriptor_clamp: 0.2,
            min_image_side: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    /// Sub-pixel position in input image coordinates.
    pub x: f32,
    pub y: f32,
    /// Blur sigma in input image pixels.
    pub scale: f32,
    /// Radians in `[0, 2π)`.
    pub orientation: f32,
    /// |DoG| at the refined extremum.
    pub response: f32,
    pub octave: usize,
    pub layer: usize,
}

/// Unit-norm 128-d gradient histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptor(pub [f32; DESCRIPTOR_LEN]);

impl Descriptor {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f32 {
        libm::sqrtf(self.0.iter().map(|v| v * v).sum())
    }

    pub fn distance_sq(&self, other: &Descriptor) -> f32 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &Descriptor) -> f32 {
        libm::sqrtf(self.distance_sq(other))
    }
}

/// Gaussian and DoG pyramids for one image.
pub struct ScaleSpace {
    gaussians: Vec<Vec<GrayImage>>,
    dogs: Vec<Vec<GrayImage>>,
    /// Input pixels per octave-0 pixel (0.5 when the base is doubled).
    base_factor: f32,
}

impl ScaleSpace {
    pub fn build(img: &GrayImage, p: &SiftParams) -> Result<Self> {
        let min_side = img.width().min(img.height());
        if min_side < p.min_image_side {
            return Err(Error::ImageTooSmall {
                width: img.width(),
                height: img.height(),
                min: p.min_image_side,
            });
        }
        let octaves = ((libm::log2(min_side as f64) as usize).saturating_sub(3)).max(1);
        let (mut base, base_blur, base_factor) = if p.double_image {
            (upsample2(img), 2.0 * p.assumed_blur, 0.5)
        } else {
            (img.clone(), p.assumed_blur, 1.0)
        };
        let init = (p.sigma * p.sigma - base_blur * base_blur).max(0.01);
        base = gaussian_blur(&base, libm::sqrtf(init));

        let s = p.intervals;
        let k = libm::powf(2.0, 1.0 / s as f32);
        let mut increments = Vec::with_capacity(s + 3);
        increments.push(0.0);
        for i in 1..s + 3 {
            let prev = p.sigma * libm::powf(k, (i - 1) as f32);
            let total = prev * k;
            increments.push(libm::sqrtf(total * total - prev * prev));
        }

        let mut gaussians = Vec::with_capacity(octaves);
        let mut dogs = Vec::with_capacity(octaves);
        for o in 0..octaves {
            if o > 0 {
                let prev: &Vec<GrayImage> = &gaussians[o - 1];
                base = downsample2(&prev[s]);
            }
            let mut levels = Vec::with_capacity(s + 3);
            levels.push(base.clone());
            for inc in increments.iter().skip(1) {
                let next = gaussian_blur(levels.last().unwrap(), *inc);
                levels.push(next);
            }
            let octave_dogs: Vec<GrayImage> = levels
                .windows(2)
                .map(|w| {
                    let px = w[1]
                        .pixels()
                        .iter()
                        .zip(w[0].pixels())
                        .map(|(a, b)| a - b)
                        .collect();
                    GrayImage::from_raw(w[0].width(), w[0].height(), px)
                })
                .collect();
            gaussians.push(levels);
            dogs.push(octave_dogs);
            let last = &gaussians[o][s];
            if last.width() / 2 < 2 * p.image_border + 3 || last.height() / 2 < 2 * p.image_border + 3 {
                break;
            }
        }
        Ok(Self {
            gaussians,
            dogs,
            base_factor,
        })
    }

    pub fn octaves(&self) -> usize {
        self.gaussians.len()
    }

    fn factor(&self, octave: usize) -> f32 {
        self.base_factor * (1u32 << octave) as f32
    }
}

#[inline]
fn at(img: &GrayImage, x: isize, y: isize) -> f32 {
    img.get(x as usize, y as usize)
}

fn is_extremum(dogs: &[GrayImage], layer: usize, x: usize, y: usize, v: f32) -> bool {
    for d in &dogs[layer - 1..=layer + 1] {
        for yy in y - 1..=y + 1 {
            let row = &d.pixels()[yy * d.width()..];
            for &n in &row[x - 1..=x + 1] {
                if (v > 0.0 && n > v) || (v < 0.0 && n < v) {
                    return false;
                }
            }
        }
    }
    true
}

struct Refined {
    x: f32,
    y: f32,
    layer: usize,
    layer_offset: f32,
    contrast: f32,
}

fn refine(dogs: &[GrayImage], p: &SiftParams, mut x: isize, mut y: isize, mut layer: usize) -> Option<Refined> {
    let w = dogs[0].width() as isize;
    let h = dogs[0].height() as isize;
    let border = p.image_border as isize;
    let mut offset = Vector3::<f32>::zeros();
    let mut grad = Vector3::<f32>::zeros();
    let mut converged = false;
    for _ in 0..p.max_refine_steps {
        let (prev, cur, next) = (&dogs[layer - 1], &dogs[layer], &dogs[layer + 1]);
        let v = at(cur, x, y);
        let dx = (at(cur, x + 1, y) - at(cur, x - 1, y)) * 0.5;
        let dy = (at(cur, x, y + 1) - at(cur, x, y - 1)) * 0.5;
        let ds = (at(next, x, y) - at(prev, x, y)) * 0.5;
        let dxx = at(cur, x + 1, y) + at(cur, x - 1, y) - 2.0 * v;
        let dyy = at(cur, x, y + 1) + at(cur, x, y - 1) - 2.0 * v;
        let dss = at(next, x, y) + at(prev, x, y) - 2.0 * v;
        let dxy = (at(cur, x + 1, y + 1) - at(cur, x - 1, y + 1) - at(cur, x + 1, y - 1) + at(cur, x - 1, y - 1)) * 0.25;
        let dxs = (at(next, x + 1, y) - at(next, x - 1, y) - at(prev, x + 1, y) + at(prev, x - 1, y)) * 0.25;
        let dys = (at(next, x, y + 1) - at(next, x, y - 1) - at(prev, x, y + 1) + at(prev, x, y - 1)) * 0.25;
        let hess = Matrix3::new(dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss);
        grad = Vector3::new(dx, dy, ds);
        offset = -(hess.try_inverse()? * grad);
        if offset.iter().all(|o| o.abs() < 0.5) {
            converged = true;
            break;
        }
        if offset.iter().any(|o| o.abs() > 1e6) {
            return None;
        }
        x += libm::roundf(offset[0]) as isize;
        y += libm::roundf(offset[1]) as isize;
        let nl = layer as isize + libm::roundf(offset[2]) as isize;
        if nl < 1 || nl > p.intervals as isize || x < border || x >= w - border || y < border || y >= h - border {
            return None;
        }
        layer = nl as usize;
    }
    if !converged {
        return None;
    }
    let contrast = at(&dogs[layer], x, y) + 0.5 * grad.dot(&offset);
    if contrast.abs() < p.contrast_threshold {
        return None;
    }
    let cur = &dogs[layer];
    let v = at(cur, x, y);
    let dxx = at(cur, x + 1, y) + at(cur, x - 1, y) - 2.0 * v;
    let dyy = at(cur, x, y + 1) + at(cur, x, y - 1) - 2.0 * v;
    let dxy = (at(cur, x + 1, y + 1) - at(cur, x - 1, y + 1) - at(cur, x + 1, y - 1) + at(cur, x - 1, y - 1)) * 0.25;
    let tr = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    let r = p.edge_ratio;
    if det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det {
        return None;
    }
    Some(Refined {
        x: x as f32 + offset[0],
        y: y as f32 + offset[1],
        layer,
        layer_offset: offset[2],
        contrast,
    })
}

fn wrap_angle(a: f32) -> f32 {
    let two_pi = 2.0 * PI;
    let mut a = a % two_pi;
    if a < 0.0 {
        a += two_pi;
    }
    if a >= two_pi {
        a = 0.0;
    }
    a
}

fn orientations(img: &GrayImage, p: &SiftParams, x: f32, y: f32, sigma_oct: f32) -> Vec<f32> {
    let n = p.orientation_bins;
    let sigma_w = p.orientation_sigma_factor * sigma_oct;
    let radius = libm::roundf(3.0 * sigma_w) as isize;
    let cx = libm::roundf(x) as isize;
    let cy = libm::roundf(y) as isize;
    let (w, h) = (img.width() as isize, img.height() as isize);
    let denom = 2.0 * sigma_w * sigma_w;
    let mut hist = vec![0.0f32; n];
    for i in -radius..=radius {
        let yy = cy + i;
        if yy <= 0 || yy >= h - 1 {
            continue;
        }
        for j in -radius..=radius {
            let xx = cx + j;
            if xx <= 0 || xx >= w - 1 {
                continue;
            }
            let dx = at(img, xx + 1, yy) - at(img, xx - 1, yy);
            let dy = at(img, xx, yy + 1) - at(img, xx, yy - 1);
            let weight = libm::expf(-((i * i + j * j) as f32) / denom);
            let mag = libm::sqrtf(dx * dx + dy * dy);
            let angle = wrap_angle(libm::atan2f(dy, dx));
            let bin = (libm::roundf(angle * n as f32 / (2.0 * PI)) as usize) % n;
            hist[bin] += weight * mag;
        }
    }
    let smooth: Vec<f32> = (0..n)
        .map(|i| {
            let g = |d: isize| hist[((i as isize + d).rem_euclid(n as isize)) as usize];
            (g(-2) + g(2)) * (1.0 / 16.0) + (g(-1) + g(1)) * (4.0 / 16.0) + g(0) * (6.0 / 16.0)
        })
        .collect();
    let max = smooth.iter().cloned().fold(0.0f32, f32::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 0..n {
        let l = smooth[(i + n - 1) % n];
        let r = smooth[(i + 1) % n];
        let c = smooth[i];
        if c > l && c > r && c >= p.orientation_peak_ratio * max {
            let denom = l - 2.0 * c + r;
            let off = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            let bin = i as f32 + off;
            out.push(wrap_angle(bin * 2.0 * PI / n as f32));
        }
    }
    out
}

fn detect_in(space: &ScaleSpace, p: &SiftParams) -> Vec<Keypoint> {
    let s = p.intervals;
    let prelim = 0.5 * p.contrast_threshold;
    let border = p.image_border;
    let mut kps = Vec::new();
    for (o, dogs) in space.dogs.iter().enumerate() {
        let (w, h) = (dogs[0].width(), dogs[0].height());
        if w <= 2 * border + 2 || h <= 2 * border + 2 {
            continue;
        }
        let factor = space.factor(o);
        for layer in 1..=s {
            let cur = &dogs[layer];
            for y in border..h - border {
                for x in border..w - border {
                    let v = cur.get(x, y);
                    if v.abs() <= prelim || !is_extremum(dogs, layer, x, y, v) {
                        continue;
                    }
                    let Some(r) = refine(dogs, p, x as isize, y as isize, layer) else {
                        continue;
                    };
                    let sigma_oct = p.sigma * libm::powf(2.0, (r.layer as f32 + r.layer_offset) / s as f32);
                    let gauss = &space.gaussians[o][r.layer];
                    let kx = r.x * factor;
                    let ky = r.y * factor;
                    if !(kx >= 0.0 && ky >= 0.0) {
                        continue;
                    }
                    for ori in orientations(gauss, p, r.x, r.y, sigma_oct) {
                        kps.push(Keypoint {
                            x: kx,
                            y: ky,
                            scale: sigma_oct * factor,
                            orientation: ori,
                            response: r.contrast.abs(),
                            octave: o,
                            layer: r.layer,
                        });
                    }
                }
            }
        }
    }
    kps
}

/// Computes one descriptor, or `None` when the sampling window leaves the
/// octave image or the patch has no gradient energy.
fn describe_one(space: &ScaleSpace, p: &SiftParams, kp: &Keypoint) -> Option<Descriptor> {
    let img = space.gaussians.get(kp.octave)?.get(kp.layer)?;
    let factor = space.factor(kp.octave);
    let x = kp.x / factor;
    let y = kp.y / factor;
    let sigma_oct = kp.scale / factor;
    let d = DESCR_WIDTH;
    let n = DESCR_BINS;
    let hist_width = p.descriptor_scale * sigma_oct;
    let radius = libm::roundf(hist_width * core::f32::consts::SQRT_2 * (d as f32 + 1.0) * 0.5) as isize;
    let cx = libm::roundf(x) as isize;
    let cy = libm::roundf(y) as isize;
    let (w, h) = (img.width() as isize, img.height() as isize);
    if cx - radius < 1 || cy - radius < 1 || cx + radius > w - 2 || cy + radius > h - 2 {
        return None;
    }
    let (sin_t, cos_t) = libm::sincosf(kp.orientation);
    let (sin_t, cos_t) = (sin_t / hist_width, cos_t / hist_width);
    // Gaussian weight with sigma = d/2 cells
    let exp_scale = -1.0 / (0.5 * (d * d) as f32);
    let bins_per_rad = n as f32 / (2.0 * PI);
    let stride_r = (d + 2) * (n + 2);
    let stride_c = n + 2;
    let mut hist = vec![0.0f32; (d + 2) * (d + 2) * (n + 2)];
    for i in -radius..=radius {
        for j in -radius..=radius {
            let (jf, i_f) = (j as f32, i as f32);
            let c_rot = jf * cos_t + i_f * sin_t;
            let r_rot = -jf * sin_t + i_f * cos_t;
            let rbin = r_rot + d as f32 / 2.0 - 0.5;
            let cbin = c_rot + d as f32 / 2.0 - 0.5;
            if rbin <= -1.0 || rbin >= d as f32 || cbin <= -1.0 || cbin >= d as f32 {
                continue;
            }
            let (xx, yy) = (cx + j, cy + i);
            let dx = at(img, xx + 1, yy) - at(img, xx - 1, yy);
            let dy = at(img, xx, yy + 1) - at(img, xx, yy - 1);
            let mag = libm::sqrtf(dx * dx + dy * dy);
            if mag == 0.0 {
                continue;
            }
            let weight = libm::expf((c_rot * c_rot + r_rot * r_rot) * exp_scale);
            let obin = wrap_angle(libm::atan2f(dy, dx) - kp.orientation) * bins_per_rad;
            let v = mag * weight;

            let r0 = libm::floorf(rbin);
            let c0 = libm::floorf(cbin);
            let o0 = libm::floorf(obin);
            let (fr, fc, fo) = (rbin - r0, cbin - c0, obin - o0);
            let o0 = (o0 as isize).rem_euclid(n as isize) as usize;
            let r0 = (r0 as isize + 1) as usize;
            let c0 = (c0 as isize + 1) as usize;
            for (dr, wr) in [(0, 1.0 - fr), (1, fr)] {
                for (dc, wc) in [(0, 1.0 - fc), (1, fc)] {
                    for (dob, wo) in [(0, 1.0 - fo), (1, fo)] {
                        let idx = (r0 + dr) * stride_r + (c0 + dc) * stride_c + (o0 + dob);
                        hist[idx] += v * wr * wc * wo;
                    }
                }
            }
        }
    }
    let mut out = [0.0f32; DESCRIPTOR_LEN];
    for r in 0..d {
        for c in 0..d {
            let base = (r + 1) * stride_r + (c + 1) * stride_c;
            // orientation bins n and n+1 wrap to 0 and 1
            let mut cell = [0.0f32; DESCR_BINS];
            for (o, slot) in cell.iter_mut().enumerate() {
                *slot = hist[base + o];
            }
            cell[0] += hist[base + n];
            cell[1] += hist[base + n + 1];
            out[(r * d + c) * n..(r * d + c + 1) * n].copy_from_slice(&cell);
        }
    }
    let norm = libm::sqrtf(out.iter().map(|v| v * v).sum());
    if norm.is_nan() || norm <= 0.0 {
        return None;
    }
    for v in out.iter_mut() {
        *v = (*v / norm).min(p.descriptor_clamp);
    }
    let norm = libm::sqrtf(out.iter().map(|v| v * v).sum());
    for v in out.iter_mut() {
        *v /= norm;
    }
    Some(Descriptor(out))
}

/// Detects keypoints.
pub fn sift_detect(img: &GrayImage, params: &SiftParams) -> Result<Vec<Keypoint>> {
    let space = ScaleSpace::build(img, params)?;
    Ok(detect_in(&space, params))
}

/// Describes `keypoints`; keypoints whose window leaves the image are
/// dropped from both returned lists.
pub fn sift_describe(
    img: &GrayImage,
    keypoints: &[Keypoint],
    params: &SiftParams,
) -> Result<(Vec<Keypoint>, Vec<Descriptor>)> {
    if keypoints.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let space = ScaleSpace::build(img, params)?;
    Ok(describe_in(&space, keypoints, params))
}

fn describe_in(space: &ScaleSpace, keypoints: &[Keypoint], p: &SiftParams) -> (Vec<Keypoint>, Vec<Descriptor>) {
    let mut kps = Vec::with_capacity(keypoints.len());
    let mut descs = Vec::with_capacity(keypoints.len());
    for kp in keypoints {
        if let Some(d) = describe_one(space, p, kp) {
            kps.push(*kp);
            descs.push(d);
        }
    }
    (kps, descs)
}

/// Detection and description sharing one scale space. Images below the
/// minimum side yield no features.
pub fn detect_and_describe(img: &GrayImage, params: &SiftParams) -> (Vec<Keypoint>, Vec<Descriptor>) {
    match ScaleSpace::build(img, params) {
        Ok(space) => {
            let kps = detect_in(&space, params);
            describe_in(&space, &kps, params)
        }
        Err(_) => (Vec::new(), Vec::new()),
    }
}
