use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major grayscale raster with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument("pixel buffer length != width * height"));
        }
        if pixels.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::InvalidArgument("pixel values must be finite and in [0, 1]"));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Unchecked constructor for internal scratch images (scale-space levels
    /// may leave `[0, 1]`).
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<f32>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Self {
        Self::from_raw(width, height, vec![value.clamp(0.0, 1.0); width * height])
    }

    pub fn from_u8(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidArgument("pixel buffer length != width * height"));
        }
        Ok(Self::from_raw(
            width,
            height,
            data.iter().map(|&v| f32::from(v) / 255.0).collect(),
        ))
    }

    /// Quantizes back to 8 bits, rounding half up.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&p| libm::floorf(p.clamp(0.0, 1.0) * 255.0 + 0.5) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }

    /// Bilinear sample with edge clamping.
    pub fn sample(&self, x: f32, y: f32) -> f32 {
        let maxx = (self.width - 1) as f32;
        let maxy = (self.height - 1) as f32;
        let x = x.clamp(0.0, maxx);
        let y = y.clamp(0.0, maxy);
        let x0 = libm::floorf(x) as usize;
        let y0 = libm::floorf(y) as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f32;
        let fy = y - y0 as f32;
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bot = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bot * fy
    }

    /// Rotates by 90° clockwise (as displayed, y pointing down). A pixel at
    /// `(x, y)` moves to `(height - 1 - y, x)`.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let nx = h - 1 - y;
                let ny = x;
                out[ny * h + nx] = self.get(x, y);
            }
        }
        Self::from_raw(h, w, out)
    }

    /// Resamples through a homography: output pixel `p` takes the source
    /// value at `inverse * p`. Points mapping outside the source get `fill`.
    pub fn warp_inverse(&self, inverse: &[[f64; 3]; 3], width: usize, height: usize, fill: f32) -> Self {
        let mut out = vec![fill; width * height];
        for y in 0..height {
            for x in 0..width {
                let (xf, yf) = (x as f64, y as f64);
                let w = inverse[2][0] * xf + inverse[2][1] * yf + inverse[2][2];
                if w.abs() < 1e-12 {
                    continue;
                }
                let sx = (inverse[0][0] * xf + inverse[0][1] * yf + inverse[0][2]) / w;
                let sy = (inverse[1][0] * xf + inverse[1][1] * yf + inverse[1][2]) / w;
                if sx >= 0.0 && sy >= 0.0 && sx <= (self.width - 1) as f64 && sy <= (self.height - 1) as f64 {
                    out[y * width + x] = self.sample(sx as f32, sy as f32);
                }
            }
        }
        Self::from_raw(width, height, out)
    }
}

/// Normalized 1-D Gaussian kernel with radius `ceil(4 sigma)`.
pub(crate) fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    let radius = libm::ceilf(4.0 * sigma).max(1.0) as usize;
    let mut k: Vec<f32> = (0..=2 * radius)
        .map(|i| {
            let d = i as f32 - radius as f32;
            libm::expf(-d * d / (2.0 * sigma * sigma))
        })
        .collect();
    let sum: f32 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

#[inline]
fn reflect101(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * n - 2 - i;
        } else {
            return i as usize;
        }
    }
}

fn convolve_rows(src: &[f32], w: usize, h: usize, kernel: &[f32], dst: &mut [f32]) {
    let r = kernel.len() / 2;
    let mut line = vec![0.0f32; w + 2 * r];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for (i, v) in line.iter_mut().enumerate() {
            *v = row[reflect101(i as isize - r as isize, w)];
        }
        let out = &mut dst[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            let window = &line[x..x + kernel.len()];
            *o = window.iter().zip(kernel).map(|(a, b)| a * b).sum();
        }
    }
}

/// Separable Gaussian blur with reflect-101 borders.
pub fn gaussian_blur(img: &GrayImage, sigma: f32) -> GrayImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width, img.height);
    let kernel = gaussian_kernel(sigma);
    let mut tmp = vec![0.0f32; w * h];
    convolve_rows(&img.pixels, w, h, &kernel, &mut tmp);
    // transpose, blur rows, transpose back
    let mut t = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            t[x * h + y] = tmp[y * w + x];
        }
    }
    let mut t2 = vec![0.0f32; w * h];
    convolve_rows(&t, h, w, &kernel, &mut t2);
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = t2[x * h + y];
        }
    }
    GrayImage::from_raw(w, h, tmp)
}

/// Doubles resolution with bilinear interpolation; output pixel `(x, y)`
/// samples the input at `(x / 2, y / 2)`.
pub fn upsample2(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width * 2, img.height * 2);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            out.push(img.sample(x as f32 * 0.5, y as f32 * 0.5));
        }
    }
    GrayImage::from_raw(w, h, out)
}

/// Keeps every second pixel.
pub fn downsample2(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width / 2, img.height / 2);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            out.push(img.get(2 * x, 2 * y));
        }
    }
    GrayImage::from_raw(w, h, out)
}
