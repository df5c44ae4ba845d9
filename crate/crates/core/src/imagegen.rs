//! Prompts for reference images and a procedural stand-in generator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hash::{stable_hash, unit_f64};
use crate::query::Query;
use crate::vision::GrayImage;

pub const DEFAULT_SIZE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Style {
    Photorealistic,
    Comic,
}

impl Style {
    pub const ALL: [Style; 2] = [Style::Photorealistic, Style::Comic];

    pub fn as_str(self) -> &'static str {
        match self {
            Style::Photorealistic => "photorealistic",
            Style::Comic => "comic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prompt {
    pub text: String,
    pub style: Style,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl Prompt {
    pub fn new(base: &str, style: Style) -> Self {
        Self {
            text: format!("{base}, {}", style.as_str()),
            style,
            width: DEFAULT_SIZE,
            height: DEFAULT_SIZE,
            seed: stable_hash(&[b"prompt", base.as_bytes(), style.as_str().as_bytes()]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || !self.width.is_multiple_of(8) || !self.height.is_multiple_of(8) {
            return Err(Error::InvalidArgument(
                "prompt dimensions must be positive multiples of 8",
            ));
        }
        Ok(())
    }
}

/// Photorealistic and comic prompts for a query, in that order.
pub fn build_prompts(query: &Query) -> [Prompt; 2] {
    let base = query.text();
    Style::ALL.map(|s| Prompt::new(&base, s))
}

/// Text-to-image protocol.
pub trait ImageGenerator {
    fn generate(&self, prompt: &Prompt) -> Result<GrayImage>;
}

impl<T: ImageGenerator + ?Sized> ImageGenerator for &T {
    fn generate(&self, prompt: &Prompt) -> Result<GrayImage> {
        (**self).generate(prompt)
    }
}

/// Validates the prompt, calls the generator and checks the raster size.
pub fn generate<G: ImageGenerator + ?Sized>(generator: &G, prompt: &Prompt) -> Result<GrayImage> {
    prompt.validate()?;
    let img = generator.generate(prompt)?;
    if img.width() != prompt.width || img.height() != prompt.height {
        return Err(Error::WrongDimensions {
            expected_w: prompt.width,
            expected_h: prompt.height,
            got_w: img.width(),
            got_h: img.height(),
        });
    }
    Ok(img)
}

/// ITU-R BT.601 luma, rounded half up.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    libm::floor(y + 0.5).min(255.0) as u8
}

/// Lattice spacings of the noise octaves, in pixels.
pub const NOISE_LATTICES: [usize; 4] = [8, 16, 32, 64];

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Multi-octave value noise keyed by `seed`, quantized to 8 bits.
///
/// Each octave places pseudo-random values on a square lattice, derived
/// from `(seed, octave, lattice x, lattice y)` alone, and interpolates them
/// with a smoothstep. Octaves are summed with equal weight and the result
/// is stretched to `[0, 255]`.
pub fn value_noise(seed: u64, width: usize, height: usize) -> GrayImage {
    let mut acc = alloc::vec![0.0f64; width * height];
    for (o, &cell) in NOISE_LATTICES.iter().enumerate() {
        let key = seed ^ stable_hash(&[b"octave", &(o as u64).to_le_bytes()]);
        let lattice = |ix: usize, iy: usize| unit_f64(key, ((iy as u64) << 32) | ix as u64);
        for y in 0..height {
            let gy = y / cell;
            let ty = smoothstep((y % cell) as f64 / cell as f64);
            for x in 0..width {
                let gx = x / cell;
                let tx = smoothstep((x % cell) as f64 / cell as f64);
                let top = lattice(gx, gy) * (1.0 - tx) + lattice(gx + 1, gy) * tx;
                let bot = lattice(gx, gy + 1) * (1.0 - tx) + lattice(gx + 1, gy + 1) * tx;
                acc[y * width + x] += top * (1.0 - ty) + bot * ty;
            }
        }
    }
    let (lo, hi) = acc
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let bytes: Vec<u8> = acc
        .iter()
        .map(|&v| libm::floor((v - lo) / span * 255.0 + 0.5).clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::from_u8(width, height, &bytes).expect("buffer sized to width * height")
}

/// Generator producing [`value_noise`] from the prompt seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubGenerator;

impl ImageGenerator for StubGenerator {
    fn generate(&self, prompt: &Prompt) -> Result<GrayImage> {
        prompt.validate()?;
        Ok(value_noise(prompt.seed, prompt.width, prompt.height))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Stance;
    use alloc::string::ToString;

    fn query(stance: Stance, terms: &[&str]) -> Query {
        Query {
            topic_id: 1,
            stance,
            terms: terms.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn prompts_carry_style_suffixes() {
        let q = query(Stance::Pro, &["need", "sex", "education", "schools"]);
        let [photo, comic] = build_prompts(&q);
        assert_eq!(photo.text, "need sex education schools, photorealistic");
        assert_eq!(comic.text, "need sex education schools, comic");
        assert_eq!((photo.width, photo.height), (512, 512));
        assert_ne!(photo.seed, comic.seed);
        assert_eq!(build_prompts(&q), [photo, comic]);
        let con = query(Stance::Con, &["not", "need", "sex", "education", "schools"]);
        assert!(build_prompts(&con)[0].text.starts_with("not need"));
    }

    #[test]
    fn stub_is_pure_and_in_range() {
        let p = Prompt::new("a b", Style::Comic);
        let a = generate(&StubGenerator, &p).unwrap();
        let b = generate(&StubGenerator, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.width(), a.height()), (512, 512));
        let bytes = a.to_u8();
        assert_eq!(*bytes.iter().min().unwrap(), 0);
        assert_eq!(*bytes.iter().max().unwrap(), 255);
        let other = generate(&StubGenerator, &Prompt::new("a b", Style::Photorealistic)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn invalid_dimensions_rejected() {
        let mut p = Prompt::new("x", Style::Comic);
        p.width = 500;
        assert!(generate(&StubGenerator, &p).is_err());
    }

    struct WrongSize;
    impl ImageGenerator for WrongSize {
        fn generate(&self, _: &Prompt) -> Result<GrayImage> {
            Ok(GrayImage::constant(8, 8, 0.0))
        }
    }

    #[test]
    fn wrong_dimensions_detected() {
        let p = Prompt::new("x", Style::Comic);
        assert!(matches!(generate(&WrongSize, &p), Err(Error::WrongDimensions { .. })));
    }

    #[test]
    fn luma_weights() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        // 0.299 * 100 = 29.9 -> 30
        assert_eq!(luma(100, 0, 0), 30);
        // 0.587 * 1 + 0.114 * 1 = 0.701 -> 1
        assert_eq!(luma(0, 1, 1), 1);
    }
}
