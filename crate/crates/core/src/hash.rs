//! Stable hashing and counter-based pseudo-random numbers.
//!
//! Seeds for generated images, the stub stance scorer and RANSAC sampling all
//! come from here so results are identical across runs and platforms.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a sequence of byte strings. Each part is followed by a
/// 0xff separator so `["ab", "c"]` and `["a", "bc"]` hash differently.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    let mut h = FNV_OFFSET;
    for part in parts {
        for &b in *part {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        h ^= 0xff;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// SplitMix64 finalizer; a bijective mix of a 64-bit counter.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform value in `[0, 1)` derived from `(key, counter)`.
#[inline]
pub fn unit_f64(key: u64, counter: u64) -> f64 {
    let bits = splitmix64(key ^ splitmix64(counter));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Counter-based generator: the n-th output depends only on `(key, n)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = splitmix64(self.key ^ splitmix64(self.counter));
        self.counter += 1;
        out
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        // Lemire's multiply-shift; bias is < n / 2^64.
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
