#![allow(dead_code)]

use fmdx::text::{extract_patterns, Text};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

/// `sigma` distinct byte values, never `\n`. Four symbols means `ACGT`.
pub fn alphabet(sigma: usize) -> Vec<u8> {
    if sigma == 4 {
        return b"ACGT".to_vec();
    }
    let all: Vec<u8> = (0..=255u8).filter(|&b| b != b'\n').collect();
    assert!(sigma <= all.len());
    let step = (all.len() / sigma).max(1);
    all.into_iter().step_by(step).take(sigma).collect()
}

/// Uniform i.i.d. text over `alphabet`.
pub fn uniform_text(n: usize, alphabet: &[u8], seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

/// Text where symbol `i` has weight proportional to `1 / (i + 1)`.
pub fn skewed_text(n: usize, alphabet: &[u8], seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..alphabet.len()).map(|i| 1.0 / (i + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let cdf: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w / total;
            Some(*acc)
        })
        .collect();
    (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            alphabet[cdf.partition_point(|&c| c < x).min(alphabet.len() - 1)]
        })
        .collect()
}

/// `count` patterns extracted from `text`, lengths cycling through `lengths`.
pub fn mixed_patterns(text: &[u8], count: usize, lengths: std::ops::RangeInclusive<usize>, seed: u64, acgt: bool) -> Vec<Vec<u8>> {
    let t = Text::new(text.to_vec()).unwrap();
    let lens: Vec<usize> = lengths.collect();
    (0..count)
        .map(|i| {
            let m = lens[i % lens.len()];
            extract_patterns(&t, 1, m, seed.wrapping_add(i as u64), acgt).unwrap().patterns.remove(0)
        })
        .collect()
}

/// Random patterns over `alphabet`; most of them do not occur in a text.
pub fn random_patterns(count: usize, lengths: std::ops::RangeInclusive<usize>, alphabet: &[u8], seed: u64) -> Vec<Vec<u8>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(lengths.clone());
            (0..m).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
        })
        .collect()
}

/// Prefix sums: `out[j]` is the number of set bits among `bits[..j]`.
pub fn prefix_ones(bits: &[bool]) -> Vec<usize> {
    let mut out = Vec::with_capacity(bits.len() + 1);
    out.push(0);
    for &b in bits {
        out.push(out.last().unwrap() + b as usize);
    }
    out
}
