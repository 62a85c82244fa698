//! Text ingestion and reproducible random pattern extraction.
//!
//! Pattern positions are drawn from SplitMix64 (the reference `splitmix64.c`
//! recurrence) seeded directly with the user seed. A 64-bit output `x` is
//! reduced to a window start in `0..w` as `(x * w) >> 64` computed in 128-bit
//! arithmetic, so any implementation of the same two steps reproduces the
//! same pattern file.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("text is empty")]
    Empty,
    #[error("pattern length {m} exceeds text length {n}")]
    PatternTooLong { m: usize, n: usize },
    #[error("pattern length and count must be positive")]
    ZeroSize,
    #[error("no valid pattern window found after {attempts} attempts")]
    NoValidWindow { attempts: u64 },
    #[error("malformed pattern file: {0}")]
    PatternFile(String),
}

/// An in-memory byte text with its alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Text {
    bytes: Vec<u8>,
    alphabet: Vec<u8>,
}

impl Text {
    pub fn new(bytes: Vec<u8>) -> Result<Self, TextError> {
        if bytes.is_empty() {
            return Err(TextError::Empty);
        }
        let freqs = byte_frequencies(&bytes);
        let alphabet = (0..=255u8).filter(|&b| freqs[b as usize] > 0).collect();
        Ok(Self { bytes, alphabet })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// Distinct byte values in ascending order.
    pub fn alphabet(&self) -> &[u8] {
        &self.alphabet
    }

    pub fn sigma(&self) -> usize {
        self.alphabet.len()
    }

    pub fn frequencies(&self) -> [u64; 256] {
        byte_frequencies(&self.bytes)
    }
}

pub fn byte_frequencies(bytes: &[u8]) -> [u64; 256] {
    let mut freqs = [0u64; 256];
    for &b in bytes {
        freqs[b as usize] += 1;
    }
    freqs
}

pub fn load_text(path: impl AsRef<Path>) -> Result<Text, TextError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| TextError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Text::new(bytes)
}

/// A set of equal-length patterns drawn from one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    pub patterns: Vec<Vec<u8>>,
    pub source_length: usize,
    pub seed: u64,
}

fn is_acgt(b: u8) -> bool {
    matches!(b, b'A' | b'C' | b'G' | b'T')
}

#[inline]
fn reduce(x: u64, range: usize) -> usize {
    ((x as u128 * range as u128) >> 64) as usize
}

/// Draws `count` substrings of length `m` at uniformly random positions.
///
/// Windows containing a newline (and, with `acgt_only`, any byte outside
/// `ACGT`) are rejected and redrawn; a pattern gives up after `64 n`
/// consecutive rejections.
pub fn extract_patterns(
    text: &Text,
    count: usize,
    m: usize,
    seed: u64,
    acgt_only: bool,
) -> Result<PatternSet, TextError> {
    let n = text.len();
    if m == 0 || count == 0 {
        return Err(TextError::ZeroSize);
    }
    if m > n {
        return Err(TextError::PatternTooLong { m, n });
    }
    let windows = n - m + 1;
    let max_attempts = (n as u64).saturating_mul(64);
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut patterns = Vec::with_capacity(count);
    for _ in 0..count {
        let mut attempts = 0u64;
        loop {
            let start = reduce(rng.next_u64(), windows);
            let window = &text.bytes[start..start + m];
            let valid = !window.contains(&b'\n') && (!acgt_only || window.iter().all(|&b| is_acgt(b)));
            if valid {
                patterns.push(window.to_vec());
                break;
            }
            attempts += 1;
            if attempts >= max_attempts {
                return Err(TextError::NoValidWindow { attempts });
            }
        }
    }
    Ok(PatternSet { patterns, source_length: n, seed })
}

/// Writes one pattern per line, each terminated by `\n`.
pub fn write_patterns<W: Write>(mut out: W, patterns: &[Vec<u8>]) -> io::Result<()> {
    for p in patterns {
        out.write_all(p)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_patterns<R: BufRead>(mut input: R) -> Result<Vec<Vec<u8>>, TextError> {
    let mut patterns = Vec::new();
    let mut line = Vec::new();
    loop {
        line.clear();
        let read = input
            .read_until(b'\n', &mut line)
            .map_err(|e| TextError::PatternFile(e.to_string()))?;
        if read == 0 {
            break;
        }
        if line.last() == Some(&b'\n') {
            line.pop();
        } else {
            return Err(TextError::PatternFile(format!(
                "pattern {} is not terminated by a newline",
                patterns.len() + 1
            )));
        }
        patterns.push(line.clone());
    }
    Ok(patterns)
}
