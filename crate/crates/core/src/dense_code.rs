//! Dense digit codes applied to a text before its BWT is taken.
//!
//! Two families are supported:
//!
//! * `(s,c,b,o)` codes on nybbles: `o` one-digit codewords, and longer
//!   codewords made of a beginner, any number of continuers and a final
//!   stopper. These are prefix- and suffix-free.
//! * `(c,b)` codes on nybbles or bit triples: a beginner followed by any
//!   number of continuers. Suffix-free only.
//!
//! Digit values are split into classes in ascending order:
//! beginners, one-length digits, stoppers, continuers. Beginners therefore
//! always occupy `0..b`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("{symbols} symbols exceed the capacity of {params} at every length up to {MAX_CODEWORD_LEN}")]
    CapacityExceeded { symbols: usize, params: DenseCodeParams },
    #[error("symbol {0:#04x} has no codeword")]
    Unmapped(u8),
    #[error("malformed digit stream: {0}")]
    Malformed(String),
}

/// Longest codeword length considered when deriving a code.
pub const MAX_CODEWORD_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFamily {
    Scbdc,
    Cb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitClass {
    Beginner,
    OneLength,
    Stopper,
    Continuer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseCodeParams {
    pub family: CodeFamily,
    pub s: u8,
    pub c: u8,
    pub b: u8,
    pub o: u8,
    pub digit_bits: u8,
}

impl DenseCodeParams {
    pub fn scbdc(s: u8, c: u8, b: u8, o: u8) -> Result<Self, CodeError> {
        let p = Self { family: CodeFamily::Scbdc, s, c, b, o, digit_bits: 4 };
        p.validate()?;
        Ok(p)
    }

    /// A `(c,b)` code with `b` beginners; continuers fill the rest.
    pub fn cb(b: u8, digit_bits: u8) -> Result<Self, CodeError> {
        if !matches!(digit_bits, 3 | 4) {
            return Err(CodeError::InvalidParams(format!("digit bits must be 3 or 4, got {digit_bits}")));
        }
        let radix = 1u8 << digit_bits;
        if b == 0 || b > radix {
            return Err(CodeError::InvalidParams(format!("need 1 <= b <= {radix}, got {b}")));
        }
        let p = Self { family: CodeFamily::Cb, s: 0, c: radix - b, b, o: 0, digit_bits };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CodeError> {
        let sum = self.s as u32 + self.c as u32 + self.b as u32 + self.o as u32;
        let bad = |msg: String| Err(CodeError::InvalidParams(msg));
        match self.family {
            CodeFamily::Scbdc => {
                if self.digit_bits != 4 {
                    return bad("(s,c,b,o) codes use nybbles".into());
                }
                if sum != 16 {
                    return bad(format!("s + c + b + o must be 16, got {sum}"));
                }
                if self.s == 0 || self.b == 0 {
                    return bad("s and b must be positive".into());
                }
            }
            CodeFamily::Cb => {
                if !matches!(self.digit_bits, 3 | 4) {
                    return bad(format!("digit bits must be 3 or 4, got {}", self.digit_bits));
                }
                if self.s != 0 || self.o != 0 {
                    return bad("(c,b) codes have no stoppers or one-length digits".into());
                }
                if sum != 1 << self.digit_bits {
                    return bad(format!("b + c must be {}, got {sum}", 1 << self.digit_bits));
                }
                if self.b == 0 {
                    return bad("b must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub fn radix(&self) -> usize {
        1 << self.digit_bits
    }

    pub fn class_of(&self, digit: u8) -> DigitClass {
        let (b, o, s) = (self.b, self.o, self.s);
        if digit < b {
            DigitClass::Beginner
        } else if digit < b + o {
            DigitClass::OneLength
        } else if digit < b + o + s {
            DigitClass::Stopper
        } else {
            DigitClass::Continuer
        }
    }

    fn class_range(&self, class: DigitClass) -> std::ops::Range<u8> {
        let (b, o, s) = (self.b, self.o, self.s);
        match class {
            DigitClass::Beginner => 0..b,
            DigitClass::OneLength => b..b + o,
            DigitClass::Stopper => b + o..b + o + s,
            DigitClass::Continuer => b + o + s..self.radix() as u8,
        }
    }

    /// Digit ranges, position by position, of codewords of length `len`.
    fn positions(&self, len: usize) -> Vec<std::ops::Range<u8>> {
        use DigitClass::*;
        match (self.family, len) {
            (_, 0) => Vec::new(),
            (CodeFamily::Scbdc, 1) => vec![self.class_range(OneLength)],
            (CodeFamily::Scbdc, _) => {
                let mut v = vec![self.class_range(Beginner)];
                v.extend(std::iter::repeat_n(self.class_range(Continuer), len - 2));
                v.push(self.class_range(Stopper));
                v
            }
            (CodeFamily::Cb, _) => {
                let mut v = vec![self.class_range(Beginner)];
                v.extend(std::iter::repeat_n(self.class_range(Continuer), len - 1));
                v
            }
        }
    }

    /// Number of distinct codewords of length at most `j`.
    pub fn codeword_capacity(&self, j: usize) -> u128 {
        let (s, c, b, o) = (self.s as u128, self.c as u128, self.b as u128, self.o as u128);
        let geometric = |terms: usize, factor: u128| {
            let mut sum = 0u128;
            let mut pow = 1u128;
            for _ in 0..terms {
                sum = sum.saturating_add(factor.saturating_mul(pow));
                pow = pow.saturating_mul(c);
            }
            sum
        };
        match self.family {
            CodeFamily::Scbdc if j == 0 => 0,
            CodeFamily::Scbdc => o.saturating_add(geometric(j - 1, b * s)),
            CodeFamily::Cb => geometric(j, b),
        }
    }
}

impl fmt::Display for DenseCodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            CodeFamily::Scbdc => write!(f, "scbdc({},{},{},{})", self.s, self.c, self.b, self.o),
            CodeFamily::Cb => write!(f, "cb(b={},c={},bits={})", self.b, self.c, self.digit_bits),
        }
    }
}

/// Enumerates codewords of one length in digit-lexicographic order.
struct Odometer {
    ranges: Vec<std::ops::Range<u8>>,
    current: Option<Vec<u8>>,
}

impl Odometer {
    fn new(ranges: Vec<std::ops::Range<u8>>) -> Self {
        let current = if ranges.iter().any(|r| r.is_empty()) {
            None
        } else {
            Some(ranges.iter().map(|r| r.start).collect())
        };
        Self { ranges, current }
    }
}

impl Iterator for Odometer {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.ranges[i].end {
                break;
            }
            cur[i] = self.ranges[i].start;
        }
        Some(out)
    }
}

/// Codewords in canonical order: shorter first, lexicographic within a length.
pub fn canonical_codewords(params: &DenseCodeParams) -> impl Iterator<Item = Vec<u8>> + '_ {
    (1..=MAX_CODEWORD_LEN).flat_map(move |len| Odometer::new(params.positions(len)))
}

/// A derived symbol-to-codeword assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseCode {
    params: DenseCodeParams,
    order: Vec<u8>,
    codewords: Vec<Option<Box<[u8]>>>,
    decode: HashMap<Box<[u8]>, u8>,
}

impl DenseCode {
    /// Assigns canonical codewords to the symbols present in `freqs`, most
    /// frequent first (ties by smaller byte value).
    pub fn derive(freqs: &[u64; 256], params: DenseCodeParams) -> Result<Self, CodeError> {
        params.validate()?;
        let mut order: Vec<u8> = (0..=255u8).filter(|&v| freqs[v as usize] > 0).collect();
        order.sort_by(|&a, &b| freqs[b as usize].cmp(&freqs[a as usize]).then(a.cmp(&b)));
        Self::from_symbol_order(params, order)
    }

    /// Assigns codewords to `order[0]`, `order[1]`, ... in canonical order.
    pub fn from_symbol_order(params: DenseCodeParams, order: Vec<u8>) -> Result<Self, CodeError> {
        params.validate()?;
        if params.codeword_capacity(MAX_CODEWORD_LEN) < order.len() as u128 {
            return Err(CodeError::CapacityExceeded { symbols: order.len(), params });
        }
        let mut codewords: Vec<Option<Box<[u8]>>> = vec![None; 256];
        let mut decode = HashMap::with_capacity(order.len());
        for (&sym, cw) in order.iter().zip(canonical_codewords(&params)) {
            let cw: Box<[u8]> = cw.into_boxed_slice();
            if codewords[sym as usize].is_some() {
                return Err(CodeError::InvalidParams(format!("symbol {sym:#04x} listed twice")));
            }
            decode.insert(cw.clone(), sym);
            codewords[sym as usize] = Some(cw);
        }
        Ok(Self { params, order, codewords, decode })
    }

    pub fn params(&self) -> &DenseCodeParams {
        &self.params
    }

    /// Symbols in codeword-assignment order.
    pub fn symbol_order(&self) -> &[u8] {
        &self.order
    }

    pub fn codeword(&self, sym: u8) -> Option<&[u8]> {
        self.codewords[sym as usize].as_deref()
    }

    pub fn max_codeword_len(&self) -> usize {
        self.codewords.iter().flatten().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn encode(&self, symbols: &[u8]) -> Result<Vec<u8>, CodeError> {
        let mut out = Vec::with_capacity(symbols.len() * 2);
        for &s in symbols {
            out.extend_from_slice(self.codeword(s).ok_or(CodeError::Unmapped(s))?);
        }
        Ok(out)
    }

    pub fn decode(&self, digits: &[u8]) -> Result<Vec<u8>, CodeError> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < digits.len() {
            let start = i;
            let first = digits[i];
            if first as usize >= self.params.radix() {
                return Err(CodeError::Malformed(format!("digit {first} out of range at {i}")));
            }
            i += 1;
            match (self.params.family, self.params.class_of(first)) {
                (CodeFamily::Scbdc, DigitClass::OneLength) => {}
                (CodeFamily::Scbdc, DigitClass::Beginner) => loop {
                    match digits.get(i).map(|&d| self.params.class_of(d)) {
                        Some(DigitClass::Continuer) => i += 1,
                        Some(DigitClass::Stopper) => {
                            i += 1;
                            break;
                        }
                        _ => return Err(CodeError::Malformed(format!("unterminated codeword at {start}"))),
                    }
                },
                (CodeFamily::Cb, DigitClass::Beginner) => {
                    while digits.get(i).is_some_and(|&d| self.params.class_of(d) == DigitClass::Continuer) {
                        i += 1;
                    }
                }
                (_, class) => {
                    return Err(CodeError::Malformed(format!("codeword at {start} starts with a {class:?} digit")))
                }
            }
            let sym = self
                .decode
                .get(&digits[start..i])
                .ok_or_else(|| CodeError::Malformed(format!("unassigned codeword at {start}")))?;
            out.push(*sym);
        }
        Ok(out)
    }

    /// Average codeword length in digits, weighted by `freqs`.
    pub fn mean_codeword_length(&self, freqs: &[u64; 256]) -> f64 {
        let (mut digits, mut total) = (0u128, 0u128);
        for (sym, &f) in freqs.iter().enumerate() {
            if let Some(cw) = &self.codewords[sym] {
                digits += f as u128 * cw.len() as u128;
                total += f as u128;
            }
        }
        if total == 0 {
            0.0
        } else {
            digits as f64 / total as f64
        }
    }
}
