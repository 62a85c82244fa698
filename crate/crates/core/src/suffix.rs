//! Suffix array, BWT and C array over a byte text with an implicit sentinel.
//!
//! The sentinel is never materialized as a byte: it is the unique symbol
//! ordered below every byte value, appended after the last text position.
//! Sorting the suffixes of the bare text with "proper prefix sorts first"
//! gives exactly the order of the sentinel-terminated suffixes, so a plain
//! byte suffix sorter suffices.

/// Suffix array of `text` + sentinel, length `n + 1`; entry 0 is `n`.
///
/// # Panics
/// If `text.len() >= i32::MAX`.
pub fn suffix_array(text: &[u8]) -> Vec<u32> {
    assert!(text.len() < i32::MAX as usize, "text too long for 32-bit suffix array");
    let mut sorted = vec![0i32; text.len()];
    if !text.is_empty() {
        divsufsort::sort_in_place(text, &mut sorted);
    }
    let mut sa = Vec::with_capacity(text.len() + 1);
    sa.push(text.len() as u32);
    sa.extend(sorted.into_iter().map(|p| p as u32));
    sa
}

/// For each byte value `v`, the number of symbols (sentinel included) that
/// are strictly smaller than `v`. The sentinel itself has C = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CArray {
    less: Vec<u64>,
}

impl CArray {
    pub fn from_frequencies(freqs: &[u64; 256]) -> Self {
        let mut less = Vec::with_capacity(257);
        let mut acc = 1u64;
        for &f in freqs.iter() {
            less.push(acc);
            acc += f;
        }
        less.push(acc);
        Self { less }
    }

    pub fn from_text(text: &[u8]) -> Self {
        Self::from_frequencies(&crate::text::byte_frequencies(text))
    }

    #[inline]
    pub fn get(&self, v: u8) -> usize {
        self.less[v as usize] as usize
    }

    /// Occurrences of byte `v` in the text.
    pub fn frequency(&self, v: u8) -> usize {
        (self.less[v as usize + 1] - self.less[v as usize]) as usize
    }

    /// Total symbol count including the sentinel, i.e. `n + 1`.
    pub fn total(&self) -> usize {
        self.less[256] as usize
    }

    pub fn frequencies(&self) -> [u64; 256] {
        let mut out = [0u64; 256];
        for (v, f) in out.iter_mut().enumerate() {
            *f = self.less[v + 1] - self.less[v];
        }
        out
    }
}

/// The BWT of `text` + sentinel.
///
/// `symbols[sentinel_row]` holds a placeholder 0 byte; callers must consult
/// [`Bwt::get`] or `sentinel_row` to distinguish it from a real 0 byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bwt {
    pub symbols: Vec<u8>,
    pub sentinel_row: usize,
    pub c: CArray,
}

impl Bwt {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `None` at the sentinel row.
    pub fn get(&self, row: usize) -> Option<u8> {
        (row != self.sentinel_row).then(|| self.symbols[row])
    }
}

pub fn build_bwt(text: &[u8], sa: &[u32]) -> Bwt {
    debug_assert_eq!(sa.len(), text.len() + 1);
    let mut sentinel_row = 0;
    let symbols = sa
        .iter()
        .enumerate()
        .map(|(row, &p)| {
            if p == 0 {
                sentinel_row = row;
                0
            } else {
                text[p as usize - 1]
            }
        })
        .collect();
    Bwt { symbols, sentinel_row, c: CArray::from_text(text) }
}

/// Convenience: suffix array and BWT in one step.
pub fn bwt_of(text: &[u8]) -> (Vec<u32>, Bwt) {
    let sa = suffix_array(text);
    let bwt = build_bwt(text, &sa);
    (sa, bwt)
}

/// Occurrences of `c` among the first `pos` BWT rows, by direct scan.
///
/// # Panics
/// If `pos > bwt.len()`.
pub fn naive_occ(bwt: &Bwt, c: u8, pos: usize) -> usize {
    assert!(pos <= bwt.len(), "occ position {pos} out of range");
    (0..pos).filter(|&i| bwt.get(i) == Some(c)).count()
}

/// Overlapping occurrences of `p` in `t`, by direct scan.
pub fn naive_count(t: &[u8], p: &[u8]) -> usize {
    if p.is_empty() || p.len() > t.len() {
        return 0;
    }
    let (first, rest) = (p[0], &p[1..]);
    let last_start = t.len() - p.len();
    let mut count = 0;
    for (i, _) in t[..=last_start].iter().enumerate().filter(|(_, &b)| b == first) {
        if &t[i + 1..i + p.len()] == rest {
            count += 1;
        }
    }
    count
}

/// Recovers the text from its BWT through LF-mapping.
pub fn invert_bwt(bwt: &Bwt) -> Vec<u8> {
    let n = bwt.len() - 1;
    let mut seen = [0usize; 256];
    let mut lf = vec![0usize; bwt.len()];
    for (row, slot) in lf.iter_mut().enumerate() {
        if let Some(c) = bwt.get(row) {
            *slot = bwt.c.get(c) + seen[c as usize];
            seen[c as usize] += 1;
        }
    }
    // Row 0 is the sentinel suffix; its BWT symbol is the last text byte.
    let mut out = vec![0u8; n];
    let mut row = 0;
    for i in (0..n).rev() {
        let c = bwt.get(row).expect("sentinel reached early");
        out[i] = c;
        row = lf[row];
    }
    out
}
