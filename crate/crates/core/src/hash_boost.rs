//! k-gram shortcut for backward search.
//!
//! The table maps every k-gram of the text to the interval of suffix-array
//! rows that start with it. A query looks up the pattern's last `k`
//! symbols and runs backward search only over the remaining `m - k`.
//!
//! Buckets are addressed by 64-bit FNV-1a of the gram, masked to a
//! power-of-two bucket count, with linear probing. Each entry stores the
//! gram itself, so a lookup of an absent gram never returns a foreign
//! interval.

use crate::fm::{backward_search, CountResult, FmIndex, QueryError};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_LOAD_FACTOR: f64 = 0.9;
const EMPTY: u64 = u64::MAX;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGramTable {
    k: usize,
    grams: Vec<u8>,
    bounds: Vec<(u64, u64)>,
    entries: usize,
}

impl KGramTable {
    /// Builds the table from `text` (in the index's symbol space) and its
    /// sentinel-terminated suffix array. Only grams accepted by `keep` are
    /// inserted.
    ///
    /// # Panics
    /// If `k` is zero or larger than the text, or `load_factor` is not in
    /// `(0, 1)`.
    pub fn build<F: Fn(&[u8]) -> bool>(text: &[u8], sa: &[u32], k: usize, load_factor: f64, keep: F) -> Self {
        assert!(k >= 1 && k <= text.len(), "need 1 <= k <= n");
        assert!(load_factor > 0.0 && load_factor < 1.0, "load factor must be in (0, 1)");
        let n = text.len();
        let mut runs: Vec<(usize, usize, usize)> = Vec::new();
        let mut row = 0;
        while row < sa.len() {
            let p = sa[row] as usize;
            if n - p < k {
                row += 1;
                continue;
            }
            let gram = &text[p..p + k];
            let start = row;
            row += 1;
            while row < sa.len() {
                let q = sa[row] as usize;
                if n - q < k || &text[q..q + k] != gram {
                    break;
                }
                row += 1;
            }
            if keep(gram) {
                runs.push((p, start, row));
            }
        }

        let mut buckets = 1usize;
        while runs.len() as f64 > load_factor * buckets as f64 {
            buckets *= 2;
        }
        let mut table = Self { k, grams: vec![0; buckets * k], bounds: vec![(EMPTY, EMPTY); buckets], entries: 0 };
        for (p, sp, ep) in runs {
            table.insert(&text[p..p + k], sp as u64, ep as u64);
        }
        table
    }

    fn insert(&mut self, gram: &[u8], sp: u64, ep: u64) {
        let mask = self.bounds.len() - 1;
        let mut b = fnv1a(gram) as usize & mask;
        while self.bounds[b].0 != EMPTY {
            b = (b + 1) & mask;
        }
        self.grams[b * self.k..(b + 1) * self.k].copy_from_slice(gram);
        self.bounds[b] = (sp, ep);
        self.entries += 1;
    }

    /// Suffix-array interval of rows starting with `gram`, if it occurs.
    ///
    /// # Panics
    /// If `gram.len() != k`.
    pub fn lookup(&self, gram: &[u8]) -> Option<CountResult> {
        assert_eq!(gram.len(), self.k, "gram length must equal k");
        let mask = self.bounds.len() - 1;
        let mut b = fnv1a(gram) as usize & mask;
        loop {
            let (sp, ep) = self.bounds[b];
            if sp == EMPTY {
                return None;
            }
            if &self.grams[b * self.k..(b + 1) * self.k] == gram {
                return Some(CountResult::new(sp as usize, ep as usize));
            }
            b = (b + 1) & mask;
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    pub fn bucket_count(&self) -> usize {
        self.bounds.len()
    }

    pub fn load(&self) -> f64 {
        self.entries as f64 / self.bounds.len() as f64
    }

    /// Bytes of the bucket array: `k` gram bytes and two 64-bit bounds each.
    pub fn size_bytes(&self) -> usize {
        self.bounds.len() * (self.k + 16)
    }

    /// Home bucket of `gram`.
    pub fn bucket_of(&self, gram: &[u8]) -> usize {
        fnv1a(gram) as usize & (self.bounds.len() - 1)
    }

    /// Occupied entries as `(gram, sp, ep)`, in bucket order.
    pub fn entries(&self) -> impl Iterator<Item = (&[u8], u64, u64)> + '_ {
        self.bounds
            .iter()
            .enumerate()
            .filter(|(_, b)| b.0 != EMPTY)
            .map(|(i, &(sp, ep))| (&self.grams[i * self.k..(i + 1) * self.k], sp, ep))
    }

    pub(crate) fn raw_buckets(&self) -> (&[u8], &[(u64, u64)]) {
        (&self.grams, &self.bounds)
    }

    pub(crate) fn from_raw(k: usize, grams: Vec<u8>, bounds: Vec<(u64, u64)>) -> Option<Self> {
        if k == 0 || !bounds.len().is_power_of_two() || grams.len() != bounds.len() * k {
            return None;
        }
        let entries = bounds.iter().filter(|b| b.0 != EMPTY).count();
        if entries == bounds.len() {
            return None;
        }
        Some(Self { k, grams, bounds, entries })
    }
}

/// Count using the table for the pattern's last `k` symbols.
///
/// Patterns shorter than `k` fall back to plain backward search.
pub fn boosted_count<I: FmIndex + ?Sized>(
    idx: &I,
    table: &KGramTable,
    pattern: &[u8],
) -> Result<CountResult, QueryError> {
    if pattern.is_empty() {
        return Err(QueryError::EmptyPattern);
    }
    let Some(symbols) = idx.query_symbols(pattern)? else {
        return Ok(CountResult::EMPTY);
    };
    let m = symbols.len();
    let k = table.k();
    if m < k {
        return Ok(backward_search(idx, &symbols, idx.initial_range()));
    }
    match table.lookup(&symbols[m - k..]) {
        None => Ok(CountResult::EMPTY),
        Some(range) => Ok(backward_search(idx, &symbols[..m - k], range)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fm::FmDummy1Index;
    use crate::rank::RankLayout;
    use crate::suffix::{bwt_of, suffix_array};
    use std::collections::HashSet;

    /// Rows whose suffix starts with `g`, by scanning the suffix array.
    fn sa_interval(text: &[u8], sa: &[u32], g: &[u8]) -> (u64, u64) {
        let rows: Vec<usize> = (0..sa.len()).filter(|&r| text[sa[r] as usize..].starts_with(g)).collect();
        match (rows.first(), rows.last()) {
            (Some(&a), Some(&b)) => (a as u64, b as u64 + 1),
            _ => (0, 0),
        }
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn aaaa_has_one_entry() {
        let sa = suffix_array(b"aaaa");
        let t = KGramTable::build(b"aaaa", &sa, 2, 0.9, |_| true);
        assert_eq!(t.len(), 1);
        assert_eq!(t.lookup(b"aa"), Some(CountResult::new(2, 5)));
        assert_eq!(t.lookup(b"ab"), None);
    }

    #[test]
    fn k_equal_to_n() {
        let sa = suffix_array(b"banana");
        let t = KGramTable::build(b"banana", &sa, 6, 0.9, |_| true);
        assert_eq!(t.len(), 1);
        assert_eq!(t.lookup(b"banana").unwrap().occurrences(), 1);
    }

    #[test]
    fn intervals_match_suffix_array_scan() {
        let text: Vec<u8> = (0..3000u32).map(|i| b"ACGT"[(i.wrapping_mul(2654435761) >> 28) as usize % 4]).collect();
        let sa = suffix_array(&text);
        let t = KGramTable::build(&text, &sa, 5, DEFAULT_LOAD_FACTOR, |_| true);
        let distinct: HashSet<&[u8]> = text.windows(5).collect();
        assert_eq!(t.len(), distinct.len());
        assert!(t.len() <= 1024);
        assert!(t.load() <= DEFAULT_LOAD_FACTOR);
        for (g, sp, ep) in t.entries() {
            assert_eq!((sp, ep), sa_interval(&text, &sa, g));
            assert!(ep > sp);
        }
    }

    #[test]
    fn colliding_grams_are_both_found() {
        // Find two 3-grams sharing a home bucket in a 4-bucket table.
        let mut homes = std::collections::HashMap::new();
        let mut pair = None;
        for a in b'a'..=b'z' {
            let g = [a, b'x', b'y'];
            if let Some(prev) = homes.insert(fnv1a(&g) & 3, g) {
                pair = Some((prev, g));
                break;
            }
        }
        let (g1, g2) = pair.unwrap();
        let text = [&g1[..], b"#", &g2[..]].concat();
        let sa = suffix_array(&text);
        let t = KGramTable::build(&text, &sa, 3, 0.9, |g| g == g1 || g == g2);
        assert_eq!(t.bucket_count(), 4);
        assert_eq!(t.bucket_of(&g1), t.bucket_of(&g2));
        assert_eq!(t.lookup(&g1).unwrap().occurrences(), 1);
        assert_eq!(t.lookup(&g2).unwrap().occurrences(), 1);
    }

    #[test]
    fn boosted_equals_plain() {
        let text = b"abracadabra_abracadabra_cadabra".to_vec();
        let (sa, bwt) = bwt_of(&text);
        let idx = FmDummy1Index::from_bwt(&bwt, RankLayout::Plain512x64);
        let t = KGramTable::build(&text, &sa, 5, 0.9, |_| true);
        for p in [&b"abracad"[..], b"cadabra", b"dabra", b"abra", b"zzzzzz", b"xabra", b"a_cad"] {
            assert_eq!(boosted_count(&idx, &t, p).unwrap(), idx.count(p).unwrap(), "{p:?}");
        }
        assert_eq!(boosted_count(&idx, &t, b"cadab").unwrap().occurrences(), 3);
    }

    #[test]
    fn rejects_corrupt_raw_tables() {
        assert!(KGramTable::from_raw(2, vec![0; 6], vec![(EMPTY, EMPTY); 3]).is_none());
        assert!(KGramTable::from_raw(2, vec![0; 4], vec![(0, 1); 2]).is_none());
        assert!(KGramTable::from_raw(2, vec![0; 4], vec![(0, 1), (EMPTY, EMPTY)]).is_some());
    }
}
