use std::borrow::Cow;

use super::{FmIndex, OccProvider, QueryError};
use crate::rank::{InterleavedRankVector, RankLayout, RankVectorBuilder};
use crate::suffix::{bwt_of, Bwt, CArray};

const NO_SLOT: u16 = u16::MAX;

/// One rank bit-vector per symbol: bit `j` of symbol `v`'s vector is set
/// iff BWT row `j` holds `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmDummy1Index {
    symbols: Vec<u8>,
    slot: Vec<u16>,
    vectors: Vec<InterleavedRankVector>,
    c: CArray,
    layout: RankLayout,
    prefetch: bool,
}

impl FmDummy1Index {
    pub fn build(text: &[u8], layout: RankLayout) -> Self {
        let (_, bwt) = bwt_of(text);
        Self::from_bwt(&bwt, layout)
    }

    /// One vector for every symbol occurring in the text.
    pub fn from_bwt(bwt: &Bwt, layout: RankLayout) -> Self {
        let freqs = bwt.c.frequencies();
        let symbols: Vec<u8> = (0..=255u8).filter(|&v| freqs[v as usize] > 0).collect();
        if symbols.len() > 16 {
            log::warn!(
                "per-symbol bit vectors over {} symbols cost {} bits per text symbol",
                symbols.len(),
                symbols.len()
            );
        }
        Self::with_symbols(bwt, layout, &symbols)
    }

    /// One vector for each of `symbols`, present in the text or not.
    pub fn with_symbols(bwt: &Bwt, layout: RankLayout, symbols: &[u8]) -> Self {
        let mut slot = vec![NO_SLOT; 256];
        for (i, &s) in symbols.iter().enumerate() {
            slot[s as usize] = i as u16;
        }
        let mut builders: Vec<RankVectorBuilder> =
            symbols.iter().map(|_| RankVectorBuilder::new(bwt.len(), layout)).collect();
        for (row, &sym) in bwt.symbols.iter().enumerate() {
            if row == bwt.sentinel_row {
                continue;
            }
            let s = slot[sym as usize];
            assert!(s != NO_SLOT, "BWT symbol {sym:#04x} has no vector");
            builders[s as usize].set(row);
        }
        let vectors = builders.into_iter().map(RankVectorBuilder::finish).collect();
        Self { symbols: symbols.to_vec(), slot, vectors, c: bwt.c.clone(), layout, prefetch: false }
    }

    pub(crate) fn from_parts(
        symbols: Vec<u8>,
        vectors: Vec<InterleavedRankVector>,
        c: CArray,
        layout: RankLayout,
    ) -> Self {
        let mut slot = vec![NO_SLOT; 256];
        for (i, &s) in symbols.iter().enumerate() {
            slot[s as usize] = i as u16;
        }
        Self { symbols, slot, vectors, c, layout, prefetch: false }
    }

    pub fn with_prefetch(mut self, on: bool) -> Self {
        self.prefetch = on;
        self
    }

    pub fn layout(&self) -> RankLayout {
        self.layout
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn c_array(&self) -> &CArray {
        &self.c
    }

    /// Bit vector of `sym`, if the index keeps one.
    pub fn vector(&self, sym: u8) -> Option<&InterleavedRankVector> {
        match self.slot[sym as usize] {
            NO_SLOT => None,
            s => Some(&self.vectors[s as usize]),
        }
    }

    pub fn vectors(&self) -> &[InterleavedRankVector] {
        &self.vectors
    }

    pub fn prefetch_flag(&self) -> bool {
        self.prefetch
    }
}

impl OccProvider for FmDummy1Index {
    fn bwt_len(&self) -> usize {
        self.c.total()
    }

    #[inline]
    fn c(&self, sym: u8) -> usize {
        self.c.get(sym)
    }

    #[inline]
    fn occ(&self, sym: u8, pos: usize) -> usize {
        match self.slot[sym as usize] {
            NO_SLOT => 0,
            s => self.vectors[s as usize].rank1(pos),
        }
    }

    fn prefetch_enabled(&self) -> bool {
        self.prefetch
    }

    fn prefetch(&self, sym: u8, pos: usize) {
        if let Some(v) = self.vector(sym) {
            v.prefetch(pos);
        }
    }
}

impl FmIndex for FmDummy1Index {
    fn query_symbols<'p>(&self, pattern: &'p [u8]) -> Result<Option<Cow<'p, [u8]>>, QueryError> {
        if pattern.iter().all(|&b| self.c.frequency(b) > 0) {
            Ok(Some(Cow::Borrowed(pattern)))
        } else {
            Ok(None)
        }
    }

    fn size_bytes(&self) -> usize {
        self.vectors.iter().map(|v| v.size_bytes()).sum::<usize>() + 257 * 8
    }
}
