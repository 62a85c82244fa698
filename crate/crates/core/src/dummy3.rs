//! DNA index over the alphabet `ACGTN`, three symbols per byte.
//!
//! Every block holds four 32-bit counters (occurrences of A, C, G and T
//! before the block) followed by packed BWT symbols. A byte stores the
//! triple `(x0, x1, x2)` as `25*x0 + 5*x1 + x2`. Rank inside a block sums a
//! 125x4 lookup table over whole bytes, then a prefix table for the one or
//! two symbols taken from the final byte.
//!
//! Bytes other than `A`, `C`, `G`, `T` are indexed as `N`. The sentinel is
//! packed as `N` as well; rank is only defined for the four bases, so the
//! substitution is invisible to queries.

use std::borrow::Cow;

use crate::aligned::AlignedWords;
use crate::fm::{FmIndex, OccProvider, QueryError};
use crate::suffix::{bwt_of, Bwt, CArray};

pub const A: u8 = 0;
pub const C: u8 = 1;
pub const G: u8 = 2;
pub const T: u8 = 3;
pub const N: u8 = 4;

/// Maps a text byte to its symbol code.
#[inline]
pub fn dna_code(b: u8) -> u8 {
    match b {
        b'A' => A,
        b'C' => C,
        b'G' => G,
        b'T' => T,
        _ => N,
    }
}

pub fn map_text(text: &[u8]) -> Vec<u8> {
    text.iter().map(|&b| dna_code(b)).collect()
}

#[inline]
pub fn pack_triple(x0: u8, x1: u8, x2: u8) -> u8 {
    x0 * 25 + x1 * 5 + x2
}

#[inline]
pub fn unpack_triple(byte: u8) -> (u8, u8, u8) {
    (byte / 25, byte / 5 % 5, byte % 5)
}

/// Per-byte symbol counts: whole triple, first symbol, first two symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleLut {
    pub full: [[u8; 4]; 125],
    pub prefix1: [[u8; 4]; 125],
    pub prefix2: [[u8; 4]; 125],
}

impl TripleLut {
    pub const fn new() -> Self {
        let mut lut = TripleLut { full: [[0; 4]; 125], prefix1: [[0; 4]; 125], prefix2: [[0; 4]; 125] };
        let mut byte = 0;
        while byte < 125 {
            let xs = [byte / 25, byte / 5 % 5, byte % 5];
            let mut k = 0;
            while k < 3 {
                let x = xs[k];
                if x < 4 {
                    if k < 1 {
                        lut.prefix1[byte][x] += 1;
                    }
                    if k < 2 {
                        lut.prefix2[byte][x] += 1;
                    }
                    lut.full[byte][x] += 1;
                }
                k += 1;
            }
            byte += 1;
        }
        lut
    }
}

impl Default for TripleLut {
    fn default() -> Self {
        Self::new()
    }
}

static LUT: TripleLut = TripleLut::new();

/// Block size of an [`FmDummy3Index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dna3Block {
    Bits512,
    Bits1024,
}

impl Dna3Block {
    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            512 => Some(Self::Bits512),
            1024 => Some(Self::Bits1024),
            _ => None,
        }
    }

    pub fn bits(self) -> usize {
        match self {
            Self::Bits512 => 512,
            Self::Bits1024 => 1024,
        }
    }

    pub fn words(self) -> usize {
        self.bits() / 64
    }

    /// Packed data bytes per block (after 16 counter bytes).
    pub fn data_bytes(self) -> usize {
        self.bits() / 8 - 16
    }

    /// BWT symbols per block: 144 or 336.
    pub fn symbols(self) -> usize {
        self.data_bytes() * 3
    }
}

/// Packs `len` symbols into blocks; returns the words and the base totals.
fn pack_blocks<F: Fn(usize) -> u8>(len: usize, block: Dna3Block, sym: F) -> (AlignedWords, [u32; 4]) {
    let per_block = block.symbols();
    let blocks = len.div_ceil(per_block);
    let mut words = AlignedWords::zeroed(blocks * block.words());
    let mut totals = [0u32; 4];
    let slice = words.as_mut_slice();
    for b in 0..blocks {
        let base = b * block.words();
        slice[base] = totals[0] as u64 | (totals[1] as u64) << 32;
        slice[base + 1] = totals[2] as u64 | (totals[3] as u64) << 32;
        let rows = b * per_block..((b + 1) * per_block).min(len);
        for (k, start) in rows.clone().step_by(3).enumerate() {
            let get = |i: usize| if i < rows.end { sym(i) } else { N };
            let byte = 16 + k;
            slice[base + byte / 8] |= (pack_triple(get(start), get(start + 1), get(start + 2)) as u64) << (8 * (byte % 8));
        }
        for row in rows {
            let s = sym(row);
            if s < 4 {
                totals[s as usize] += 1;
            }
        }
    }
    (words, totals)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmDummy3Index {
    block: Dna3Block,
    len: usize,
    totals: [u32; 4],
    words: AlignedWords,
    c: CArray,
    prefetch: bool,
}

impl FmDummy3Index {
    pub fn build(text: &[u8], block: Dna3Block) -> Self {
        let (_, bwt) = bwt_of(&map_text(text));
        Self::from_mapped_bwt(&bwt, block)
    }

    /// Builds from the BWT of an already mapped (`0..=4`) text.
    pub fn from_mapped_bwt(bwt: &Bwt, block: Dna3Block) -> Self {
        assert!(bwt.len() <= u32::MAX as usize, "text too long for 32-bit block counters");
        let (words, totals) = pack_blocks(bwt.len(), block, |row| match bwt.get(row) {
            Some(s) => {
                assert!(s <= N, "unmapped BWT symbol {s}");
                s
            }
            None => N,
        });
        Self { block, len: bwt.len(), totals, words, c: bwt.c.clone(), prefetch: false }
    }

    /// Adopts a stored block array; `None` unless it is exactly the packing
    /// of its own symbols and agrees with `c`.
    pub(crate) fn from_parts(block: Dna3Block, len: usize, words: AlignedWords, c: CArray) -> Option<Self> {
        let blocks = len.div_ceil(block.symbols());
        if words.len() != blocks * block.words() || c.total() != len || len > u32::MAX as usize {
            return None;
        }
        let mut idx = Self { block, len, totals: [0; 4], words, c, prefetch: false };
        let per_block = block.symbols();
        let mut symbols = Vec::with_capacity(len);
        for i in 0..len {
            let byte = idx.byte(i / per_block, 16 + i % per_block / 3);
            if byte >= 125 {
                return None;
            }
            let (x0, x1, x2) = unpack_triple(byte);
            symbols.push([x0, x1, x2][i % 3]);
        }
        let (words, totals) = pack_blocks(len, block, |i| symbols[i]);
        if words != idx.words || (0..4).any(|s| totals[s] as usize != idx.c.frequency(s as u8)) {
            return None;
        }
        idx.totals = totals;
        Some(idx)
    }

    pub fn with_prefetch(mut self, on: bool) -> Self {
        self.prefetch = on;
        self
    }

    pub fn block(&self) -> Dna3Block {
        self.block
    }

    pub fn raw_words(&self) -> &[u64] {
        self.words.as_slice()
    }

    pub fn c_array(&self) -> &CArray {
        &self.c
    }

    pub fn num_blocks(&self) -> usize {
        self.len.div_ceil(self.block.symbols())
    }

    pub fn prefetch_flag(&self) -> bool {
        self.prefetch
    }

    /// Packed byte `k` (counting the 16 counter bytes) of block `b`.
    #[inline(always)]
    fn byte(&self, b: usize, k: usize) -> u8 {
        (self.words.as_slice()[b * self.block.words() + k / 8] >> (8 * (k % 8))) as u8
    }

    /// Occurrences of base `c` (0..4) among the first `pos` BWT rows.
    ///
    /// # Panics
    /// If `c` is not a base code or `pos` exceeds the BWT length.
    #[inline]
    pub fn occ_base(&self, c: u8, pos: usize) -> usize {
        self.occ_scan(c, pos, |_| {})
    }

    /// [`occ_base`](Self::occ_base) that also lists every `(block, byte offset)` it read.
    pub fn occ_base_traced(&self, c: u8, pos: usize) -> (usize, Vec<(usize, usize)>) {
        let mut seen = Vec::new();
        let r = self.occ_scan(c, pos, |at| seen.push(at));
        (r, seen)
    }

    #[inline(always)]
    fn occ_scan<F: FnMut((usize, usize))>(&self, c: u8, pos: usize, mut inspect: F) -> usize {
        assert!(c < 4, "occ is defined for A, C, G, T only");
        assert!(pos <= self.len, "occ position {pos} out of range");
        let per_block = self.block.symbols();
        let (b, r) = (pos / per_block, pos % per_block);
        if b == self.num_blocks() {
            return self.totals[c as usize] as usize;
        }
        let header = self.words.as_slice()[b * self.block.words() + (c as usize >> 1)];
        inspect((b, 4 * c as usize));
        let mut total = (header >> (32 * (c as usize & 1))) as u32 as usize;
        let (full, tail) = (r / 3, r % 3);
        for k in 0..full {
            inspect((b, 16 + k));
            total += LUT.full[self.byte(b, 16 + k) as usize][c as usize] as usize;
        }
        if tail > 0 {
            inspect((b, 16 + full));
            let byte = self.byte(b, 16 + full) as usize;
            total += if tail == 1 { LUT.prefix1[byte][c as usize] } else { LUT.prefix2[byte][c as usize] } as usize;
        }
        total
    }

    pub fn size_bytes_exact(&self) -> usize {
        self.words.size_bytes() + 6 * 8
    }
}

impl OccProvider for FmDummy3Index {
    fn bwt_len(&self) -> usize {
        self.len
    }

    #[inline]
    fn c(&self, sym: u8) -> usize {
        self.c.get(sym)
    }

    #[inline]
    fn occ(&self, sym: u8, pos: usize) -> usize {
        self.occ_base(sym, pos)
    }

    fn prefetch_enabled(&self) -> bool {
        self.prefetch
    }

    fn prefetch(&self, _sym: u8, pos: usize) {
        self.words.prefetch(pos / self.block.symbols() * self.block.words());
    }
}

impl FmIndex for FmDummy3Index {
    fn query_symbols<'p>(&self, pattern: &'p [u8]) -> Result<Option<Cow<'p, [u8]>>, QueryError> {
        pattern
            .iter()
            .map(|&b| match dna_code(b) {
                N => Err(QueryError::InvalidDnaSymbol(b)),
                code => Ok(code),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(|v| Some(Cow::Owned(v)))
    }

    fn size_bytes(&self) -> usize {
        self.size_bytes_exact()
    }
}
