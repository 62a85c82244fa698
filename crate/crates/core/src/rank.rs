//! Rank over a bit vector interleaved with its block counters.
//!
//! Each block starts with a header (a 32- or 64-bit counter, or a 64-bit word
//! holding a narrower counter plus intra-block subcounts) followed by data
//! bits. The header counter of block `i` is the number of ones before the
//! block's first data bit. A rank query reads one block only; with 512-bit
//! blocks that is exactly one cache line.
//!
//! Bit `k` of a 64-bit data word is its `k`-th least significant bit. In the
//! 32-bit-counter layouts the counter occupies the low half of the first word
//! and the first 32 data bits its high half.
//!
//! Subcount header words (`256c`, `512c`) hold the counter in the low 48 or
//! 40 bits and the subcount bytes above it:
//!
//! | layout | bits 0..   | byte 5        | byte 6                 | byte 7                  |
//! |--------|------------|---------------|------------------------|-------------------------|
//! | `256c` | counter:48 | (counter)     | ones in data[0..64)    | ones in data[0..128)    |
//! | `512c` | counter:40 | ones in [0..128) | ones in [128..256)  | ones in [256..384)      |

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::aligned::{AlignedWords, CACHE_LINE_BYTES};

/// Block organisation of an [`InterleavedRankVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankLayout {
    /// 512-bit blocks, 64-bit counter, 448 data bits.
    Plain512x64,
    /// 512-bit blocks, 32-bit counter, 480 data bits.
    Plain512x32,
    /// 256-bit blocks, 64-bit counter, 192 data bits.
    Plain256x64,
    /// 256-bit blocks, 32-bit counter, 224 data bits.
    Plain256x32,
    /// 256-bit blocks, 48-bit counter and two cumulative subcount bytes.
    Sub256,
    /// 512-bit blocks, 40-bit counter and three per-subblock count bytes.
    Sub512,
}

impl RankLayout {
    pub const ALL: [RankLayout; 6] = [
        RankLayout::Plain512x64,
        RankLayout::Plain512x32,
        RankLayout::Plain256x64,
        RankLayout::Plain256x32,
        RankLayout::Sub256,
        RankLayout::Sub512,
    ];

    /// Resolves `(block_bits, counter_bits, subcounts)`; the subcount
    /// layouts take their counter width from the block size.
    pub fn from_parts(block_bits: u32, counter_bits: Option<u32>, subcounts: bool) -> Option<Self> {
        use RankLayout::*;
        match (block_bits, counter_bits, subcounts) {
            (512, Some(64) | None, false) => Some(Plain512x64),
            (512, Some(32), false) => Some(Plain512x32),
            (256, Some(64) | None, false) => Some(Plain256x64),
            (256, Some(32), false) => Some(Plain256x32),
            (256, Some(48) | None, true) => Some(Sub256),
            (512, Some(40) | None, true) => Some(Sub512),
            _ => None,
        }
    }

    pub fn block_bits(self) -> usize {
        match self {
            Self::Plain512x64 | Self::Plain512x32 | Self::Sub512 => 512,
            Self::Plain256x64 | Self::Plain256x32 | Self::Sub256 => 256,
        }
    }

    pub fn words_per_block(self) -> usize {
        self.block_bits() / 64
    }

    pub fn header_bits(self) -> usize {
        match self {
            Self::Plain512x32 | Self::Plain256x32 => 32,
            _ => 64,
        }
    }

    /// Width of the main counter.
    pub fn counter_bits(self) -> u32 {
        match self {
            Self::Plain512x64 | Self::Plain256x64 => 64,
            Self::Plain512x32 | Self::Plain256x32 => 32,
            Self::Sub256 => 48,
            Self::Sub512 => 40,
        }
    }

    pub fn has_subcounts(self) -> bool {
        matches!(self, Self::Sub256 | Self::Sub512)
    }

    pub fn data_bits(self) -> usize {
        self.block_bits() - self.header_bits()
    }

    /// Header bits per data bit, as an exact fraction.
    pub fn overhead_ratio(self) -> Ratio<u64> {
        Ratio::new(self.header_bits() as u64, self.data_bits() as u64)
    }

    /// `(block index, offset within block data)` of logical bit `j`.
    #[inline]
    pub fn locate(self, j: usize) -> (usize, usize) {
        match self {
            Self::Plain512x64 | Self::Sub512 => (j / 448, j % 448),
            Self::Plain512x32 => (j / 480, j % 480),
            Self::Plain256x64 | Self::Sub256 => (j / 192, j % 192),
            Self::Plain256x32 => (j / 224, j % 224),
        }
    }

    pub(crate) fn id(self) -> u8 {
        match self {
            Self::Plain512x64 => 1,
            Self::Plain512x32 => 2,
            Self::Plain256x64 => 3,
            Self::Plain256x32 => 4,
            Self::Sub256 => 5,
            Self::Sub512 => 6,
        }
    }

    pub(crate) fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.id() == id)
    }

    fn counter_mask(self) -> u64 {
        match self.counter_bits() {
            64 => u64::MAX,
            bits => (1u64 << bits) - 1,
        }
    }
}

impl fmt::Display for RankLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Plain512x64 => "512/64",
            Self::Plain512x32 => "512/32",
            Self::Plain256x64 => "256/64",
            Self::Plain256x32 => "256/32",
            Self::Sub256 => "256c",
            Self::Sub512 => "512c",
        };
        f.write_str(s)
    }
}

impl FromStr for RankLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.to_string() == s)
            .ok_or_else(|| format!("unknown rank layout `{s}`"))
    }
}

/// Observer of the memory traffic of a rank query.
pub trait RankProbe {
    fn word(&mut self, index: usize);
    fn popcount(&mut self);
}

pub(crate) struct NoProbe;

impl RankProbe for NoProbe {
    #[inline(always)]
    fn word(&mut self, _: usize) {}
    #[inline(always)]
    fn popcount(&mut self) {}
}

/// Words read and population counts executed by one traced rank query.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RankTrace {
    pub words: Vec<usize>,
    pub popcounts: u32,
}

impl RankProbe for RankTrace {
    fn word(&mut self, index: usize) {
        self.words.push(index);
    }
    fn popcount(&mut self) {
        self.popcounts += 1;
    }
}

#[inline(always)]
fn low_mask(bits: usize) -> u64 {
    debug_assert!(bits < 64);
    (1u64 << bits) - 1
}

/// A bit vector with interleaved rank counters; see the module docs.
#[derive(Clone, PartialEq, Eq)]
pub struct InterleavedRankVector {
    layout: RankLayout,
    len: usize,
    ones: usize,
    words: AlignedWords,
}

/// Collects bits for an [`InterleavedRankVector`] before its counters exist.
pub struct RankVectorBuilder {
    layout: RankLayout,
    len: usize,
    words: AlignedWords,
}

impl RankVectorBuilder {
    pub fn new(len: usize, layout: RankLayout) -> Self {
        let blocks = len.div_ceil(layout.data_bits());
        Self { layout, len, words: AlignedWords::zeroed(blocks * layout.words_per_block()) }
    }

    #[inline]
    fn bit_address(&self, i: usize) -> (usize, usize) {
        let (block, r) = self.layout.locate(i);
        let bit = self.layout.header_bits() + r;
        (block * self.layout.words_per_block() + bit / 64, bit % 64)
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range");
        let (w, b) = self.bit_address(i);
        self.words.as_mut_slice()[w] |= 1 << b;
    }

    pub fn finish(self) -> InterleavedRankVector {
        let Self { layout, len, mut words } = self;
        let ones = fill_headers(layout, words.as_mut_slice());
        InterleavedRankVector { layout, len, ones, words }
    }
}

/// Writes every block header from the data bits; returns the total ones.
fn fill_headers(layout: RankLayout, words: &mut [u64]) -> usize {
    let mut ones = 0usize;
    for block in words.chunks_exact_mut(layout.words_per_block()) {
        assert!(
            (ones as u64) <= layout.counter_mask(),
            "{} ones overflow the {}-bit counter",
            ones,
            layout.counter_bits()
        );
        let pc = |i: usize| block[i].count_ones() as u64;
        let mut header = ones as u64;
        match layout {
            RankLayout::Sub256 => {
                header |= pc(1) << 48;
                header |= (pc(1) + pc(2)) << 56;
            }
            RankLayout::Sub512 => {
                for s in 0..3 {
                    header |= (pc(1 + 2 * s) + pc(2 + 2 * s)) << (40 + 8 * s);
                }
            }
            _ => {}
        }
        ones += block_data_ones(layout, block);
        if layout.header_bits() == 32 {
            block[0] = (block[0] & !0xffff_ffff) | header;
        } else {
            block[0] = header;
        }
    }
    ones
}

/// Ones stored in the data part of one block.
fn block_data_ones(layout: RankLayout, block: &[u64]) -> usize {
    let head = if layout.header_bits() == 32 { (block[0] >> 32).count_ones() } else { 0 };
    (head + block[1..].iter().map(|w| w.count_ones()).sum::<u32>()) as usize
}

impl InterleavedRankVector {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I, layout: RankLayout) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut b = RankVectorBuilder::new(bits.len(), layout);
        for (i, _) in bits.iter().enumerate().filter(|(_, &x)| x) {
            b.set(i);
        }
        b.finish()
    }

    pub fn layout(&self) -> RankLayout {
        self.layout
    }

    /// Number of logical bits.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn num_blocks(&self) -> usize {
        self.words.len() / self.layout.words_per_block()
    }

    pub fn raw_words(&self) -> &[u64] {
        self.words.as_slice()
    }

    pub fn storage_addr(&self) -> usize {
        self.words.base_addr()
    }

    pub fn size_bytes(&self) -> usize {
        self.words.size_bytes()
    }

    /// Main counter of block `b`.
    pub fn block_counter(&self, b: usize) -> u64 {
        self.words.as_slice()[b * self.layout.words_per_block()] & self.layout.counter_mask()
    }

    /// Subcount bytes of block `b` (empty for plain layouts).
    pub fn block_subcounts(&self, b: usize) -> Vec<u8> {
        let header = self.words.as_slice()[b * self.layout.words_per_block()];
        match self.layout {
            RankLayout::Sub256 => vec![(header >> 48) as u8, (header >> 56) as u8],
            RankLayout::Sub512 => (0..3).map(|s| (header >> (40 + 8 * s)) as u8).collect(),
            _ => Vec::new(),
        }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range");
        let (block, r) = self.layout.locate(i);
        let bit = self.layout.header_bits() + r;
        let w = self.words.as_slice()[block * self.layout.words_per_block() + bit / 64];
        (w >> (bit % 64)) & 1 == 1
    }

    /// Number of ones among logical positions `0..j`.
    ///
    /// # Panics
    /// If `j > self.len()`.
    #[inline]
    pub fn rank1(&self, j: usize) -> usize {
        self.rank_probed(j, &mut NoProbe)
    }

    /// [`rank1`](Self::rank1) that also reports which words it read.
    pub fn rank1_traced(&self, j: usize) -> (usize, RankTrace) {
        let mut trace = RankTrace::default();
        let r = self.rank_probed(j, &mut trace);
        (r, trace)
    }

    /// Prefetch the block that a later `rank1(j)` will read.
    #[inline]
    pub fn prefetch(&self, j: usize) {
        let (block, _) = self.layout.locate(j);
        self.words.prefetch(block * self.layout.words_per_block());
    }

    #[inline]
    fn rank_probed<P: RankProbe>(&self, j: usize, probe: &mut P) -> usize {
        assert!(j <= self.len, "rank position {j} out of range (len {})", self.len);
        let (block, r) = self.layout.locate(j);
        if block == self.num_blocks() {
            // j == len on a block boundary: nothing left to scan.
            return self.ones;
        }
        let base = block * self.layout.words_per_block();
        let words = self.words.as_slice();
        let mut read = |i: usize, probe: &mut P| {
            probe.word(base + i);
            words[base + i]
        };
        let header = read(0, probe);
        let counter = (header & self.layout.counter_mask()) as usize;
        match self.layout {
            RankLayout::Plain512x64 | RankLayout::Plain256x64 => {
                counter + scan_words(r, 1, &mut read, probe)
            }
            RankLayout::Plain512x32 | RankLayout::Plain256x32 => {
                let head = r.min(32);
                let mut total = counter;
                if head > 0 {
                    probe.popcount();
                    total += (((header >> 32) as u32) & (low_mask(head) as u32)).count_ones() as usize;
                }
                if r > 32 {
                    total += scan_words(r - 32, 1, &mut read, probe);
                }
                total
            }
            RankLayout::Sub256 => {
                let w = r / 64;
                let sub = match w {
                    0 => 0,
                    1 => (header >> 48) & 0xff,
                    _ => header >> 56,
                } as usize;
                let rem = r % 64;
                let mut total = counter + sub;
                if rem > 0 {
                    probe.popcount();
                    total += (read(1 + w, probe) & low_mask(rem)).count_ones() as usize;
                }
                total
            }
            RankLayout::Sub512 => {
                let s = r / 128;
                let mut total = counter;
                for k in 0..s {
                    total += ((header >> (40 + 8 * k)) & 0xff) as usize;
                }
                total + scan_words(r % 128, 1 + 2 * s, &mut read, probe)
            }
        }
    }

    /// Adopts a stored block array; `None` unless its headers match its data
    /// and the bits past `len` are clear.
    pub(crate) fn from_raw(layout: RankLayout, len: usize, words: AlignedWords) -> Option<Self> {
        let blocks = len.div_ceil(layout.data_bits());
        if words.len() != blocks * layout.words_per_block() || len as u64 > layout.counter_mask() {
            return None;
        }
        let mut check = words.clone();
        let ones = fill_headers(layout, check.as_mut_slice());
        let rv = Self { layout, len, ones, words };
        if check != rv.words {
            return None;
        }
        // Any set padding bit would make the total exceed rank at `len`.
        (rv.rank1(len) == ones).then_some(rv)
    }
}

/// Popcount of the first `bits` data bits starting at block word `first`.
#[inline(always)]
fn scan_words<P: RankProbe, F: FnMut(usize, &mut P) -> u64>(
    bits: usize,
    first: usize,
    read: &mut F,
    probe: &mut P,
) -> usize {
    let full = bits / 64;
    let mut total = 0;
    for k in 0..full {
        probe.popcount();
        total += read(first + k, probe).count_ones() as usize;
    }
    let rem = bits % 64;
    if rem > 0 {
        probe.popcount();
        total += (read(first + full, probe) & low_mask(rem)).count_ones() as usize;
    }
    total
}

impl fmt::Debug for InterleavedRankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InterleavedRankVector")
            .field("layout", &self.layout)
            .field("len", &self.len)
            .field("ones", &self.ones)
            .finish()
    }
}

/// True when every word in `trace` lies in one block of `rv`, and for
/// 512-bit blocks in one 64-byte aligned region.
pub fn trace_within_one_block(rv: &InterleavedRankVector, trace: &RankTrace) -> bool {
    let wpb = rv.layout().words_per_block();
    let Some(&first) = trace.words.first() else {
        return true;
    };
    let block = first / wpb;
    let line = |w: usize| (rv.storage_addr() + w * 8) / CACHE_LINE_BYTES;
    trace.words.iter().all(|&w| w / wpb == block)
        && (rv.layout().block_bits() != 512 || trace.words.iter().all(|&w| line(w) == line(first)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn naive_rank(bits: &[bool], j: usize) -> usize {
        bits[..j].iter().filter(|&&b| b).count()
    }

    #[test]
    fn layout_arithmetic() {
        use RankLayout::*;
        let data: Vec<usize> = RankLayout::ALL.iter().map(|l| l.data_bits()).collect();
        assert_eq!(data, vec![448, 480, 192, 224, 192, 448]);
        assert_eq!(Plain512x64.overhead_ratio(), Ratio::new(64, 448));
        assert_eq!(Plain512x32.overhead_ratio(), Ratio::new(32, 480));
        assert_eq!(Plain256x64.overhead_ratio(), Ratio::new(64, 192));
        assert_eq!(Plain256x32.overhead_ratio(), Ratio::new(32, 224));
        assert_eq!(RankLayout::from_parts(256, None, true), Some(Sub256));
        assert_eq!(RankLayout::from_parts(512, Some(32), true), None);
        assert_eq!(RankLayout::from_parts(1024, Some(64), false), None);
        for l in RankLayout::ALL {
            assert_eq!(l.to_string().parse::<RankLayout>().unwrap(), l);
            assert_eq!(RankLayout::from_id(l.id()), Some(l));
        }
    }

    #[test]
    fn two_block_counter() {
        let bits: Vec<bool> = (0..896).map(|i| i < 448).collect();
        let rv = InterleavedRankVector::from_bits(bits, RankLayout::Plain512x64);
        assert_eq!(rv.num_blocks(), 2);
        assert_eq!(rv.block_counter(0), 0);
        assert_eq!(rv.block_counter(1), 448);
        assert_eq!(rv.rank1(896), 448);
    }

    #[test]
    fn short_vector_single_block() {
        let rv = InterleavedRankVector::from_bits(vec![true; 10], RankLayout::Plain512x64);
        assert_eq!(rv.num_blocks(), 1);
        assert_eq!(rv.block_counter(0), 0);
        assert_eq!(rv.rank1(10), 10);
    }

    #[test]
    fn sub256_prefix_counts() {
        let rv = InterleavedRankVector::from_bits(vec![true; 300], RankLayout::Sub256);
        assert_eq!(rv.block_subcounts(0), vec![64, 128]);
        assert_eq!(rv.block_counter(1), 192);
    }

    #[test]
    fn sub512_per_subblock_counts() {
        let bits: Vec<bool> = (0..448).map(|i| i % 2 == 0 || i >= 256).collect();
        let rv = InterleavedRankVector::from_bits(bits, RankLayout::Sub512);
        assert_eq!(rv.block_subcounts(0), vec![64, 64, 128]);
    }

    #[test]
    fn alternating_bits() {
        for layout in RankLayout::ALL {
            let rv = InterleavedRankVector::from_bits((0..1000).map(|i| i % 2 == 1), layout);
            assert_eq!(rv.rank1(0), 0);
            assert_eq!(rv.rank1(1000), 500, "{layout}");
        }
    }

    #[test]
    fn empty_vector() {
        for layout in RankLayout::ALL {
            let rv = InterleavedRankVector::from_bits(std::iter::empty(), layout);
            assert_eq!(rv.rank1(0), 0);
            assert_eq!(rv.num_blocks(), 0);
        }
    }

    #[test]
    #[should_panic]
    fn rank_out_of_range_panics() {
        let rv = InterleavedRankVector::from_bits(vec![true; 10], RankLayout::Sub512);
        rv.rank1(11);
    }

    #[test]
    fn trailing_bits_are_zero() {
        for layout in RankLayout::ALL {
            let rv = InterleavedRankVector::from_bits(vec![true; 100], layout);
            let total: u32 = rv
                .raw_words()
                .chunks(layout.words_per_block())
                .map(|b| {
                    let head = if layout.header_bits() == 32 { (b[0] >> 32).count_ones() } else { 0 };
                    head + b[1..].iter().map(|w| w.count_ones()).sum::<u32>()
                })
                .sum();
            assert_eq!(total, 100);
        }
    }

    #[test]
    fn random_vector_against_naive() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let bits: Vec<bool> = (0..100_000).map(|_| rng.random_bool(0.3)).collect();
        let mut prefix = vec![0usize; bits.len() + 1];
        for (i, &b) in bits.iter().enumerate() {
            prefix[i + 1] = prefix[i] + b as usize;
        }
        for layout in RankLayout::ALL {
            let rv = InterleavedRankVector::from_bits(bits.iter().copied(), layout);
            assert_eq!(rv.storage_addr() % 64, 0);
            for _ in 0..2000 {
                let j = rng.random_range(0..=bits.len());
                assert_eq!(rv.rank1(j), prefix[j]);
            }
        }
    }

    #[test]
    fn popcount_ceilings() {
        let bits: Vec<bool> = (0..2000).map(|i| (i * 7) % 5 < 3).collect();
        let limits = [
            (RankLayout::Plain512x64, 7),
            (RankLayout::Plain512x32, 8),
            (RankLayout::Plain256x64, 3),
            (RankLayout::Plain256x32, 4),
            (RankLayout::Sub256, 1),
            (RankLayout::Sub512, 2),
        ];
        for (layout, max) in limits {
            let rv = InterleavedRankVector::from_bits(bits.iter().copied(), layout);
            let worst = (0..=bits.len()).map(|j| rv.rank1_traced(j).1.popcounts).max().unwrap();
            assert_eq!(worst, max, "{layout}");
        }
    }

    #[test]
    fn locate_matches_division() {
        for layout in RankLayout::ALL {
            let d = layout.data_bits();
            for j in (0..100_000).step_by(7) {
                assert_eq!(layout.locate(j), (j / d, j % d));
            }
        }
    }

    #[test]
    fn from_raw_restores_vector() {
        for layout in RankLayout::ALL {
            for len in [0, 5, 192, 448, 1000] {
                let rv = InterleavedRankVector::from_bits((0..len).map(|i| i % 3 == 0), layout);
                let back = InterleavedRankVector::from_raw(
                    layout,
                    len,
                    AlignedWords::from_words(rv.raw_words()),
                )
                .unwrap();
                assert_eq!(back, rv);
            }
        }
    }

    #[test]
    fn from_raw_rejects_inconsistent_blocks() {
        let rv = InterleavedRankVector::from_bits((0..1000).map(|i| i % 3 == 0), RankLayout::Sub512);
        let mut words = rv.raw_words().to_vec();
        words[8] ^= 1; // second block counter
        assert!(InterleavedRankVector::from_raw(RankLayout::Sub512, 1000, AlignedWords::from_words(&words)).is_none());
        let mut words = rv.raw_words().to_vec();
        *words.last_mut().unwrap() |= 1 << 63; // padding bit
        assert!(InterleavedRankVector::from_raw(RankLayout::Sub512, 1000, AlignedWords::from_words(&words)).is_none());
    }

    proptest! {
        #[test]
        fn rank_matches_naive(bits in proptest::collection::vec(any::<bool>(), 0..1100), li in 0usize..6) {
            let layout = RankLayout::ALL[li];
            let rv = InterleavedRankVector::from_bits(bits.iter().copied(), layout);
            for j in 0..=bits.len() {
                let (r, trace) = rv.rank1_traced(j);
                prop_assert_eq!(r, naive_rank(&bits, j));
                prop_assert!(trace_within_one_block(&rv, &trace));
            }
        }
    }
}
