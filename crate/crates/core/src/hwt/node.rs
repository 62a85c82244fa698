//! Digit sequences stored at wavelet-tree nodes.
//!
//! Quaternary and octal nodes use blocks of `arity` 32-bit counters followed
//! by packed digits: 32 two-bit digits per 64-bit word, or 21 three-bit
//! digits in the low 63 bits of a word. Digit `k` of a word occupies bits
//! `k*w .. k*w + w` for digit width `w`.

use crate::aligned::AlignedWords;
use crate::rank::{InterleavedRankVector, NoProbe, RankLayout, RankProbe, RankVectorBuilder};

/// Block size of packed digit nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwtBlock {
    Bits512,
    Bits1024,
}

impl HwtBlock {
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
}

/// Per-arity word geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lanes {
    width: u32,
    per_word: usize,
    lsb: u64,
}

impl Lanes {
    fn of(arity: usize) -> Self {
        match arity {
            4 => Lanes { width: 2, per_word: 32, lsb: 0x5555_5555_5555_5555 },
            8 => Lanes { width: 3, per_word: 21, lsb: 0x1249_2492_4924_9249 },
            _ => panic!("packed nodes have arity 4 or 8, got {arity}"),
        }
    }

    /// Number of the first `q` lanes of `word` that hold `digit`.
    #[inline(always)]
    fn count_eq(self, word: u64, digit: u8, q: usize) -> usize {
        let x = word ^ (digit as u64).wrapping_mul(self.lsb);
        let nonzero = match self.width {
            2 => (x | x >> 1) & self.lsb,
            _ => (x | x >> 1 | x >> 2) & self.lsb,
        };
        let bits = q * self.width as usize;
        let mask = if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 };
        q - (nonzero & mask).count_ones() as usize
    }
}

/// Packed digit sequence with interleaved per-digit counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedDigits {
    arity: usize,
    block: HwtBlock,
    len: usize,
    totals: [u32; 8],
    words: AlignedWords,
}

impl PackedDigits {
    pub fn new(digits: &[u8], arity: usize, block: HwtBlock) -> Self {
        assert!(digits.len() <= u32::MAX as usize, "node too long for 32-bit counters");
        let lanes = Lanes::of(arity);
        let (cw, wpb) = (arity / 2, block.words());
        let per_block = (wpb - cw) * lanes.per_word;
        let blocks = digits.len().div_ceil(per_block);
        let mut words = AlignedWords::zeroed(blocks * wpb);
        let slice = words.as_mut_slice();
        let mut totals = [0u32; 8];
        for (b, chunk) in digits.chunks(per_block).enumerate() {
            let base = b * wpb;
            for (d, &t) in totals.iter().enumerate().take(arity) {
                slice[base + d / 2] |= (t as u64) << (32 * (d % 2));
            }
            for (k, &digit) in chunk.iter().enumerate() {
                assert!((digit as usize) < arity, "digit {digit} out of range");
                let (w, lane) = (k / lanes.per_word, k % lanes.per_word);
                slice[base + cw + w] |= (digit as u64) << (lane as u32 * lanes.width);
                totals[digit as usize] += 1;
            }
        }
        Self { arity, block, len: digits.len(), totals, words }
    }

    /// Adopts a stored block array; `None` unless it is exactly what
    /// [`new`](Self::new) would produce for its own digits.
    pub(crate) fn from_raw(arity: usize, block: HwtBlock, len: usize, words: AlignedWords) -> Option<Self> {
        if !matches!(arity, 4 | 8) {
            return None;
        }
        let p = Self { arity, block, len, totals: [0; 8], words };
        if p.words.len() != p.num_blocks() * block.words() {
            return None;
        }
        let digits: Vec<u8> = (0..len).map(|i| p.get(i)).collect();
        let rebuilt = Self::new(&digits, arity, block);
        (rebuilt.words == p.words).then_some(rebuilt)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn block(&self) -> HwtBlock {
        self.block
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn digits_per_block(&self) -> usize {
        (self.block.words() - self.arity / 2) * Lanes::of(self.arity).per_word
    }

    pub fn num_blocks(&self) -> usize {
        self.len.div_ceil(self.digits_per_block())
    }

    pub fn raw_words(&self) -> &[u64] {
        self.words.as_slice()
    }

    pub fn size_bytes(&self) -> usize {
        self.words.size_bytes()
    }

    fn counter(&self, b: usize, d: usize) -> usize {
        (self.words.as_slice()[b * self.block.words() + d / 2] >> (32 * (d % 2))) as u32 as usize
    }

    pub fn get(&self, i: usize) -> u8 {
        assert!(i < self.len);
        let lanes = Lanes::of(self.arity);
        let per_block = self.digits_per_block();
        let (b, r) = (i / per_block, i % per_block);
        let w = self.words.as_slice()[b * self.block.words() + self.arity / 2 + r / lanes.per_word];
        ((w >> ((r % lanes.per_word) as u32 * lanes.width)) & ((1 << lanes.width) - 1)) as u8
    }

    #[inline(always)]
    fn scan<P: RankProbe>(&self, b: usize, d: u8, r: usize, lanes: Lanes, probe: &mut P) -> usize {
        let base = b * self.block.words() + self.arity / 2;
        let words = self.words.as_slice();
        let (full, rem) = (r / lanes.per_word, r % lanes.per_word);
        let mut total = 0;
        for k in 0..full {
            probe.word(base + k);
            probe.popcount();
            total += lanes.count_eq(words[base + k], d, lanes.per_word);
        }
        if rem > 0 {
            probe.word(base + full);
            probe.popcount();
            total += lanes.count_eq(words[base + full], d, rem);
        }
        total
    }

    #[inline]
    pub fn digit_rank(&self, d: u8, pos: usize) -> usize {
        self.digit_rank_probed(d, pos, &mut NoProbe)
    }

    pub fn digit_rank_probed<P: RankProbe>(&self, d: u8, pos: usize, probe: &mut P) -> usize {
        assert!((d as usize) < self.arity, "digit {d} out of range");
        assert!(pos <= self.len, "position {pos} out of range");
        let lanes = Lanes::of(self.arity);
        let per_block = self.digits_per_block();
        let (b, r) = (pos / per_block, pos % per_block);
        if b == self.num_blocks() {
            return self.totals[d as usize] as usize;
        }
        probe.word(b * self.block.words() + d as usize / 2);
        self.counter(b, d as usize) + self.scan(b, d, r, lanes, probe)
    }

    pub fn prefetch(&self, pos: usize) {
        self.words.prefetch(pos / self.digits_per_block() * self.block.words());
    }
}

/// The digit sequence of one internal node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HwtNode {
    /// Binary node: the bit vector of digit-1 positions.
    Binary(InterleavedRankVector),
    Packed(PackedDigits),
}

impl HwtNode {
    pub fn new(digits: &[u8], arity: usize, block: HwtBlock) -> Self {
        if arity == 2 {
            let mut b = RankVectorBuilder::new(digits.len(), RankLayout::Sub512);
            for (i, &d) in digits.iter().enumerate() {
                assert!(d < 2, "digit {d} out of range");
                if d == 1 {
                    b.set(i);
                }
            }
            HwtNode::Binary(b.finish())
        } else {
            HwtNode::Packed(PackedDigits::new(digits, arity, block))
        }
    }

    pub fn len(&self) -> usize {
        match self {
            HwtNode::Binary(v) => v.len(),
            HwtNode::Packed(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn digit_rank(&self, d: u8, pos: usize) -> usize {
        match self {
            HwtNode::Binary(v) => match d {
                0 => pos - v.rank1(pos),
                1 => v.rank1(pos),
                _ => panic!("digit {d} out of range for a binary node"),
            },
            HwtNode::Packed(p) => p.digit_rank(d, pos),
        }
    }

    pub fn size_bytes(&self) -> usize {
        match self {
            HwtNode::Binary(v) => v.size_bytes(),
            HwtNode::Packed(p) => p.size_bytes(),
        }
    }

    pub fn prefetch(&self, pos: usize) {
        match self {
            HwtNode::Binary(v) => v.prefetch(pos),
            HwtNode::Packed(p) => p.prefetch(pos),
        }
    }
}
