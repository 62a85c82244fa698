//! FM-index over a Huffman-shaped multiary wavelet tree.
//!
//! `Occ(c, pos)` walks the digit string of `c` from the root, replacing
//! `pos` by the rank of the next digit at each node.

use std::borrow::Cow;

mod huffman;
mod node;

pub use huffman::{Child, HuffmanShape, ShapeNode, SENTINEL};
pub use node::{HwtBlock, HwtNode, PackedDigits};

use crate::fm::{FmIndex, OccProvider, QueryError};
use crate::suffix::{bwt_of, Bwt, CArray};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmHwtIndex {
    shape: HuffmanShape,
    block: HwtBlock,
    nodes: Vec<HwtNode>,
    /// Per symbol: the `(node, digit)` steps of its root-to-leaf path.
    paths: Vec<Option<SymbolPath>>,
    c: CArray,
    prefetch: bool,
}

/// Leaf weights of a BWT: every byte frequency plus the sentinel once.
pub fn bwt_weights(c: &CArray) -> Vec<(u16, u64)> {
    let freqs = c.frequencies();
    std::iter::once((SENTINEL, 1))
        .chain((0..256u16).filter(|&v| freqs[v as usize] > 0).map(|v| (v, freqs[v as usize])))
        .collect()
}

impl FmHwtIndex {
    pub fn build(text: &[u8], arity: usize, block: HwtBlock) -> Self {
        let (_, bwt) = bwt_of(text);
        Self::from_bwt(&bwt, arity, block)
    }

    pub fn from_bwt(bwt: &Bwt, arity: usize, block: HwtBlock) -> Self {
        assert!(matches!(arity, 2 | 4 | 8), "arity must be 2, 4 or 8");
        assert!(bwt.len() <= u32::MAX as usize, "text too long for 32-bit node counters");
        let shape = HuffmanShape::build(&bwt_weights(&bwt.c), arity);
        let paths = paths_of(&shape);
        let mut digits: Vec<Vec<u8>> = vec![Vec::new(); shape.nodes().len()];
        for row in 0..bwt.len() {
            let sym = bwt.get(row).map_or(SENTINEL, u16::from);
            for &(node, d) in paths[sym as usize].as_deref().expect("every BWT symbol has a leaf") {
                digits[node as usize].push(d);
            }
        }
        let nodes = digits.iter().map(|d| HwtNode::new(d, arity, block)).collect();
        Self { shape, block, nodes, paths, c: bwt.c.clone(), prefetch: false }
    }

    pub(crate) fn from_parts(shape: HuffmanShape, block: HwtBlock, nodes: Vec<HwtNode>, c: CArray) -> Self {
        let paths = paths_of(&shape);
        Self { shape, block, nodes, paths, c, prefetch: false }
    }

    pub fn with_prefetch(mut self, on: bool) -> Self {
        self.prefetch = on;
        self
    }

    pub fn arity(&self) -> usize {
        self.shape.arity()
    }

    pub fn block(&self) -> HwtBlock {
        self.block
    }

    pub fn shape(&self) -> &HuffmanShape {
        &self.shape
    }

    pub fn nodes(&self) -> &[HwtNode] {
        &self.nodes
    }

    pub fn c_array(&self) -> &CArray {
        &self.c
    }

    pub fn prefetch_flag(&self) -> bool {
        self.prefetch
    }

    /// `(node, digit)` steps taken by `occ` for byte `sym`.
    pub fn path(&self, sym: u8) -> Option<&[(u32, u8)]> {
        self.paths[sym as usize].as_deref()
    }

    /// Bytes of the tree topology as serialized: per node one child tag byte
    /// and two symbol bytes per child.
    pub fn topology_bytes(&self) -> usize {
        self.shape.nodes().len() * self.arity() * 3
    }
}

/// `(node, digit)` steps from the root to a leaf.
type SymbolPath = Box<[(u32, u8)]>;

fn paths_of(shape: &HuffmanShape) -> Vec<Option<SymbolPath>> {
    let mut paths = vec![None; SENTINEL as usize + 1];
    let mut stack = vec![(0usize, Vec::<(u32, u8)>::new())];
    while let Some((id, prefix)) = stack.pop() {
        for (d, child) in shape.nodes()[id].children.iter().enumerate() {
            let mut p = prefix.clone();
            p.push((id as u32, d as u8));
            match *child {
                Child::Empty => {}
                Child::Leaf(s) => paths[s as usize] = Some(p.into_boxed_slice()),
                Child::Node(n) => stack.push((n, p)),
            }
        }
    }
    paths
}

impl OccProvider for FmHwtIndex {
    fn bwt_len(&self) -> usize {
        self.c.total()
    }

    #[inline]
    fn c(&self, sym: u8) -> usize {
        self.c.get(sym)
    }

    #[inline]
    fn occ(&self, sym: u8, pos: usize) -> usize {
        let Some(path) = self.paths[sym as usize].as_deref() else {
            return 0;
        };
        path.iter()
            .fold(pos, |p, &(node, d)| self.nodes[node as usize].digit_rank(d, p))
    }

    fn prefetch_enabled(&self) -> bool {
        self.prefetch
    }

    fn prefetch(&self, sym: u8, pos: usize) {
        if let Some(&(root, _)) = self.paths[sym as usize].as_deref().and_then(|p| p.first()) {
            self.nodes[root as usize].prefetch(pos);
        }
    }
}

impl FmIndex for FmHwtIndex {
    fn query_symbols<'p>(&self, pattern: &'p [u8]) -> Result<Option<Cow<'p, [u8]>>, QueryError> {
        if pattern.iter().all(|&b| self.c.frequency(b) > 0) {
            Ok(Some(Cow::Borrowed(pattern)))
        } else {
            Ok(None)
        }
    }

    fn size_bytes(&self) -> usize {
        self.nodes.iter().map(HwtNode::size_bytes).sum::<usize>() + self.topology_bytes() + 257 * 8
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suffix::{naive_count, naive_occ};

    fn sample_text(len: usize, sigma: u32) -> Vec<u8> {
        let mut x = 0x2545_f491_4f6c_dd1du64;
        (0..len)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                // Skewed distribution so the Huffman shape is uneven.
                let r = (x % (sigma as u64 * sigma as u64)) as f64;
                (r.sqrt() as u32 + 32) as u8
            })
            .collect()
    }

    #[test]
    fn root_sees_every_row_and_digits_add_up() {
        let text = sample_text(5000, 30);
        let (_, bwt) = bwt_of(&text);
        for arity in [2, 4, 8] {
            let idx = FmHwtIndex::from_bwt(&bwt, arity, HwtBlock::Bits512);
            assert_eq!(idx.nodes()[0].len(), text.len() + 1);
            let stored: usize = idx.nodes().iter().map(HwtNode::len).sum();
            let expected: usize = bwt_weights(&bwt.c)
                .iter()
                .map(|&(s, w)| w as usize * idx.shape().code(s).unwrap().len())
                .sum();
            assert_eq!(stored, expected);
        }
    }

    #[test]
    fn occ_matches_naive() {
        let text = sample_text(3000, 20);
        let (_, bwt) = bwt_of(&text);
        for arity in [2, 4, 8] {
            for block in [HwtBlock::Bits512, HwtBlock::Bits1024] {
                let idx = FmHwtIndex::from_bwt(&bwt, arity, block);
                for c in bwt.c.frequencies().iter().enumerate().filter(|(_, &f)| f > 0).map(|(c, _)| c as u8) {
                    assert_eq!(idx.path(c).unwrap().len(), idx.shape().code(c as u16).unwrap().len());
                    for pos in (0..=bwt.len()).step_by(7) {
                        assert_eq!(idx.occ(c, pos), naive_occ(&bwt, c, pos));
                    }
                    assert_eq!(idx.occ(c, 0), 0);
                }
                assert_eq!(idx.occ(1, 100), 0);
            }
        }
    }

    #[test]
    fn counts_match_naive() {
        let text = sample_text(4000, 40);
        for arity in [2, 4, 8] {
            let idx = FmHwtIndex::build(&text, arity, HwtBlock::Bits1024);
            for start in (0..3900).step_by(61) {
                for m in [1, 3, 8] {
                    let p = &text[start..start + m];
                    assert_eq!(idx.count(p).unwrap().occurrences(), naive_count(&text, p));
                }
            }
        }
    }

    #[test]
    fn single_symbol_text() {
        for arity in [2, 4, 8] {
            let idx = FmHwtIndex::build(b"zzzz", arity, HwtBlock::Bits512);
            assert_eq!(idx.count(b"zz").unwrap().occurrences(), 3);
            assert_eq!(idx.count(b"zzzzz").unwrap().occurrences(), 0);
        }
    }

    #[test]
    fn size_is_sum_of_parts() {
        let idx = FmHwtIndex::build(&sample_text(2000, 50), 8, HwtBlock::Bits512);
        let blocks: usize = idx
            .nodes()
            .iter()
            .map(|n| match n {
                HwtNode::Packed(p) => p.num_blocks() * 64,
                HwtNode::Binary(v) => v.num_blocks() * 64,
            })
            .sum();
        assert_eq!(idx.size_bytes(), blocks + idx.shape().nodes().len() * 8 * 3 + 257 * 8);
    }
}
