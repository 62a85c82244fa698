//! r-ary Huffman tree shapes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Symbol id of the BWT sentinel inside a wavelet tree (bytes are `0..256`).
pub const SENTINEL: u16 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Child {
    /// Digit value never produced by any symbol (padding leaf).
    Empty,
    Leaf(u16),
    Node(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeNode {
    pub children: Vec<Child>,
}

/// Topology of an r-ary Huffman tree; nodes are stored in preorder with the
/// root at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanShape {
    arity: usize,
    nodes: Vec<ShapeNode>,
    codes: Vec<Option<Vec<u8>>>,
}

impl HuffmanShape {
    /// Builds an optimal r-ary prefix code for `weights` (`(symbol, weight)`).
    ///
    /// Zero-weight padding leaves are added so every merge takes exactly
    /// `arity` nodes; they are created first and therefore merged first.
    /// Equal weights are resolved in favour of the earliest created node,
    /// with real leaves created in the order given.
    ///
    /// # Panics
    /// If `weights` is empty or `arity < 2`.
    pub fn build(weights: &[(u16, u64)], arity: usize) -> Self {
        assert!(arity >= 2, "arity must be at least 2");
        assert!(!weights.is_empty(), "at least one symbol is required");
        if weights.len() == 1 {
            let mut children = vec![Child::Empty; arity];
            children[0] = Child::Leaf(weights[0].0);
            return Self::from_nodes(arity, vec![ShapeNode { children }]);
        }

        enum Built {
            Dummy,
            Leaf(u16),
            Internal(Vec<usize>),
        }
        let mut built: Vec<Built> = Vec::new();
        let mut heap = BinaryHeap::new();
        let pad = (arity - 1 - (weights.len() - 1) % (arity - 1)) % (arity - 1);
        for _ in 0..pad {
            heap.push(Reverse((0u64, built.len())));
            built.push(Built::Dummy);
        }
        for &(sym, w) in weights {
            heap.push(Reverse((w, built.len())));
            built.push(Built::Leaf(sym));
        }
        while heap.len() > 1 {
            let mut total = 0u64;
            let mut kids = Vec::with_capacity(arity);
            for _ in 0..arity {
                let Reverse((w, id)) = heap.pop().expect("padding keeps merges full");
                total += w;
                kids.push(id);
            }
            heap.push(Reverse((total, built.len())));
            built.push(Built::Internal(kids));
        }
        let Reverse((_, root)) = heap.pop().unwrap();

        // Re-number internal nodes in preorder.
        fn emit(built: &[Built], id: usize, nodes: &mut Vec<ShapeNode>) -> usize {
            let Built::Internal(kids) = &built[id] else { unreachable!() };
            let me = nodes.len();
            nodes.push(ShapeNode { children: Vec::new() });
            let children = kids
                .iter()
                .map(|&k| match &built[k] {
                    Built::Dummy => Child::Empty,
                    Built::Leaf(s) => Child::Leaf(*s),
                    Built::Internal(_) => Child::Node(emit(built, k, nodes)),
                })
                .collect();
            nodes[me].children = children;
            me
        }
        let mut nodes = Vec::new();
        emit(&built, root, &mut nodes);
        Self::from_nodes(arity, nodes)
    }

    /// Rebuilds a shape from preorder nodes; `None` if the topology is not a
    /// tree rooted at node 0 with each symbol on exactly one leaf.
    pub fn from_nodes(arity: usize, nodes: Vec<ShapeNode>) -> Self {
        Self::try_from_nodes(arity, nodes).expect("invalid tree topology")
    }

    pub fn try_from_nodes(arity: usize, nodes: Vec<ShapeNode>) -> Option<Self> {
        let mut codes: Vec<Option<Vec<u8>>> = vec![None; SENTINEL as usize + 1];
        let mut visited = vec![false; nodes.len()];
        let mut stack = vec![(0usize, Vec::new())];
        if nodes.is_empty() {
            return None;
        }
        while let Some((id, prefix)) = stack.pop() {
            if std::mem::replace(visited.get_mut(id)?, true) {
                return None;
            }
            if nodes[id].children.len() != arity {
                return None;
            }
            for (digit, child) in nodes[id].children.iter().enumerate() {
                let mut path = prefix.clone();
                path.push(digit as u8);
                match *child {
                    Child::Empty => {}
                    Child::Leaf(s) => {
                        let slot = codes.get_mut(s as usize)?;
                        if slot.is_some() {
                            return None;
                        }
                        *slot = Some(path);
                    }
                    Child::Node(n) => stack.push((n, path)),
                }
            }
        }
        visited.iter().all(|&v| v).then_some(Self { arity, nodes, codes })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[ShapeNode] {
        &self.nodes
    }

    /// Root-to-leaf digit string of `sym`.
    pub fn code(&self, sym: u16) -> Option<&[u8]> {
        self.codes.get(sym as usize)?.as_deref()
    }

    /// Σ weight × code length.
    pub fn cost(&self, weights: &[(u16, u64)]) -> u64 {
        weights.iter().map(|&(s, w)| w * self.code(s).map_or(0, |c| c.len()) as u64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimum Σ w·len over all length vectors satisfying Kraft's
    /// inequality for `arity` (every such vector has a prefix code).
    pub(crate) fn brute_optimal_cost(weights: &[u64], arity: u64) -> u64 {
        let n = weights.len();
        let max_len = n.max(1) as u32;
        let cap = arity.pow(max_len);
        let mut best = u64::MAX;
        let mut lens = vec![1u32; n];
        loop {
            let kraft: u64 = lens.iter().map(|&l| arity.pow(max_len - l)).sum();
            if kraft <= cap {
                best = best.min(weights.iter().zip(&lens).map(|(&w, &l)| w * l as u64).sum());
            }
            let mut i = 0;
            while i < n && lens[i] == max_len {
                lens[i] = 1;
                i += 1;
            }
            if i == n {
                return best;
            }
            lens[i] += 1;
        }
    }

    fn weights(ws: &[u64]) -> Vec<(u16, u64)> {
        ws.iter().enumerate().map(|(i, &w)| (i as u16, w)).collect()
    }

    #[test]
    fn single_symbol_gets_one_digit() {
        for r in [2, 4, 8] {
            let shape = HuffmanShape::build(&[(7, 3)], r);
            assert_eq!(shape.code(7), Some(&[0u8][..]));
            assert_eq!(shape.nodes().len(), 1);
        }
    }

    #[test]
    fn four_equal_symbols_in_one_quaternary_node() {
        let shape = HuffmanShape::build(&weights(&[5, 5, 5, 5]), 4);
        assert_eq!(shape.nodes().len(), 1);
        for s in 0..4 {
            assert_eq!(shape.code(s).unwrap().len(), 1);
        }
    }

    #[test]
    fn binary_cost_is_optimal() {
        let w = [4, 3, 2, 1, 1];
        let shape = HuffmanShape::build(&weights(&w), 2);
        assert_eq!(shape.cost(&weights(&w)), brute_optimal_cost(&w, 2));
        assert_eq!(shape.cost(&weights(&w)), 24);
    }

    #[test]
    fn codes_are_prefix_free() {
        let w: Vec<u64> = (1..=40).map(|i| (i * i) % 17 + 1).collect();
        for r in [2, 4, 8] {
            let shape = HuffmanShape::build(&weights(&w), r);
            let codes: Vec<&[u8]> = (0..40).map(|s| shape.code(s).unwrap()).collect();
            for (i, a) in codes.iter().enumerate() {
                for (j, b) in codes.iter().enumerate() {
                    assert!(i == j || !b.starts_with(a));
                }
            }
        }
    }

    #[test]
    fn rejects_broken_topologies() {
        let leaf = |s| ShapeNode { children: vec![Child::Leaf(s), Child::Empty] };
        assert!(HuffmanShape::try_from_nodes(2, vec![leaf(1), leaf(2)]).is_none());
        let dup = ShapeNode { children: vec![Child::Leaf(1), Child::Leaf(1)] };
        assert!(HuffmanShape::try_from_nodes(2, vec![dup]).is_none());
        let cyc = ShapeNode { children: vec![Child::Node(0), Child::Leaf(1)] };
        assert!(HuffmanShape::try_from_nodes(2, vec![cyc]).is_none());
    }
}
