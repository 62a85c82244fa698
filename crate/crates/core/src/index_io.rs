//! Single-file serialization of an [`Index`].
//!
//! Layout (all integers little-endian; see `docs/index-format.md`):
//!
//! ```text
//! "FMDX" | version u8 | variant u8 | file_length u64 | n u64 | bwt_length u64
//! | parameter block | corpus name | section count u32 | sections... | crc32 u32
//! ```
//!
//! Each section is `kind u32 | aux u64 | payload_len u64`, zero padding up to
//! the next multiple of 64 in file offset, then the payload. The CRC-32
//! covers every byte after the first six, up to the trailer.

use std::io;
use std::path::Path;

use thiserror::Error;

use crate::aligned::AlignedWords;
use crate::dense_code::{CodeFamily, DenseCode, DenseCodeParams};
use crate::dummy3::{Dna3Block, FmDummy3Index};
use crate::fm::{FmDummy1Index, FmDummy2Index, OccProvider};
use crate::hash_boost::KGramTable;
use crate::hwt::{Child, FmHwtIndex, HuffmanShape, HwtBlock, HwtNode, PackedDigits, ShapeNode, SENTINEL};
use crate::index::{AnyIndex, Index, IndexConfig, Variant};
use crate::rank::{InterleavedRankVector, RankLayout};
use crate::suffix::CArray;

pub const MAGIC: [u8; 4] = *b"FMDX";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 6;
const ALIGN: usize = 64;

mod kind {
    pub const C_ARRAY: u32 = 1;
    pub const SYMBOLS: u32 = 2;
    pub const RANK_VECTOR: u32 = 3;
    pub const CODE_ORDER: u32 = 4;
    pub const DNA3_BLOCKS: u32 = 5;
    pub const HWT_TOPOLOGY: u32 = 6;
    pub const HWT_BINARY: u32 = 7;
    pub const HWT_PACKED: u32 = 8;
    pub const HASH_GRAMS: u32 = 9;
    pub const HASH_BOUNDS: u32 = 10;
}

const TAG_EMPTY: u8 = 0;
const TAG_LEAF: u8 = 1;
const TAG_NODE: u8 = 2;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown variant id {0}")]
    UnknownVariant(u8),
    #[error("file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed index: {0}")]
    Malformed(String),
}

fn malformed<T>(msg: impl Into<String>) -> Result<T, LoadError> {
    Err(LoadError::Malformed(msg.into()))
}

struct Writer {
    buf: Vec<u8>,
    sections: u32,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn section(&mut self, kind: u32, aux: u64, payload: &[u8]) {
        self.u32(kind);
        self.u64(aux);
        self.u64(payload.len() as u64);
        self.buf.resize(self.buf.len().next_multiple_of(ALIGN), 0);
        self.buf.extend_from_slice(payload);
        self.sections += 1;
    }

    fn words(&mut self, kind: u32, aux: u64, words: &[u64]) {
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        self.section(kind, aux, &bytes);
    }

    fn c_array(&mut self, c: &CArray) {
        let mut less = Vec::with_capacity(257);
        let mut acc = 1u64;
        for f in c.frequencies() {
            less.push(acc);
            acc += f;
        }
        less.push(acc);
        self.words(kind::C_ARRAY, 0, &less);
    }

    fn dummy1(&mut self, idx: &FmDummy1Index) {
        self.c_array(idx.c_array());
        self.section(kind::SYMBOLS, idx.symbols().len() as u64, idx.symbols());
        for v in idx.vectors() {
            self.words(kind::RANK_VECTOR, v.len() as u64, v.raw_words());
        }
    }
}

/// Serializes `index` to its file image.
pub fn to_bytes(index: &Index) -> Vec<u8> {
    let cfg = &index.config;
    let mut w = Writer { buf: Vec::new(), sections: 0 };
    w.buf.extend_from_slice(&MAGIC);
    w.u8(VERSION);
    w.u8(cfg.variant.id());
    w.u64(0); // file length, patched below
    w.u64(index.text_len as u64);
    w.u64(match &index.index {
        AnyIndex::Dummy1(i) => i.bwt_len(),
        AnyIndex::Dummy2(i) => i.bwt_len(),
        AnyIndex::Dummy3(i) => i.bwt_len(),
        AnyIndex::Hwt(i) => i.bwt_len(),
    } as u64);

    let uses_layout = matches!(cfg.variant, Variant::Dummy1 | Variant::Dummy2Scbdc | Variant::Dummy2Cb);
    w.u8(if uses_layout { cfg.layout.id() } else { 0 });
    w.u16(cfg.block_bits as u16);
    w.u8(cfg.arity as u8);
    match cfg.code {
        None => w.buf.extend_from_slice(&[0; 6]),
        Some(p) => {
            w.u8(match p.family {
                CodeFamily::Scbdc => 1,
                CodeFamily::Cb => 2,
            });
            w.buf.extend_from_slice(&[p.s, p.c, p.b, p.o, p.digit_bits]);
        }
    }
    let (k, lf) = index.table.as_ref().map_or((0, 0.0), |t| (t.k() as u32, cfg.hash.map_or(0.0, |h| h.1)));
    w.u32(k);
    w.u64(f64::to_bits(lf));
    w.u8(cfg.prefetch as u8);
    let name = index.corpus.as_bytes();
    let name = &name[..name.len().min(u16::MAX as usize)];
    w.u16(name.len() as u16);
    w.buf.extend_from_slice(name);
    let count_at = w.buf.len();
    w.u32(0); // section count, patched below

    match &index.index {
        AnyIndex::Dummy1(idx) => w.dummy1(idx),
        AnyIndex::Dummy2(idx) => {
            let order = idx.code().symbol_order();
            w.section(kind::CODE_ORDER, order.len() as u64, order);
            w.dummy1(idx.inner());
        }
        AnyIndex::Dummy3(idx) => {
            w.c_array(idx.c_array());
            w.words(kind::DNA3_BLOCKS, idx.bwt_len() as u64, idx.raw_words());
        }
        AnyIndex::Hwt(idx) => {
            w.c_array(idx.c_array());
            let mut topo = Vec::new();
            for node in idx.shape().nodes() {
                for child in &node.children {
                    let (tag, sym) = match *child {
                        Child::Empty => (TAG_EMPTY, 0),
                        Child::Leaf(s) => (TAG_LEAF, s),
                        Child::Node(_) => (TAG_NODE, 0),
                    };
                    topo.push(tag);
                    topo.extend_from_slice(&sym.to_le_bytes());
                }
            }
            w.section(kind::HWT_TOPOLOGY, idx.nodes().len() as u64, &topo);
            for node in idx.nodes() {
                match node {
                    HwtNode::Binary(v) => w.words(kind::HWT_BINARY, v.len() as u64, v.raw_words()),
                    HwtNode::Packed(p) => w.words(kind::HWT_PACKED, p.len() as u64, p.raw_words()),
                }
            }
        }
    }
    if let Some(t) = &index.table {
        let (grams, bounds) = t.raw_buckets();
        w.section(kind::HASH_GRAMS, t.k() as u64, grams);
        let flat: Vec<u64> = bounds.iter().flat_map(|&(sp, ep)| [sp, ep]).collect();
        w.words(kind::HASH_BOUNDS, bounds.len() as u64, &flat);
    }

    let sections = w.sections;
    w.buf[count_at..count_at + 4].copy_from_slice(&sections.to_le_bytes());
    let total = w.buf.len() + 4;
    w.buf[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&(total as u64).to_le_bytes());
    let crc = crc32fast::hash(&w.buf[HEADER_LEN..]);
    w.u32(crc);
    w.buf
}

/// Writes `index` to `path`; returns the number of bytes written.
pub fn save(index: &Index, path: &Path) -> io::Result<u64> {
    let bytes = to_bytes(index);
    std::fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn load(path: &Path) -> Result<Index, LoadError> {
    from_bytes(&std::fs::read(path)?)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

struct Section<'a> {
    kind: u32,
    aux: u64,
    payload: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], LoadError> {
        match self.pos.checked_add(len) {
            Some(end) if end <= self.buf.len() => {
                let out = &self.buf[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            _ => malformed(format!("field at offset {} runs past the end", self.pos)),
        }
    }
    fn u8(&mut self) -> Result<u8, LoadError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, LoadError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, LoadError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, LoadError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize, LoadError> {
        usize::try_from(self.u64()?).or_else(|_| malformed("length does not fit in memory"))
    }

    fn section(&mut self, expected: u32) -> Result<Section<'a>, LoadError> {
        let kind = self.u32()?;
        if kind != expected {
            return malformed(format!("expected section kind {expected}, found {kind}"));
        }
        let aux = self.u64()?;
        let len = self.usize()?;
        let pad = self.pos.next_multiple_of(ALIGN) - self.pos;
        if self.take(pad)?.iter().any(|&b| b != 0) {
            return malformed("non-zero section padding");
        }
        Ok(Section { kind, aux, payload: self.take(len)? })
    }

    fn words(&mut self, expected: u32) -> Result<(u64, AlignedWords), LoadError> {
        let s = self.section(expected)?;
        match AlignedWords::from_le_bytes(s.payload) {
            Some(w) => Ok((s.aux, w)),
            None => malformed(format!("section kind {} is not a whole number of words", s.kind)),
        }
    }

    fn c_array(&mut self) -> Result<CArray, LoadError> {
        let (_, w) = self.words(kind::C_ARRAY)?;
        let less = w.as_slice();
        if less.len() != 257 || less[0] != 1 || less.windows(2).any(|p| p[1] < p[0]) {
            return malformed("C array is not a non-decreasing table of 257 entries starting at 1");
        }
        let mut freqs = [0u64; 256];
        for (v, f) in freqs.iter_mut().enumerate() {
            *f = less[v + 1] - less[v];
        }
        Ok(CArray::from_frequencies(&freqs))
    }

    fn dummy1(&mut self, layout: RankLayout) -> Result<FmDummy1Index, LoadError> {
        let c = self.c_array()?;
        let syms = self.section(kind::SYMBOLS)?;
        let symbols = syms.payload.to_vec();
        if syms.aux != symbols.len() as u64 || symbols.windows(2).any(|p| p[1] <= p[0]) {
            return malformed("symbol list is not strictly increasing");
        }
        let mut vectors = Vec::with_capacity(symbols.len());
        for &sym in &symbols {
            let (len, words) = self.words(kind::RANK_VECTOR)?;
            let v = InterleavedRankVector::from_raw(layout, len as usize, words)
                .filter(|v| v.len() == c.total() && v.count_ones() == c.frequency(sym));
            match v {
                Some(v) => vectors.push(v),
                None => return malformed(format!("bit vector of symbol {sym:#04x} is inconsistent")),
            }
        }
        if (0..=255u8).any(|s| c.frequency(s) > 0 && symbols.binary_search(&s).is_err()) {
            return malformed("a symbol of the text has no bit vector");
        }
        Ok(FmDummy1Index::from_parts(symbols, vectors, c, layout))
    }

    fn hwt(&mut self, arity: usize, block: HwtBlock) -> Result<FmHwtIndex, LoadError> {
        let c = self.c_array()?;
        let topo = self.section(kind::HWT_TOPOLOGY)?;
        let count = topo.aux as usize;
        if topo.payload.len() != count.saturating_mul(arity * 3) {
            return malformed("topology size does not match node count");
        }
        // Nodes are stored in preorder, so node `id` fills the first open
        // `Node` slot of the deepest earlier node that still has one.
        let mut nodes = Vec::with_capacity(count);
        let mut open: Vec<(usize, Vec<usize>)> = Vec::new();
        for (id, entries) in topo.payload.chunks_exact(arity * 3).enumerate() {
            let mut children = Vec::with_capacity(arity);
            let mut slots = Vec::new();
            for (d, e) in entries.chunks_exact(3).enumerate() {
                let sym = u16::from_le_bytes([e[1], e[2]]);
                children.push(match (e[0], sym) {
                    (TAG_EMPTY, 0) => Child::Empty,
                    (TAG_LEAF, s) if s <= SENTINEL => Child::Leaf(s),
                    (TAG_NODE, 0) => {
                        slots.push(d);
                        Child::Node(usize::MAX)
                    }
                    (tag, sym) => return malformed(format!("bad topology entry ({tag}, {sym})")),
                });
            }
            if id > 0 {
                while open.last().is_some_and(|(_, s)| s.is_empty()) {
                    open.pop();
                }
                let Some((parent, pending)) = open.last_mut() else {
                    return malformed("topology has more than one root");
                };
                let d = pending.remove(0);
                let parent: &mut ShapeNode = &mut nodes[*parent];
                parent.children[d] = Child::Node(id);
            }
            nodes.push(ShapeNode { children });
            open.push((id, slots));
        }
        if open.iter().any(|(_, s)| !s.is_empty()) {
            return malformed("topology references a missing node");
        }
        let Some(shape) = HuffmanShape::try_from_nodes(arity, nodes) else {
            return malformed("topology is not a valid code tree");
        };
        let mut hwt_nodes = Vec::with_capacity(count);
        for _ in 0..count {
            let node = if arity == 2 {
                let (len, words) = self.words(kind::HWT_BINARY)?;
                InterleavedRankVector::from_raw(RankLayout::Sub512, len as usize, words).map(HwtNode::Binary)
            } else {
                let (len, words) = self.words(kind::HWT_PACKED)?;
                PackedDigits::from_raw(arity, block, len as usize, words).map(HwtNode::Packed)
            };
            match node {
                Some(n) => hwt_nodes.push(n),
                None => return malformed("inconsistent HWT node"),
            }
        }
        // Every node must hold exactly the digits routed to it.
        if hwt_nodes[0].len() != c.total() {
            return malformed("HWT root length differs from the BWT length");
        }
        for (id, node) in shape.nodes().iter().enumerate() {
            let len = hwt_nodes[id].len();
            for (d, child) in node.children.iter().enumerate() {
                let routed = hwt_nodes[id].digit_rank(d as u8, len);
                let expected = match *child {
                    Child::Empty => 0,
                    Child::Leaf(SENTINEL) => 1,
                    Child::Leaf(s) if s < 256 => c.frequency(s as u8),
                    Child::Leaf(_) => usize::MAX,
                    Child::Node(k) => hwt_nodes[k].len(),
                };
                if routed != expected {
                    return malformed(format!("HWT node {id} digit {d} routes {routed} rows, expected {expected}"));
                }
            }
        }
        if (0..=255u8).any(|s| c.frequency(s) > 0 && shape.code(s as u16).is_none()) || shape.code(SENTINEL).is_none() {
            return malformed("a symbol of the text has no HWT leaf");
        }
        Ok(FmHwtIndex::from_parts(shape, block, hwt_nodes, c))
    }

    fn table(&mut self, k: usize, bwt_len: usize) -> Result<KGramTable, LoadError> {
        let grams = self.section(kind::HASH_GRAMS)?;
        if grams.aux != k as u64 {
            return malformed("k-gram length disagrees with the parameter block");
        }
        let grams = grams.payload.to_vec();
        let (buckets, words) = self.words(kind::HASH_BOUNDS)?;
        let flat = words.as_slice();
        if flat.len() as u64 != buckets.saturating_mul(2) {
            return malformed("bucket count disagrees with the bounds section");
        }
        let bounds: Vec<(u64, u64)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let valid = |&(sp, ep): &(u64, u64)| (sp == u64::MAX && ep == u64::MAX) || (sp < ep && ep <= bwt_len as u64);
        if !bounds.iter().all(valid) {
            return malformed("k-gram interval out of range");
        }
        KGramTable::from_raw(k, grams, bounds).ok_or(LoadError::Malformed("invalid k-gram table".into()))
    }
}

/// Parses a file image produced by [`to_bytes`].
pub fn from_bytes(bytes: &[u8]) -> Result<Index, LoadError> {
    let min = HEADER_LEN + 8;
    if bytes.len() < 4 {
        return Err(LoadError::Truncated { expected: min, actual: bytes.len() });
    }
    if bytes[..4] != MAGIC {
        return Err(LoadError::BadMagic);
    }
    if bytes.len() < min {
        return Err(LoadError::Truncated { expected: min, actual: bytes.len() });
    }
    if bytes[4] != VERSION {
        return Err(LoadError::UnsupportedVersion(bytes[4]));
    }
    let variant = Variant::from_id(bytes[5]).ok_or(LoadError::UnknownVariant(bytes[5]))?;
    let declared = u64::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 8].try_into().unwrap());
    if declared < (min + 4) as u64 {
        return malformed("declared file length too small");
    }
    if (bytes.len() as u64) < declared {
        return Err(LoadError::Truncated { expected: declared as usize, actual: bytes.len() });
    }
    if bytes.len() as u64 > declared {
        return malformed(format!("{} trailing bytes", bytes.len() as u64 - declared));
    }
    let body = &bytes[HEADER_LEN..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(LoadError::ChecksumMismatch { stored, computed });
    }

    let mut r = Reader { buf: &bytes[..bytes.len() - 4], pos: HEADER_LEN + 8 };
    let text_len = r.usize()?;
    let bwt_len = r.usize()?;
    let layout_id = r.u8()?;
    let block_bits = r.u16()? as u32;
    let arity = r.u8()? as usize;
    let family = r.u8()?;
    let code_bytes = r.take(5)?;
    let k = r.u32()? as usize;
    let load_factor = f64::from_bits(r.u64()?);
    let prefetch = match r.u8()? {
        0 => false,
        1 => true,
        v => return malformed(format!("prefetch flag {v}")),
    };
    let name_len = r.u16()? as usize;
    let corpus = String::from_utf8(r.take(name_len)?.to_vec()).or_else(|_| malformed("corpus name is not UTF-8"))?;
    let sections = r.u32()?;

    let layout = || RankLayout::from_id(layout_id).ok_or(LoadError::Malformed(format!("layout id {layout_id}")));
    let code = match family {
        0 => None,
        1 | 2 => {
            let p = DenseCodeParams {
                family: if family == 1 { CodeFamily::Scbdc } else { CodeFamily::Cb },
                s: code_bytes[0],
                c: code_bytes[1],
                b: code_bytes[2],
                o: code_bytes[3],
                digit_bits: code_bytes[4],
            };
            if p.validate().is_err() {
                return malformed(format!("invalid code parameters {p}"));
            }
            Some(p)
        }
        f => return malformed(format!("code family {f}")),
    };

    let (config, index) = match variant {
        Variant::Dummy1 => {
            let layout = layout()?;
            (IndexConfig::dummy1(layout), AnyIndex::Dummy1(r.dummy1(layout)?.with_prefetch(prefetch)))
        }
        Variant::Dummy2Scbdc | Variant::Dummy2Cb => {
            let layout = layout()?;
            let Some(params) = code else {
                return malformed("dummy2 file without code parameters");
            };
            let cfg = IndexConfig::dummy2(params, layout);
            if cfg.variant != variant {
                return malformed("code family disagrees with the variant id");
            }
            let order = r.section(kind::CODE_ORDER)?;
            let code = DenseCode::from_symbol_order(params, order.payload.to_vec())
                .or_else(|e| malformed(format!("code: {e}")))?;
            let inner = r.dummy1(layout)?;
            if inner.symbols().len() != params.radix() || inner.symbols().iter().enumerate().any(|(i, &s)| s as usize != i)
            {
                return malformed("dummy2 needs one bit vector per digit");
            }
            (cfg, AnyIndex::Dummy2(FmDummy2Index::from_parts(code, inner).with_prefetch(prefetch)))
        }
        Variant::Dummy3 => {
            let Some(block) = Dna3Block::from_bits(block_bits) else {
                return malformed(format!("dummy3 block bits {block_bits}"));
            };
            let c = r.c_array()?;
            if (5..=255u8).any(|s| c.frequency(s) > 0) {
                return malformed("dummy3 C array has symbols beyond N");
            }
            let (len, words) = r.words(kind::DNA3_BLOCKS)?;
            let idx = FmDummy3Index::from_parts(block, len as usize, words, c)
                .ok_or(LoadError::Malformed("inconsistent dummy3 blocks".into()))?;
            (IndexConfig::dummy3(block), AnyIndex::Dummy3(idx.with_prefetch(prefetch)))
        }
        Variant::Hwt => {
            let Some(block) = HwtBlock::from_bits(block_bits) else {
                return malformed(format!("HWT block bits {block_bits}"));
            };
            if !matches!(arity, 2 | 4 | 8) {
                return malformed(format!("HWT arity {arity}"));
            }
            (IndexConfig::hwt(arity, block), AnyIndex::Hwt(r.hwt(arity, block)?.with_prefetch(prefetch)))
        }
    };
    let actual_bwt_len = match &index {
        AnyIndex::Dummy1(i) => i.bwt_len(),
        AnyIndex::Dummy2(i) => i.bwt_len(),
        AnyIndex::Dummy3(i) => i.bwt_len(),
        AnyIndex::Hwt(i) => i.bwt_len(),
    };
    if actual_bwt_len != bwt_len {
        return malformed("BWT length disagrees with the stored structures");
    }
    if !matches!(variant, Variant::Dummy2Scbdc | Variant::Dummy2Cb) && bwt_len != text_len + 1 {
        return malformed("text length disagrees with the BWT length");
    }
    let table = if k > 0 {
        if matches!(variant, Variant::Dummy2Scbdc | Variant::Dummy2Cb) {
            return malformed("dummy2 files cannot carry a k-gram table");
        }
        Some(r.table(k, bwt_len)?)
    } else {
        None
    };
    let expected_sections = r_sections(&index) + if table.is_some() { 2 } else { 0 };
    if sections != expected_sections {
        return malformed(format!("section count {sections}, expected {expected_sections}"));
    }
    if r.pos != r.buf.len() {
        return malformed("unparsed bytes before the checksum");
    }
    let mut config = config.with_prefetch(prefetch);
    if let Some(t) = &table {
        config = config.with_hash(t.k(), load_factor);
    }
    Ok(Index { config, index, table, text_len, corpus })
}

fn r_sections(index: &AnyIndex) -> u32 {
    match index {
        AnyIndex::Dummy1(i) => 2 + i.vectors().len() as u32,
        AnyIndex::Dummy2(i) => 3 + i.inner().vectors().len() as u32,
        AnyIndex::Dummy3(_) => 2,
        AnyIndex::Hwt(i) => 2 + i.nodes().len() as u32,
    }
}
