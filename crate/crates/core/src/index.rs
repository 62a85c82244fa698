//! Variant-erased index: one type the CLI and file format can hold.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dense_code::{CodeError, CodeFamily, DenseCodeParams};
use crate::dummy3::{self, Dna3Block, FmDummy3Index};
use crate::fm::{CountResult, FmDummy1Index, FmDummy2Index, FmIndex, QueryError};
use crate::hash_boost::{boosted_count, KGramTable};
use crate::hwt::{FmHwtIndex, HwtBlock};
use crate::rank::RankLayout;
use crate::suffix::{build_bwt, suffix_array};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Dummy1,
    Dummy2Scbdc,
    Dummy2Cb,
    Dummy3,
    Hwt,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Self::Dummy1, Self::Dummy2Scbdc, Self::Dummy2Cb, Self::Dummy3, Self::Hwt];

    /// Identifier used in index files.
    pub fn id(self) -> u8 {
        match self {
            Self::Dummy1 => 1,
            Self::Dummy2Scbdc => 2,
            Self::Dummy2Cb => 3,
            Self::Dummy3 => 4,
            Self::Hwt => 5,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Dummy1 => "d1",
            Self::Dummy2Scbdc => "d2",
            Self::Dummy2Cb => "d2cb",
            Self::Dummy3 => "d3",
            Self::Hwt => "hwt",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant {s:?} (expected d1, d2, d2cb, d3 or hwt)"))
    }
}

/// Everything needed to build one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexConfig {
    pub variant: Variant,
    /// Bit-vector layout (dummy1, dummy2).
    pub layout: RankLayout,
    /// Code parameters (dummy2).
    pub code: Option<DenseCodeParams>,
    /// Node arity (HWT).
    pub arity: usize,
    /// Block size in bits (dummy3, HWT).
    pub block_bits: u32,
    /// `(k, load factor)` of the k-gram table, if any.
    pub hash: Option<(usize, f64)>,
    pub prefetch: bool,
}

impl IndexConfig {
    fn base(variant: Variant) -> Self {
        Self {
            variant,
            layout: RankLayout::Plain512x64,
            code: None,
            arity: 0,
            block_bits: 0,
            hash: None,
            prefetch: false,
        }
    }

    pub fn dummy1(layout: RankLayout) -> Self {
        Self { layout, ..Self::base(Variant::Dummy1) }
    }

    pub fn dummy2(params: DenseCodeParams, layout: RankLayout) -> Self {
        let variant = match params.family {
            CodeFamily::Scbdc => Variant::Dummy2Scbdc,
            CodeFamily::Cb => Variant::Dummy2Cb,
        };
        Self { layout, code: Some(params), ..Self::base(variant) }
    }

    pub fn dummy3(block: Dna3Block) -> Self {
        Self { block_bits: block.bits() as u32, ..Self::base(Variant::Dummy3) }
    }

    pub fn hwt(arity: usize, block: HwtBlock) -> Self {
        Self { arity, block_bits: block.bits() as u32, ..Self::base(Variant::Hwt) }
    }

    pub fn with_hash(mut self, k: usize, load_factor: f64) -> Self {
        self.hash = Some((k, load_factor));
        self
    }

    pub fn with_prefetch(mut self, on: bool) -> Self {
        self.prefetch = on;
        self
    }

    /// Short human-readable parameter summary.
    pub fn describe(&self) -> String {
        let mut s = match self.variant {
            Variant::Dummy1 => format!("d1 layout={}", self.layout),
            Variant::Dummy2Scbdc | Variant::Dummy2Cb => {
                let code = self.code.map_or_else(|| "?".to_string(), |c| c.to_string());
                format!("{} {} layout={}", self.variant, code, self.layout)
            }
            Variant::Dummy3 => format!("d3 block={}", self.block_bits),
            Variant::Hwt => format!("hwt arity={} block={}", self.arity, self.block_bits),
        };
        if let Some((k, lf)) = self.hash {
            s.push_str(&format!(" hash_k={k} load_factor={lf}"));
        }
        if self.prefetch {
            s.push_str(" prefetch=on");
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("variant {0} does not take a k-gram table")]
    HashUnsupported(Variant),
    #[error("k-gram length {k} must be in 1..={n}")]
    InvalidHashK { k: usize, n: usize },
    #[error("load factor {0} must be in (0, 1)")]
    InvalidLoadFactor(f64),
    #[error("invalid parameters: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyIndex {
    Dummy1(FmDummy1Index),
    Dummy2(FmDummy2Index),
    Dummy3(FmDummy3Index),
    Hwt(FmHwtIndex),
}

macro_rules! dispatch {
    ($self:expr, $idx:ident => $body:expr) => {
        match $self {
            AnyIndex::Dummy1($idx) => $body,
            AnyIndex::Dummy2($idx) => $body,
            AnyIndex::Dummy3($idx) => $body,
            AnyIndex::Hwt($idx) => $body,
        }
    };
}

impl AnyIndex {
    pub fn count(&self, pattern: &[u8]) -> Result<CountResult, QueryError> {
        dispatch!(self, idx => idx.count(pattern))
    }

    pub fn boosted_count(&self, table: &KGramTable, pattern: &[u8]) -> Result<CountResult, QueryError> {
        dispatch!(self, idx => boosted_count(idx, table, pattern))
    }

    pub fn size_bytes(&self) -> usize {
        dispatch!(self, idx => idx.size_bytes())
    }
}

/// A built index, optionally with its k-gram table.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    pub config: IndexConfig,
    pub index: AnyIndex,
    pub table: Option<KGramTable>,
    /// Length of the original text.
    pub text_len: usize,
    pub corpus: String,
}

impl Index {
    /// Builds the configured variant over `text`.
    ///
    /// The suffix array is computed once and reused for the k-gram table.
    pub fn build(text: &[u8], config: &IndexConfig, corpus: &str) -> Result<Self, BuildError> {
        if text.is_empty() {
            return Err(BuildError::InvalidConfig("text is empty".into()));
        }
        if let Some((k, lf)) = config.hash {
            if matches!(config.variant, Variant::Dummy2Scbdc | Variant::Dummy2Cb) {
                return Err(BuildError::HashUnsupported(config.variant));
            }
            if k == 0 || k > text.len() {
                return Err(BuildError::InvalidHashK { k, n: text.len() });
            }
            if !(lf > 0.0 && lf < 1.0) {
                return Err(BuildError::InvalidLoadFactor(lf));
            }
        }
        let table_for = |query_text: &[u8], sa: &[u32], acgt_only: bool| {
            config.hash.map(|(k, lf)| {
                if acgt_only {
                    KGramTable::build(query_text, sa, k, lf, |g| g.iter().all(|&s| s < dummy3::N))
                } else {
                    KGramTable::build(query_text, sa, k, lf, |_| true)
                }
            })
        };
        let (index, table) = match config.variant {
            Variant::Dummy1 => {
                let sa = suffix_array(text);
                let bwt = build_bwt(text, &sa);
                let idx = FmDummy1Index::from_bwt(&bwt, config.layout).with_prefetch(config.prefetch);
                (AnyIndex::Dummy1(idx), table_for(text, &sa, false))
            }
            Variant::Dummy2Scbdc | Variant::Dummy2Cb => {
                let params = config
                    .code
                    .ok_or_else(|| BuildError::InvalidConfig("dummy2 needs code parameters".into()))?;
                let expected = if config.variant == Variant::Dummy2Cb { CodeFamily::Cb } else { CodeFamily::Scbdc };
                if params.family != expected {
                    return Err(BuildError::InvalidConfig(format!("{params} does not match variant {}", config.variant)));
                }
                let idx = FmDummy2Index::build(text, params, config.layout)?.with_prefetch(config.prefetch);
                (AnyIndex::Dummy2(idx), None)
            }
            Variant::Dummy3 => {
                let block = Dna3Block::from_bits(config.block_bits)
                    .ok_or_else(|| BuildError::InvalidConfig(format!("dummy3 block {}", config.block_bits)))?;
                let mapped = dummy3::map_text(text);
                let sa = suffix_array(&mapped);
                let bwt = build_bwt(&mapped, &sa);
                let idx = FmDummy3Index::from_mapped_bwt(&bwt, block).with_prefetch(config.prefetch);
                (AnyIndex::Dummy3(idx), table_for(&mapped, &sa, true))
            }
            Variant::Hwt => {
                let block = HwtBlock::from_bits(config.block_bits)
                    .ok_or_else(|| BuildError::InvalidConfig(format!("HWT block {}", config.block_bits)))?;
                if !matches!(config.arity, 2 | 4 | 8) {
                    return Err(BuildError::InvalidConfig(format!("HWT arity {}", config.arity)));
                }
                let sa = suffix_array(text);
                let bwt = build_bwt(text, &sa);
                let idx = FmHwtIndex::from_bwt(&bwt, config.arity, block).with_prefetch(config.prefetch);
                (AnyIndex::Hwt(idx), table_for(text, &sa, false))
            }
        };
        Ok(Self { config: *config, index, table, text_len: text.len(), corpus: corpus.to_string() })
    }

    /// Occurrences of `pattern`, through the k-gram table when present.
    pub fn count(&self, pattern: &[u8]) -> Result<usize, QueryError> {
        let r = match &self.table {
            Some(t) => self.index.boosted_count(t, pattern)?,
            None => self.index.count(pattern)?,
        };
        Ok(r.occurrences())
    }

    /// Index bytes including the k-gram table.
    pub fn size_bytes(&self) -> usize {
        self.index.size_bytes() + self.table.as_ref().map_or(0, KGramTable::size_bytes)
    }
}
