use std::borrow::Cow;

use super::{CountResult, FmDummy1Index, FmIndex, OccProvider, QueryError};
use crate::dense_code::{CodeError, CodeFamily, DenseCode, DenseCodeParams};
use crate::rank::RankLayout;
use crate::suffix::bwt_of;
use crate::text::byte_frequencies;

/// Per-digit bit vectors over the BWT of the dense-coded text.
///
/// For `(c,b)` codes a match must be followed by a beginner digit or the
/// end of the text, so searches start from the rows whose suffix begins with
/// the sentinel or a beginner. Beginners hold the lowest digit values, which
/// makes those rows the single interval `[0, C[b])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmDummy2Index {
    code: DenseCode,
    inner: FmDummy1Index,
}

impl FmDummy2Index {
    pub fn build(text: &[u8], params: DenseCodeParams, layout: RankLayout) -> Result<Self, CodeError> {
        let code = DenseCode::derive(&byte_frequencies(text), params)?;
        let digits = code.encode(text)?;
        let (_, bwt) = bwt_of(&digits);
        let all_digits: Vec<u8> = (0..params.radix() as u8).collect();
        let inner = FmDummy1Index::with_symbols(&bwt, layout, &all_digits);
        Ok(Self { code, inner })
    }

    pub(crate) fn from_parts(code: DenseCode, inner: FmDummy1Index) -> Self {
        Self { code, inner }
    }

    pub fn with_prefetch(mut self, on: bool) -> Self {
        self.inner = self.inner.with_prefetch(on);
        self
    }

    pub fn code(&self) -> &DenseCode {
        &self.code
    }

    pub fn family(&self) -> CodeFamily {
        self.code.params().family
    }

    /// The per-digit index over the encoded text.
    pub fn inner(&self) -> &FmDummy1Index {
        &self.inner
    }
}

impl OccProvider for FmDummy2Index {
    fn bwt_len(&self) -> usize {
        self.inner.bwt_len()
    }

    #[inline]
    fn c(&self, sym: u8) -> usize {
        self.inner.c(sym)
    }

    #[inline]
    fn occ(&self, sym: u8, pos: usize) -> usize {
        self.inner.occ(sym, pos)
    }

    fn prefetch_enabled(&self) -> bool {
        self.inner.prefetch_enabled()
    }

    fn prefetch(&self, sym: u8, pos: usize) {
        self.inner.prefetch(sym, pos)
    }
}

impl FmIndex for FmDummy2Index {
    fn query_symbols<'p>(&self, pattern: &'p [u8]) -> Result<Option<Cow<'p, [u8]>>, QueryError> {
        Ok(self.code.encode(pattern).ok().map(Cow::Owned))
    }

    fn initial_range(&self) -> CountResult {
        let params = self.code.params();
        match params.family {
            CodeFamily::Cb if (params.b as usize) < params.radix() => CountResult::new(0, self.inner.c(params.b)),
            _ => CountResult::new(0, self.bwt_len()),
        }
    }

    fn size_bytes(&self) -> usize {
        self.inner.size_bytes() + self.code.symbol_order().len() + 8
    }
}
