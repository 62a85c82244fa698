//! Backward search over any structure that answers `Occ` queries.

use std::borrow::Cow;

use thiserror::Error;

mod dummy1;
mod dummy2;

pub use dummy1::FmDummy1Index;
pub use dummy2::FmDummy2Index;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("empty pattern")]
    EmptyPattern,
    #[error("pattern byte {0:#04x} is not one of A, C, G, T")]
    InvalidDnaSymbol(u8),
}

/// Half-open suffix-array interval `[sp, ep)` of rows prefixed by a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountResult {
    pub sp: usize,
    pub ep: usize,
}

impl CountResult {
    pub const EMPTY: CountResult = CountResult { sp: 0, ep: 0 };

    pub fn new(sp: usize, ep: usize) -> Self {
        debug_assert!(sp <= ep);
        Self { sp, ep }
    }

    pub fn occurrences(&self) -> usize {
        self.ep - self.sp
    }

    pub fn is_empty(&self) -> bool {
        self.sp >= self.ep
    }
}

/// The per-step primitive of backward search.
///
/// Symbols are bytes in the index's own symbol space (raw text bytes,
/// code digits, or mapped DNA codes); the sentinel is not addressable.
pub trait OccProvider {
    /// Rows in the BWT, sentinel included.
    fn bwt_len(&self) -> usize;

    /// Symbols (sentinel included) strictly smaller than `sym`.
    fn c(&self, sym: u8) -> usize;

    /// Occurrences of `sym` among BWT rows `0..pos`.
    fn occ(&self, sym: u8, pos: usize) -> usize;

    /// Whether [`prefetch`](Self::prefetch) hints should be issued.
    fn prefetch_enabled(&self) -> bool {
        false
    }

    /// Non-binding hint that `occ(sym, pos)` will be asked soon.
    fn prefetch(&self, _sym: u8, _pos: usize) {}
}

/// Narrows `range` by `symbols`, last symbol first.
///
/// Stops as soon as the interval is empty.
pub fn backward_search<O: OccProvider + ?Sized>(idx: &O, symbols: &[u8], range: CountResult) -> CountResult {
    let (mut sp, mut ep) = (range.sp, range.ep);
    let prefetch = idx.prefetch_enabled();
    let mut i = symbols.len();
    while sp < ep && i > 0 {
        i -= 1;
        let c = symbols[i];
        let base = idx.c(c);
        sp = base + idx.occ(c, sp);
        if prefetch && i > 0 {
            idx.prefetch(symbols[i - 1], sp);
        }
        ep = base + idx.occ(c, ep);
        if prefetch && i > 0 {
            idx.prefetch(symbols[i - 1], ep);
        }
    }
    if sp >= ep {
        CountResult::new(sp, sp)
    } else {
        CountResult::new(sp, ep)
    }
}

/// A complete count-query index.
pub trait FmIndex: OccProvider {
    /// Maps a pattern into the index's symbol space; `Ok(None)` when the
    /// pattern contains a byte that cannot occur in the text.
    fn query_symbols<'p>(&self, pattern: &'p [u8]) -> Result<Option<Cow<'p, [u8]>>, QueryError>;

    /// Interval a search starts from.
    fn initial_range(&self) -> CountResult {
        CountResult::new(0, self.bwt_len())
    }

    fn size_bytes(&self) -> usize;

    fn count(&self, pattern: &[u8]) -> Result<CountResult, QueryError> {
        if pattern.is_empty() {
            return Err(QueryError::EmptyPattern);
        }
        match self.query_symbols(pattern)? {
            None => Ok(CountResult::EMPTY),
            Some(symbols) => Ok(backward_search(self, &symbols, self.initial_range())),
        }
    }
}
