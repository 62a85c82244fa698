//! Cache-line aligned word storage.
//!
//! Every block array in this crate lives in an [`AlignedWords`] buffer whose
//! first byte sits on a 64-byte boundary, so that a 512-bit block maps onto
//! exactly one cache line.

use std::fmt;

/// Cache line size in bytes.
pub const CACHE_LINE_BYTES: usize = 64;
const WORDS_PER_LINE: usize = CACHE_LINE_BYTES / 8;

#[derive(Clone, Copy, Default, PartialEq, Eq)]
#[repr(C, align(64))]
struct CacheLine([u64; WORDS_PER_LINE]);

/// A growable-once array of `u64` words starting on a cache-line boundary.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct AlignedWords {
    lines: Vec<CacheLine>,
    len: usize,
}

impl AlignedWords {
    /// Zero-filled buffer of `len` words.
    pub fn zeroed(len: usize) -> Self {
        let lines = vec![CacheLine::default(); len.div_ceil(WORDS_PER_LINE)];
        Self { lines, len }
    }

    pub fn from_words(words: &[u64]) -> Self {
        let mut out = Self::zeroed(words.len());
        out.as_mut_slice().copy_from_slice(words);
        out
    }

    /// Rebuild from little-endian bytes; `bytes.len()` must be a multiple of 8.
    pub fn from_le_bytes(bytes: &[u8]) -> Option<Self> {
        if !bytes.len().is_multiple_of(8) {
            return None;
        }
        let mut out = Self::zeroed(bytes.len() / 8);
        for (w, chunk) in out.as_mut_slice().iter_mut().zip(bytes.chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        Some(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[u64] {
        // SAFETY: `CacheLine` is `repr(C)` over `[u64; 8]` with size 64 and no
        // padding, so the line vector is a contiguous run of initialized u64s.
        unsafe { std::slice::from_raw_parts(self.lines.as_ptr().cast::<u64>(), self.len) }
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [u64] {
        // SAFETY: see `as_slice`.
        unsafe { std::slice::from_raw_parts_mut(self.lines.as_mut_ptr().cast::<u64>(), self.len) }
    }

    /// Base address of the storage, for alignment checks.
    pub fn base_addr(&self) -> usize {
        self.lines.as_ptr() as usize
    }

    pub fn size_bytes(&self) -> usize {
        self.len * 8
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.as_slice().iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    /// Hint the CPU to fetch the cache line holding `word`.
    #[inline(always)]
    pub fn prefetch(&self, word: usize) {
        #[cfg(target_arch = "x86_64")]
        if word < self.len {
            // SAFETY: the pointer is in bounds; prefetch never faults.
            unsafe {
                use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
                let p = self.as_slice().as_ptr().add(word).cast::<i8>();
                _mm_prefetch::<_MM_HINT_T0>(p);
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = word;
    }
}

impl fmt::Debug for AlignedWords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlignedWords").field("len", &self.len).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storage_is_cache_line_aligned() {
        for len in [0, 1, 7, 8, 9, 1000] {
            let w = AlignedWords::zeroed(len);
            assert_eq!(w.base_addr() % CACHE_LINE_BYTES, 0);
            assert_eq!(w.as_slice().len(), len);
        }
    }

    #[test]
    fn le_bytes_round_trip() {
        let w = AlignedWords::from_words(&[1, u64::MAX, 0x0123_4567_89ab_cdef]);
        let back = AlignedWords::from_le_bytes(&w.to_le_bytes()).unwrap();
        assert_eq!(w, back);
        assert!(AlignedWords::from_le_bytes(&[0; 7]).is_none());
    }
}
