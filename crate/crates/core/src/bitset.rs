//! Packed bitsets with fused AND + population count kernels.
//!
//! Two kernel sets exist: one compiled with the `popcnt` target feature and
//! selected at runtime when the CPU supports it, and a portable SWAR fallback.
//! Both return identical results.

use std::fmt;

const WORD_BITS: usize = 64;

/// Word range `[lo, hi)` outside of which every word is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub const EMPTY: Span = Span { lo: 0, hi: 0 };

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn intersect(self, other: Span) -> Span {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo >= hi {
            Span::EMPTY
        } else {
            Span { lo, hi }
        }
    }
}

/// Fixed-length bitset. Bits at positions `>= len` are always zero.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
    span: Span,
}

impl Bitset {
    pub fn zeros(len: usize) -> Self {
        Bitset { words: vec![0; len.div_ceil(WORD_BITS)], len, span: Span::EMPTY }
    }

    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bitset::zeros(len);
        for p in positions {
            b.set(p);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn set(&mut self, pos: usize) {
        assert!(pos < self.len, "bit {pos} out of range for length {}", self.len);
        let w = pos / WORD_BITS;
        self.words[w] |= 1 << (pos % WORD_BITS);
        if self.span.is_empty() {
            self.span = Span { lo: w, hi: w + 1 };
        } else {
            self.span.lo = self.span.lo.min(w);
            self.span.hi = self.span.hi.max(w + 1);
        }
    }

    pub fn get(&self, pos: usize) -> bool {
        pos < self.len && self.words[pos / WORD_BITS] & (1 << (pos % WORD_BITS)) != 0
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        let Span { lo, hi } = self.span;
        self.words[lo..hi].iter().enumerate().flat_map(move |(i, &w)| {
            let base = (lo + i) * WORD_BITS;
            BitIter(w).map(move |b| base + b)
        })
    }

    /// Heap bytes held by the word array.
    pub fn heap_bytes(&self) -> usize {
        self.words.len() * std::mem::size_of::<u64>()
    }
}

impl fmt::Debug for Bitset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitset(len={}, ones={:?})", self.len, self.ones().collect::<Vec<_>>())
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let t = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    HardwarePopcnt,
    Portable,
}

type AndInto = fn(&mut [u64], &[u64], &[u64]) -> (u64, Span);

/// Bulk bitset operations. Obtain with [`Kernel::detect`].
#[derive(Clone, Copy)]
pub struct Kernel {
    kind: KernelKind,
    and_into: AndInto,
    and_count: fn(&[u64], &[u64]) -> u64,
    count: fn(&[u64]) -> u64,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Kernel").field(&self.kind).finish()
    }
}

impl Kernel {
    /// Hardware popcount when the CPU has it, else portable.
    pub fn detect() -> Kernel {
        Kernel::hardware().unwrap_or_else(Kernel::portable)
    }

    pub fn portable() -> Kernel {
        Kernel {
            kind: KernelKind::Portable,
            and_into: portable::and_into,
            and_count: portable::and_count,
            count: portable::count,
        }
    }

    pub fn hardware() -> Option<Kernel> {
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("popcnt") {
                return Some(Kernel {
                    kind: KernelKind::HardwarePopcnt,
                    and_into: x86::and_into,
                    and_count: x86::and_count,
                    count: x86::count,
                });
            }
            None
        }
        #[cfg(target_arch = "aarch64")]
        {
            // `cnt` is baseline on aarch64, so plain `count_ones` lowers to it.
            Some(Kernel {
                kind: KernelKind::HardwarePopcnt,
                and_into: native::and_into,
                and_count: native::and_count,
                count: native::count,
            })
        }
        #[cfg(not(any(target_arch = "x86_64", target_arch = "aarch64")))]
        {
            None
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Writes `a & b` into `dst` over the shared span and returns its
    /// cardinality. Words of `dst` outside the returned span are stale and
    /// must not be read.
    #[inline]
    pub fn and_into(&self, dst: &mut Bitset, a: &Bitset, b: &Bitset) -> u64 {
        debug_assert_eq!(a.len, b.len);
        debug_assert_eq!(dst.len, a.len);
        let span = a.span.intersect(b.span);
        if span.is_empty() {
            dst.span = Span::EMPTY;
            return 0;
        }
        let (lo, hi) = (span.lo, span.hi);
        let (count, inner) = (self.and_into)(&mut dst.words[lo..hi], &a.words[lo..hi], &b.words[lo..hi]);
        dst.span = if count == 0 { Span::EMPTY } else { Span { lo: lo + inner.lo, hi: lo + inner.hi } };
        count
    }

    /// `|a & b|` without materialising the intersection.
    #[inline]
    pub fn and_count(&self, a: &Bitset, b: &Bitset) -> u64 {
        let span = a.span.intersect(b.span);
        if span.is_empty() {
            return 0;
        }
        (self.and_count)(&a.words[span.lo..span.hi], &b.words[span.lo..span.hi])
    }

    #[inline]
    pub fn count(&self, a: &Bitset) -> u64 {
        (self.count)(&a.words[a.span.lo..a.span.hi])
    }
}

/// A row set with few members, held as its non-zero words only. Intersecting
/// it with a dense bitset touches just those words.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseWords {
    words: Vec<(u32, u64)>,
}

impl SparseWords {
    pub(crate) fn load(&mut self, dense: &Bitset) {
        self.words.clear();
        let Span { lo, hi } = dense.span;
        for (i, &w) in dense.words[lo..hi].iter().enumerate() {
            if w != 0 {
                self.words.push(((lo + i) as u32, w));
            }
        }
    }

    /// `self = a & b`, returning the cardinality.
    #[inline(always)]
    pub(crate) fn and_from<P: Popcount>(&mut self, a: &SparseWords, b: &Bitset) -> u64 {
        self.words.clear();
        let mut count = 0;
        for &(i, w) in &a.words {
            let x = w & b.words[i as usize];
            if x != 0 {
                count += P::pop(x);
                self.words.push((i, x));
            }
        }
        count
    }

    #[inline(always)]
    pub(crate) fn and_count<P: Popcount>(&self, b: &Bitset) -> u64 {
        self.words.iter().map(|&(i, w)| P::pop(w & b.words[i as usize])).sum()
    }
}

/// Per-word population count used by the generic kernel bodies.
pub(crate) trait Popcount {
    fn pop(w: u64) -> u64;
}

/// Branch-free SWAR population count.
pub(crate) struct Swar;

impl Popcount for Swar {
    #[inline(always)]
    fn pop(mut v: u64) -> u64 {
        v -= (v >> 1) & 0x5555_5555_5555_5555;
        v = (v & 0x3333_3333_3333_3333) + ((v >> 2) & 0x3333_3333_3333_3333);
        v = (v + (v >> 4)) & 0x0f0f_0f0f_0f0f_0f0f;
        v.wrapping_mul(0x0101_0101_0101_0101) >> 56
    }
}

/// `count_ones`; a single instruction inside functions compiled with the
/// `popcnt` feature (and on aarch64).
pub(crate) struct Native;

impl Popcount for Native {
    #[inline(always)]
    fn pop(v: u64) -> u64 {
        v.count_ones() as u64
    }
}

#[inline(always)]
fn and_into_words<P: Popcount>(dst: &mut [u64], a: &[u64], b: &[u64]) -> (u64, Span) {
    let mut count = 0u64;
    for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
        let w = x & y;
        *d = w;
        count += P::pop(w);
    }
    if count == 0 {
        return (0, Span::EMPTY);
    }
    let lo = dst.iter().position(|&w| w != 0).unwrap_or(0);
    let hi = dst.iter().rposition(|&w| w != 0).map_or(0, |i| i + 1);
    (count, Span { lo, hi })
}

#[inline(always)]
fn and_count_words<P: Popcount>(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| P::pop(x & y)).sum()
}

#[inline(always)]
fn count_words<P: Popcount>(a: &[u64]) -> u64 {
    a.iter().map(|&x| P::pop(x)).sum()
}

/// Span-aware `dst = a & b`, returning the cardinality. Inlined into callers
/// so that hot loops can be compiled once per [`Popcount`].
#[inline(always)]
pub(crate) fn and_into_with<P: Popcount>(dst: &mut Bitset, a: &Bitset, b: &Bitset) -> u64 {
    debug_assert_eq!(a.len, b.len);
    debug_assert_eq!(dst.len, a.len);
    let span = a.span.intersect(b.span);
    if span.is_empty() {
        dst.span = Span::EMPTY;
        return 0;
    }
    let (lo, hi) = (span.lo, span.hi);
    let (count, inner) = and_into_words::<P>(&mut dst.words[lo..hi], &a.words[lo..hi], &b.words[lo..hi]);
    dst.span = if count == 0 { Span::EMPTY } else { Span { lo: lo + inner.lo, hi: lo + inner.hi } };
    count
}

#[inline(always)]
pub(crate) fn and_count_with<P: Popcount>(a: &Bitset, b: &Bitset) -> u64 {
    let span = a.span.intersect(b.span);
    if span.is_empty() {
        return 0;
    }
    and_count_words::<P>(&a.words[span.lo..span.hi], &b.words[span.lo..span.hi])
}

mod portable {
    use super::{Span, Swar};

    pub(super) fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) -> (u64, Span) {
        super::and_into_words::<Swar>(dst, a, b)
    }

    pub(super) fn and_count(a: &[u64], b: &[u64]) -> u64 {
        super::and_count_words::<Swar>(a, b)
    }

    pub(super) fn count(a: &[u64]) -> u64 {
        super::count_words::<Swar>(a)
    }
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use super::{Native, Span};

    #[target_feature(enable = "popcnt")]
    unsafe fn and_into_popcnt(dst: &mut [u64], a: &[u64], b: &[u64]) -> (u64, Span) {
        super::and_into_words::<Native>(dst, a, b)
    }

    #[target_feature(enable = "popcnt")]
    unsafe fn and_count_popcnt(a: &[u64], b: &[u64]) -> u64 {
        super::and_count_words::<Native>(a, b)
    }

    #[target_feature(enable = "popcnt")]
    unsafe fn count_popcnt(a: &[u64]) -> u64 {
        super::count_words::<Native>(a)
    }

    // These wrappers are only installed by `Kernel::hardware` after the
    // `popcnt` feature has been detected.
    pub(super) fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) -> (u64, Span) {
        unsafe { and_into_popcnt(dst, a, b) }
    }

    pub(super) fn and_count(a: &[u64], b: &[u64]) -> u64 {
        unsafe { and_count_popcnt(a, b) }
    }

    pub(super) fn count(a: &[u64]) -> u64 {
        unsafe { count_popcnt(a) }
    }
}

#[cfg(target_arch = "aarch64")]
mod native {
    use super::{Native, Span};

    pub(super) fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) -> (u64, Span) {
        super::and_into_words::<Native>(dst, a, b)
    }

    pub(super) fn and_count(a: &[u64], b: &[u64]) -> u64 {
        super::and_count_words::<Native>(a, b)
    }

    pub(super) fn count(a: &[u64]) -> u64 {
        super::count_words::<Native>(a)
    }
}
