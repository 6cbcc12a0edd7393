//! Immutable bit vector with rank/select directories.
//!
//! Rank uses a two-level directory: one absolute 64-bit count per 512-bit
//! superblock and one 16-bit count per 64-bit word relative to its
//! superblock. Select binary-searches the superblock counts inside a window
//! narrowed by sampled hints (one per 8192 occurrences), then scans at most
//! eight words. Rank is therefore constant time and select logarithmic, which
//! is the cost model the query planner assumes.
//!
//! Positions are 0-based, `rank` counts over the half-open prefix `[0, i)`
//! and `select` ordinals are 1-based.

use std::fmt;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

const WORD_BITS: usize = 64;
const WORDS_PER_SUPER: usize = 8;
const SUPER_BITS: usize = WORD_BITS * WORDS_PER_SUPER;
const SELECT_SAMPLE: usize = 8192;

#[derive(Clone, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    ones: usize,
    supers: Vec<u64>,
    blocks: Vec<u16>,
    hints1: Vec<u32>,
    hints0: Vec<u32>,
}

/// Append-only builder; `finish` freezes the bits and computes directories.
#[derive(Debug, Default, Clone)]
pub struct BitVectorBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitVectorBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(WORD_BITS)),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD_BITS) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % WORD_BITS);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> BitVector {
        BitVector::from_words(self.words, self.len)
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut b = BitVectorBuilder::new();
        for bit in iter {
            b.push(bit);
        }
        b.finish()
    }
}

impl BitVector {
    pub fn new(bits: &[bool]) -> Self {
        bits.iter().copied().collect()
    }

    /// Parses a string of `0`/`1` characters; any other character is skipped.
    pub fn from_bit_str(s: &str) -> Self {
        s.chars()
            .filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect()
    }

    fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.truncate(len.div_ceil(WORD_BITS));
        if !len.is_multiple_of(WORD_BITS) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % WORD_BITS)) - 1;
            }
        }
        let n_super = words.len().div_ceil(WORDS_PER_SUPER);
        let mut supers = Vec::with_capacity(n_super + 1);
        let mut blocks = Vec::with_capacity(words.len());
        let mut hints1 = Vec::new();
        let mut hints0 = Vec::new();
        let mut total = 0usize;
        for (w, &word) in words.iter().enumerate() {
            if w % WORDS_PER_SUPER == 0 {
                supers.push(total as u64);
            }
            let sb = w / WORDS_PER_SUPER;
            blocks.push((total - supers[sb] as usize) as u16);
            let ones = word.count_ones() as usize;
            let zeros = (len - w * WORD_BITS).min(WORD_BITS) - ones;
            let zeros_before = w * WORD_BITS - total;
            // A sample is recorded for every occurrence rank r with r % SAMPLE == 0.
            while hints1.len() * SELECT_SAMPLE < total + ones {
                hints1.push(sb as u32);
            }
            while hints0.len() * SELECT_SAMPLE < zeros_before + zeros {
                hints0.push(sb as u32);
            }
            total += ones;
        }
        supers.push(total as u64);
        BitVector {
            words,
            len,
            ones: total,
            supers,
            blocks,
            hints1,
            hints0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    /// Bits spent on the rank/select directories (not counting the payload).
    pub fn directory_bits(&self) -> usize {
        self.supers.len() * 64
            + self.blocks.len() * 16
            + (self.hints0.len() + self.hints1.len()) * 32
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn access(&self, i: usize) -> Result<bool> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len,
            });
        }
        Ok(self.get(i))
    }

    /// Number of ones in `[0, i)`. Requires `i <= len`.
    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        debug_assert!(i <= self.len);
        if i == self.len {
            return self.ones;
        }
        let w = i / WORD_BITS;
        let base = self.supers[w / WORDS_PER_SUPER] as usize + self.blocks[w] as usize;
        let mask = (1u64 << (i % WORD_BITS)) - 1;
        base + (self.words[w] & mask).count_ones() as usize
    }

    #[inline]
    pub fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }

    #[inline]
    pub fn rank_bit(&self, bit: bool, i: usize) -> usize {
        if bit {
            self.rank1(i)
        } else {
            self.rank0(i)
        }
    }

    pub fn rank(&self, bit: bool, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len,
            });
        }
        Ok(self.rank_bit(bit, i))
    }

    /// Position of the `k`-th one (1-based).
    pub fn select1(&self, k: usize) -> Option<usize> {
        if k == 0 || k > self.ones {
            return None;
        }
        Some(self.select_impl::<true>(k - 1))
    }

    /// Position of the `k`-th zero (1-based).
    pub fn select0(&self, k: usize) -> Option<usize> {
        if k == 0 || k > self.count_zeros() {
            return None;
        }
        Some(self.select_impl::<false>(k - 1))
    }

    #[inline]
    pub fn select_bit(&self, bit: bool, k: usize) -> Option<usize> {
        if bit {
            self.select1(k)
        } else {
            self.select0(k)
        }
    }

    pub fn select(&self, bit: bool, k: usize) -> Result<usize> {
        self.select_bit(bit, k).ok_or(Error::NotFound {
            ordinal: k,
            available: if bit {
                self.count_ones()
            } else {
                self.count_zeros()
            },
        })
    }

    #[inline]
    fn super_count<const ONE: bool>(&self, s: usize) -> usize {
        let ones = self.supers[s] as usize;
        if ONE {
            ones
        } else {
            (s * SUPER_BITS).min(self.len) - ones
        }
    }

    /// Finds the position holding the occurrence with 0-based rank `r`.
    fn select_impl<const ONE: bool>(&self, r: usize) -> usize {
        let hints = if ONE { &self.hints1 } else { &self.hints0 };
        let n_super = self.supers.len() - 1;
        let h = r / SELECT_SAMPLE;
        let lo = hints[h] as usize;
        let hi = hints.get(h + 1).map_or(n_super, |&x| x as usize + 1);
        // Last superblock in [lo, hi) whose preceding count is <= r.
        let (mut a, mut b) = (lo, hi);
        while b - a > 1 {
            let mid = (a + b) / 2;
            if self.super_count::<ONE>(mid) <= r {
                a = mid;
            } else {
                b = mid;
            }
        }
        let s = a;
        let mut remaining = r - self.super_count::<ONE>(s);
        let first = s * WORDS_PER_SUPER;
        let last = (first + WORDS_PER_SUPER).min(self.words.len());
        for w in first..last {
            let word = if ONE { self.words[w] } else { !self.words[w] };
            let c = word.count_ones() as usize;
            if remaining < c {
                return w * WORD_BITS + select_in_word(word, remaining as u32) as usize;
            }
            remaining -= c;
        }
        unreachable!("select directory inconsistent")
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Standalone serialized form (the same bytes the container uses).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write_to(&mut w);
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, 0);
        let v = Self::read_from(&mut r)?;
        if !r.is_empty() {
            return r.fail("trailing bytes after bit vector");
        }
        Ok(v)
    }

    pub(crate) fn write_to(&self, w: &mut Writer) {
        w.u64(self.len as u64);
        for &word in &self.words {
            w.u64(word);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let len = r.u64()? as usize;
        let n_words = len.div_ceil(WORD_BITS);
        if n_words.saturating_mul(8) > r.remaining() {
            return r.fail(format!("bit vector of {len} bits exceeds section"));
        }
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(r.u64()?);
        }
        if !len.is_multiple_of(WORD_BITS)
            && words.last().is_some_and(|&x| x >> (len % WORD_BITS) != 0)
        {
            return r.fail("nonzero padding bits");
        }
        Ok(BitVector::from_words(words, len))
    }
}

#[inline]
fn select_in_word(mut word: u64, mut r: u32) -> u32 {
    // Skip whole bytes first, then clear low set bits.
    let mut shift = 0;
    loop {
        let c = (word & 0xff).count_ones();
        if r < c {
            break;
        }
        r -= c;
        word >>= 8;
        shift += 8;
    }
    for _ in 0..r {
        word &= word - 1;
    }
    shift + word.trailing_zeros()
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitVector({self})")
        } else {
            write!(f, "BitVector(len={}, ones={})", self.len, self.ones)
        }
    }
}
