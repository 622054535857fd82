//! Fixed-length bit vectors used as the canonical encoding of configuration sets.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

const WORD: usize = 64;

/// Bit `i` set means configuration `i` is a member. Bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits {
    len: usize,
    words: SmallVec<[u64; 1]>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD).max(1)
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: SmallVec::from_elem(0, word_count(len)),
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits {
            len,
            words: SmallVec::from_elem(u64::MAX, word_count(len)),
        };
        b.clear_tail();
        b
    }

    /// Builds from a lattice index (frames of at most 64 configurations).
    pub fn from_mask(len: usize, mask: u64) -> Self {
        debug_assert!(len <= WORD);
        let mut b = Bits::zeros(len);
        b.words[0] = mask;
        b.clear_tail();
        b
    }

    /// The members as a lattice index. Only meaningful for `len <= 64`.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.len <= WORD);
        self.words[0]
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
        if self.len == 0 {
            self.words[0] = 0;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        *self == Bits::ones(self.len)
    }

    pub fn and(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.len, other.len);
        Bits {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn or(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.len, other.len);
        Bits {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn and_not(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.len, other.len);
        Bits {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn not(&self) -> Bits {
        let mut b = Bits {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        b.clear_tail();
        b
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }
}

/// Ordered by the numeric value of the bit vector read as an unsigned integer
/// with bit `i` weighted `2^i`.
impl Ord for Bits {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}
