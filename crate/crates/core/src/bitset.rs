//! A small growable bitset, used both for atoms (sets of closure indices)
//! and for truth sets (sets of model states).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

type Words = SmallVec<[u64; 2]>;

/// Fixed-capacity bitset. Two sets compare equal only if they have the same
/// capacity and the same members.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Words,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: smallvec![0; word_count(len)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet {
            len,
            words: smallvec![!0u64; word_count(len)],
        };
        s.trim();
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Capacity (number of addressable positions).
    pub fn capacity(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.insert(i)
        } else {
            self.remove(i)
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn union(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= *b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= !*b;
        }
    }

    pub fn complement(&self) -> BitSet {
        let mut out = BitSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.trim();
        out
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(other.words.iter()).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

/// Lexicographic order on the characteristic sequence, position 0 first,
/// absent before present.
impl Ord for BitSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.words.iter().zip(other.words.iter()) {
            if a != b {
                let diff = a ^ b;
                let low = diff.trailing_zeros();
                return if a >> low & 1 == 0 {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                };
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for BitSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

/// Deserialized sets get capacity one past their largest member; callers that
/// need a specific capacity rebuild with [`BitSet::from_indices`].
impl<'de> Deserialize<'de> for BitSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<usize> = Vec::deserialize(d)?;
        let len = v.iter().max().map_or(0, |m| m + 1);
        Ok(BitSet::from_indices(len, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut a = BitSet::new(130);
        a.insert(0);
        a.insert(64);
        a.insert(129);
        assert_eq!(a.to_vec(), vec![0, 64, 129]);
        assert_eq!(a.count(), 3);
        let c = a.complement();
        assert_eq!(c.count(), 127);
        assert!(!c.intersects(&a));
        assert_eq!(BitSet::full(130).count(), 130);
    }

    #[test]
    fn lexicographic_order() {
        let a = BitSet::from_indices(4, [1]);
        let b = BitSet::from_indices(4, [0]);
        let c = BitSet::from_indices(4, [0, 1]);
        // position 0 absent sorts first
        assert!(a < b);
        assert!(b < c);
        assert!(BitSet::new(4) < a);
    }
}
