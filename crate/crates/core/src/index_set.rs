//! Sorted, duplicate-free sets of 0-based positions.

use std::fmt;

use crate::gf2::Gf2Error;

/// A strictly increasing list of 0-based indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Wraps `indices`, rejecting anything that is not strictly increasing.
    pub fn new(indices: Vec<usize>) -> Result<Self, Gf2Error> {
        if let Some(w) = indices.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Gf2Error::NotStrictlyIncreasing { position: w + 1 });
        }
        Ok(IndexSet(indices))
    }

    /// Sorts and deduplicates arbitrary input.
    pub fn from_unsorted<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Errors unless every index is `< bound`.
    pub fn check_bound(&self, bound: usize) -> Result<(), Gf2Error> {
        match self.max() {
            Some(m) if m >= bound => Err(Gf2Error::IndexOutOfRange { index: m, bound }),
            _ => Ok(()),
        }
    }

    /// `{0..n} \ self`.
    pub fn complement(&self, n: usize) -> IndexSet {
        IndexSet((0..n).filter(|&i| !self.contains(i)).collect())
    }

    /// `self \ other`.
    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet::from_unsorted(self.iter().chain(other.iter()))
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for i in self.iter() {
            m[i] = true;
        }
        m
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
