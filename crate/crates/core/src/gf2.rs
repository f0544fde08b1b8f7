//! Dense bit-packed linear algebra over GF(2).
//!
//! Bits are packed little-endian into `u64` words: bit `j` of a row lives in
//! word `j / 64` at position `j % 64`. Row operations are word-parallel XORs.

use std::fmt;

use thiserror::Error;

use crate::index_set::IndexSet;

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("index list not strictly increasing at position {position}")]
    NotStrictlyIncreasing { position: usize },
    #[error("non-binary value {value} at position {position}")]
    NonBinary { position: usize, value: u8 },
    #[error("ragged rows: row {row} has {found} entries, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    /// Builds a vector from 0/1 bytes.
    pub fn from_bits(bits: &[u8]) -> Result<Self, Gf2Error> {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => v.set(i, true),
                value => return Err(Gf2Error::NonBinary { position: i, value }),
            }
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        BitVector { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector, Gf2Error> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<(), Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::DimensionMismatch { expected: self.len, found: other.len });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> Result<bool, Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::DimensionMismatch { expected: self.len, found: other.len });
        }
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        Ok(ones % 2 == 1)
    }

    /// Entries at `idx`, in index order.
    pub fn select(&self, idx: &IndexSet) -> Result<BitVector, Gf2Error> {
        idx.check_bound(self.len)?;
        let mut out = BitVector::zeros(idx.len());
        for (k, i) in idx.iter().enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for b in self.iter() {
            write!(f, "{}", b as u8)?;
        }
        write!(f, ")")
    }
}

/// A dense `rows x cols` matrix over GF(2), row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 bytes; `cols` fixes the width so that
    /// zero-row matrices keep their shape.
    pub fn from_rows(cols: usize, rows: &[Vec<u8>]) -> Result<Self, Gf2Error> {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Gf2Error::RaggedRows { row: r, expected: cols, found: row.len() });
            }
            for (c, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(r, c, true),
                    value => return Err(Gf2Error::NonBinary { position: r * cols + c, value }),
                }
            }
        }
        Ok(m)
    }

    pub fn from_row_vectors(cols: usize, rows: &[BitVector]) -> Result<Self, Gf2Error> {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Gf2Error::RaggedRows { row: r, expected: cols, found: row.len() });
            }
            m.row_words_mut(r).copy_from_slice(row.words());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) out of range");
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) out of range");
        let mask = 1u64 << (c % WORD);
        let w = &mut self.data[r * self.stride + c / WORD];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row(r).to_bits()).collect()
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// `v * M`: XOR of the rows selected by the ones of `v`.
    pub fn vec_mul(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch { expected: self.rows, found: v.len() });
        }
        let mut acc = vec![0u64; self.stride];
        for r in (0..self.rows).filter(|&r| v.get(r)) {
            for (a, b) in acc.iter_mut().zip(self.row_words(r)) {
                *a ^= b;
            }
        }
        Ok(BitVector::from_words(self.cols, acc))
    }

    /// `M * v^T`, returned as a vector of length `rows`.
    pub fn mul_vec_transpose(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let ones: u32 =
                self.row_words(r).iter().zip(v.words()).map(|(a, b)| (a & b).count_ones()).sum();
            if ones % 2 == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let prod = other.vec_mul(&self.row(r))?;
            out.row_words_mut(r).copy_from_slice(prod.words());
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn select_rows(&self, idx: &IndexSet) -> Result<BitMatrix, Gf2Error> {
        idx.check_bound(self.rows)?;
        let mut out = BitMatrix::zeros(idx.len(), self.cols);
        for (k, r) in idx.iter().enumerate() {
            let src = r * self.stride;
            out.data[k * self.stride..(k + 1) * self.stride]
                .copy_from_slice(&self.data[src..src + self.stride]);
        }
        Ok(out)
    }

    pub fn select_columns(&self, idx: &IndexSet) -> Result<BitMatrix, Gf2Error> {
        idx.check_bound(self.cols)?;
        let mut out = BitMatrix::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (k, c) in idx.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, k, true);
                }
            }
        }
        Ok(out)
    }

    /// Rank by Gaussian elimination, pivoting on the first nonzero entry of
    /// each column in turn.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelonize(false).len()
    }

    /// Reduces `self` in place to row echelon form (fully reduced when
    /// `reduce_above`), returning the pivot column of each leading row.
    fn echelonize(&mut self, reduce_above: bool) -> Vec<usize> {
        let stride = self.stride;
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (w, mask) = (c / WORD, 1u64 << (c % WORD));
            let Some(p) = (rank..self.rows).find(|&r| self.data[r * stride + w] & mask != 0) else {
                continue;
            };
            if p != rank {
                for k in 0..stride {
                    self.data.swap(p * stride + k, rank * stride + k);
                }
            }
            let start = if reduce_above { 0 } else { rank + 1 };
            for r in start..self.rows {
                if r != rank && self.data[r * stride + w] & mask != 0 {
                    // columns before `w` words are already zero in the pivot row
                    for k in w..stride {
                        let bit = self.data[rank * stride + k];
                        self.data[r * stride + k] ^= bit;
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    /// A basis of `{h : M h^T = 0}`, one basis vector per row.
    pub fn null_space_basis(&self) -> BitMatrix {
        let mut m = self.clone();
        let pivots = m.echelonize(true);
        let is_pivot = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (k, &f) in free.iter().enumerate() {
            basis.set(k, f, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, f) {
                    basis.set(k, p, true);
                }
            }
        }
        basis
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `v * M` over GF(2).
pub fn vec_mat_mul(v: &BitVector, m: &BitMatrix) -> Result<BitVector, Gf2Error> {
    m.vec_mul(v)
}

/// Incrementally maintained span of vectors of a fixed length.
///
/// Each stored vector has a distinct lowest set bit, so inserting a vector
/// costs at most one XOR per basis element. Used where columns of a fixed
/// matrix are revealed one at a time and the running rank is needed.
#[derive(Clone, Debug)]
pub struct XorBasis {
    len: usize,
    stride: usize,
    vectors: Vec<u64>,
    owner: Vec<u32>,
    rank: usize,
}

const NO_OWNER: u32 = u32::MAX;

impl XorBasis {
    pub fn new(len: usize) -> Self {
        XorBasis {
            len,
            stride: words_for(len),
            vectors: Vec::new(),
            owner: vec![NO_OWNER; len],
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn clear(&mut self) {
        self.vectors.clear();
        self.owner.fill(NO_OWNER);
        self.rank = 0;
    }

    /// Adds `words` (packed like a matrix row of width `len`) to the span.
    /// Returns true when the rank grew.
    pub fn insert(&mut self, words: &[u64]) -> bool {
        debug_assert_eq!(words.len(), self.stride);
        let mut v = words.to_vec();
        let mut w = 0;
        while w < self.stride {
            if v[w] == 0 {
                w += 1;
                continue;
            }
            let bit = w * WORD + v[w].trailing_zeros() as usize;
            let owner = self.owner[bit];
            if owner == NO_OWNER {
                self.owner[bit] = self.rank as u32;
                self.vectors.extend_from_slice(&v);
                self.rank += 1;
                return true;
            }
            let base = owner as usize * self.stride;
            for (x, y) in v[w..].iter_mut().zip(&self.vectors[base + w..base + self.stride]) {
                *x ^= y;
            }
        }
        false
    }

    pub fn vector_len(&self) -> usize {
        self.len
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f() -> BitMatrix {
        BitMatrix::from_rows(2, &[vec![1, 0], vec![1, 1]]).unwrap()
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> BitMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, rng.gen());
            }
        }
        m
    }

    #[test]
    fn vec_mat_mul_small_cases() {
        let v = BitVector::from_bits(&[1, 0]).unwrap();
        assert_eq!(vec_mat_mul(&v, &BitMatrix::identity(2)).unwrap().to_bits(), vec![1, 0]);
        let v = BitVector::from_bits(&[1, 1]).unwrap();
        assert_eq!(vec_mat_mul(&v, &f()).unwrap().to_bits(), vec![0, 1]);
        let bad = BitVector::zeros(3);
        assert!(matches!(
            vec_mat_mul(&bad, &f()),
            Err(Gf2Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn rank_trivial() {
        assert_eq!(BitMatrix::identity(4).rank(), 4);
        assert_eq!(BitMatrix::zeros(3, 5).rank(), 0);
        assert_eq!(BitMatrix::zeros(0, 5).rank(), 0);
    }

    #[test]
    fn null_space_trivial() {
        let h = BitMatrix::identity(3).null_space_basis();
        assert_eq!((h.rows(), h.cols()), (0, 3));
        let h = BitMatrix::from_rows(2, &[vec![1, 1]]).unwrap().null_space_basis();
        assert_eq!(h.to_rows(), vec![vec![1, 1]]);
    }

    #[test]
    fn selection() {
        let m = BitMatrix::identity(3).select_columns(&IndexSet::new(vec![0, 2]).unwrap()).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1, 0], vec![0, 0], vec![0, 1]]);
        let r = f().select_rows(&IndexSet::new(vec![1]).unwrap()).unwrap();
        assert_eq!(r.to_rows(), vec![vec![1, 1]]);
        assert!(matches!(
            f().select_rows(&IndexSet::new(vec![2]).unwrap()),
            Err(Gf2Error::IndexOutOfRange { index: 2, bound: 2 })
        ));
        assert!(f().select_columns(&IndexSet::new(vec![0, 5]).unwrap()).is_err());
    }

    #[test]
    fn non_binary_rejected() {
        assert!(matches!(
            BitVector::from_bits(&[0, 2]),
            Err(Gf2Error::NonBinary { position: 1, value: 2 })
        ));
    }

    #[test]
    fn wide_matrix_spanning_words() {
        // 3 x 130 with a dependency hidden across word boundaries
        let mut m = BitMatrix::zeros(3, 130);
        for c in [0, 64, 129] {
            m.set(0, c, true);
        }
        for c in [64, 100] {
            m.set(1, c, true);
        }
        for c in [0, 100, 129] {
            m.set(2, c, true);
        }
        assert_eq!(m.rank(), 2);
        let h = m.null_space_basis();
        assert_eq!(h.rows(), 128);
        assert!(m.mul(&h.transpose()).unwrap().is_zero());
    }

    #[test]
    fn xor_basis_tracks_rank() {
        let m = BitMatrix::from_rows(3, &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let mut b = XorBasis::new(3);
        assert!(b.insert(m.row_words(0)));
        assert!(b.insert(m.row_words(1)));
        assert!(!b.insert(m.row_words(2)));
        assert_eq!(b.rank(), m.rank());
        b.clear();
        assert_eq!(b.rank(), 0);
    }

    proptest! {
        #[test]
        fn rank_of_transpose(rows in 1usize..12, cols in 1usize..80, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, seed);
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn null_space_dimension(rows in 1usize..12, cols in 1usize..80, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, seed);
            let h = m.null_space_basis();
            prop_assert_eq!(h.rank() + m.rank(), cols);
            prop_assert_eq!(h.rank(), h.rows());
            prop_assert!(m.mul(&h.transpose()).unwrap().is_zero());
        }

        #[test]
        fn vec_mul_is_linear(rows in 1usize..20, cols in 1usize..90, seed in any::<u64>(),
                             u in prop::collection::vec(any::<bool>(), 20), v in prop::collection::vec(any::<bool>(), 20)) {
            let m = random_matrix(rows, cols, seed);
            let u = BitVector::from_bools(&u[..rows]);
            let v = BitVector::from_bools(&v[..rows]);
            let lhs = m.vec_mul(&u.xor(&v).unwrap()).unwrap();
            let rhs = m.vec_mul(&u).unwrap().xor(&m.vec_mul(&v).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn xor_basis_matches_elimination(rows in 1usize..30, cols in 1usize..140, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, seed);
            let mut b = XorBasis::new(cols);
            for r in 0..rows {
                b.insert(m.row_words(r));
            }
            prop_assert_eq!(b.rank(), m.rank());
        }
    }
}
