//! The polar transform `G = R F^{(x)n}` and encoding.
//!
//! `F = [[1,0],[1,1]]` and `R` is the bit-reversal permutation on rows.
//! Because `R` commutes with the Kronecker power, `u G` is computed as the
//! natural-order butterfly `u F^{(x)n}` followed by a bit-reversal of the
//! output positions.

use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use crate::index_set::IndexSet;

/// Largest supported `n` (block length `2^20`).
pub const MAX_LOG_LEN: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolarError {
    #[error("log block length {0} exceeds the supported maximum {MAX_LOG_LEN}")]
    LogLengthTooLarge(u32),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("message length {found} does not match {expected}")]
    MessageLength { expected: usize, found: usize },
    #[error("frozen value vector has length {found}, expected {expected}")]
    FrozenLength { expected: usize, found: usize },
    #[error("frozen value set on information position {0}")]
    FrozenOnInfo(usize),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Block length `N = 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeParams {
    n: u32,
}

impl CodeParams {
    pub fn new(n: u32) -> Result<Self, PolarError> {
        if n > MAX_LOG_LEN {
            return Err(PolarError::LogLengthTooLarge(n));
        }
        Ok(CodeParams { n })
    }

    /// Params for a block length that must be a power of two.
    pub fn from_len(len: usize) -> Result<Self, PolarError> {
        if !len.is_power_of_two() {
            return Err(PolarError::NotPowerOfTwo(len));
        }
        CodeParams::new(len.trailing_zeros())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        1 << self.n
    }
}

/// A polar code: information set `A` plus an explicit value for every frozen
/// position. Frozen values need not be zero; coset decoding fixes them to
/// message bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarCodeSpec {
    params: CodeParams,
    info_set: IndexSet,
    info_mask: Vec<bool>,
    // length N, zero on the information set
    frozen: BitVector,
}

impl PolarCodeSpec {
    /// All frozen bits zero.
    pub fn new(params: CodeParams, info_set: IndexSet) -> Result<Self, PolarError> {
        let frozen = BitVector::zeros(params.len());
        Self::with_frozen(params, info_set, frozen)
    }

    /// `frozen` has length `N`; its entries on `info_set` must be zero.
    pub fn with_frozen(
        params: CodeParams,
        info_set: IndexSet,
        frozen: BitVector,
    ) -> Result<Self, PolarError> {
        let len = params.len();
        info_set.check_bound(len)?;
        if frozen.len() != len {
            return Err(PolarError::FrozenLength { expected: len, found: frozen.len() });
        }
        if let Some(i) = info_set.iter().find(|&i| frozen.get(i)) {
            return Err(PolarError::FrozenOnInfo(i));
        }
        let info_mask = info_set.mask(len);
        Ok(PolarCodeSpec { params, info_set, info_mask, frozen })
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn info_set(&self) -> &IndexSet {
        &self.info_set
    }

    pub fn dimension(&self) -> usize {
        self.info_set.len()
    }

    #[inline]
    pub fn is_info(&self, i: usize) -> bool {
        self.info_mask[i]
    }

    #[inline]
    pub fn frozen_value(&self, i: usize) -> bool {
        self.frozen.get(i)
    }

    /// Frozen assignment over all `N` positions (zero on `A`).
    pub fn frozen_values(&self) -> &BitVector {
        &self.frozen
    }

    /// Full input vector `u` with `message` on `A` and frozen values elsewhere.
    pub fn assemble(&self, message: &BitVector) -> Result<BitVector, PolarError> {
        if message.len() != self.dimension() {
            return Err(PolarError::MessageLength { expected: self.dimension(), found: message.len() });
        }
        let mut u = self.frozen.clone();
        for (k, i) in self.info_set.iter().enumerate() {
            u.set(i, message.get(k));
        }
        Ok(u)
    }
}

/// `perm[i]` is `i` with its `n`-bit binary representation reversed.
pub fn bit_reversal_permutation(n: u32) -> Vec<usize> {
    let len = 1usize << n;
    (0..len).map(|i| reverse_bits(i, n)).collect()
}

#[inline]
pub(crate) fn reverse_bits(i: usize, n: u32) -> usize {
    if n == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - n)
    }
}

/// `G = R F^{(x)n}` as an explicit `N x N` matrix.
pub fn generator_matrix(n: u32) -> BitMatrix {
    let len = 1usize << n;
    let mut g = BitMatrix::zeros(len, len);
    for i in 0..len {
        let r = reverse_bits(i, n);
        // F^{(x)n}[r][c] = 1 iff the ones of c are a subset of the ones of r
        for c in 0..len {
            if c & !r == 0 {
                g.set(i, c, true);
            }
        }
    }
    g
}

/// In-place natural-order butterfly computing `u F^{(x)n}` on 0/1 bytes.
pub(crate) fn butterfly_in_place(x: &mut [u8]) {
    let len = x.len();
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(2 * half) {
            for i in block..block + half {
                x[i] ^= x[i + half];
            }
        }
        half *= 2;
    }
}

/// `u G` on 0/1 bytes. `u.len()` must be a power of two.
pub(crate) fn transform_bytes(u: &[u8]) -> Vec<u8> {
    let n = u.len().trailing_zeros();
    let mut natural = u.to_vec();
    butterfly_in_place(&mut natural);
    (0..u.len()).map(|j| natural[reverse_bits(j, n)]).collect()
}

/// `x = u G`, via the O(N log N) butterfly.
pub fn polar_transform(u: &BitVector) -> Result<BitVector, PolarError> {
    CodeParams::from_len(u.len())?;
    let x = transform_bytes(&u.to_bits());
    Ok(BitVector::from_bits(&x)?)
}

/// Codeword for `message` placed on the information set.
pub fn encode(spec: &PolarCodeSpec, message: &BitVector) -> Result<BitVector, PolarError> {
    let u = spec.assemble(message)?;
    polar_transform(&u)
}
