//! Successive cancellation decoding.
//!
//! Two message types share one recursion: three-valued erasure messages,
//! which are exact on the BEC, and log-likelihood ratios for general
//! symmetric channels. The recursion decodes `u` in natural order against the
//! channel output permuted by bit-reversal, matching `G = R F^{(x)n}`.

use thiserror::Error;

use crate::gf2::BitVector;
use crate::polar::{reverse_bits, PolarCodeSpec};

/// Magnitude cap applied to every LLR inside the decoder.
pub const LLR_CAP: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("received word has length {found}, code length is {expected}")]
    Length { expected: usize, found: usize },
    #[error("non-finite LLR {value} at position {position}")]
    NonFinite { position: usize, value: f64 },
}

/// One erasure-channel output symbol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    #[default]
    Erased,
}

impl Symbol {
    pub fn known(bit: bool) -> Self {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            Symbol::Erased => None,
        }
    }

    pub fn is_erased(self) -> bool {
        self == Symbol::Erased
    }

    /// `erased -> 0`, `0 -> +cap`, `1 -> -cap`.
    pub fn to_llr(self) -> f64 {
        match self {
            Symbol::Zero => LLR_CAP,
            Symbol::One => -LLR_CAP,
            Symbol::Erased => 0.0,
        }
    }
}

/// Output of an erasure channel over `{0, 1, erased}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReceivedWord {
    symbols: Vec<Symbol>,
}

impl ReceivedWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        ReceivedWord { symbols }
    }

    /// An unerased copy of `x`.
    pub fn clean(x: &BitVector) -> Self {
        ReceivedWord { symbols: x.iter().map(Symbol::known).collect() }
    }

    pub fn all_erased(len: usize) -> Self {
        ReceivedWord { symbols: vec![Symbol::Erased; len] }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbols_mut(&mut self) -> &mut [Symbol] {
        &mut self.symbols
    }

    pub fn erased_count(&self) -> usize {
        self.symbols.iter().filter(|s| s.is_erased()).count()
    }

    pub fn erased_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.symbols[i].is_erased()).collect()
    }

    pub fn to_llrs(&self) -> LlrWord {
        LlrWord { llrs: self.symbols.iter().map(|s| s.to_llr()).collect() }
    }
}

/// Channel LLRs `ln P(y|0)/P(y|1)`, one per code position.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrWord {
    llrs: Vec<f64>,
}

impl LlrWord {
    pub fn new(llrs: Vec<f64>) -> Self {
        LlrWord { llrs }
    }

    pub fn len(&self) -> usize {
        self.llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.llrs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub u_hat: BitVector,
    /// `u_hat` restricted to the information set.
    pub info_bits: BitVector,
    /// Information decisions made without evidence (erased, or LLR exactly 0).
    pub undetermined_count: usize,
}

/// Message passed along the decoding tree.
pub(crate) trait Belief: Copy + Default {
    /// Belief about `a xor b`.
    fn check(a: Self, b: Self) -> Self;
    /// Belief about `v` given `a` observes `v xor known` and `b` observes `v`.
    fn combine(a: Self, b: Self, known: u8) -> Self;
}

impl Belief for Symbol {
    #[inline]
    fn check(a: Self, b: Self) -> Self {
        match (a.bit(), b.bit()) {
            (Some(x), Some(y)) => Symbol::known(x ^ y),
            _ => Symbol::Erased,
        }
    }

    // a known symbol on the upper branch takes precedence
    #[inline]
    fn combine(a: Self, b: Self, known: u8) -> Self {
        match a.bit() {
            Some(x) => Symbol::known(x ^ (known == 1)),
            None => b,
        }
    }
}

/// Exact LLR of the XOR of two independent bits (the tanh rule, written in
/// its overflow-free log form).
#[inline]
pub fn llr_check(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let v = sign * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
    v.clamp(-LLR_CAP, LLR_CAP)
}

#[derive(Clone, Copy, Default, Debug, PartialEq)]
pub(crate) struct Llr(pub f64);

impl Belief for Llr {
    #[inline]
    fn check(a: Self, b: Self) -> Self {
        Llr(llr_check(a.0, b.0))
    }

    #[inline]
    fn combine(a: Self, b: Self, known: u8) -> Self {
        let v = if known == 1 { b.0 - a.0 } else { b.0 + a.0 };
        Llr(v.clamp(-LLR_CAP, LLR_CAP))
    }
}

/// Reusable buffers for repeated decodes of one block length.
pub(crate) struct ScScratch<M> {
    n: u32,
    beliefs: Vec<M>,
    partial: Vec<u8>,
}

impl<M: Belief> ScScratch<M> {
    pub(crate) fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        ScScratch { n: len.trailing_zeros(), beliefs: vec![M::default(); 2 * len], partial: vec![0; len] }
    }

    /// Runs the SC recursion over `channel` (in code-position order).
    /// `decide(i, belief)` returns the bit used for `u_i` in all later
    /// decisions.
    pub(crate) fn run<D: FnMut(usize, M) -> u8>(&mut self, channel: &[M], decide: &mut D) {
        let len = channel.len();
        debug_assert_eq!(len, 1 << self.n);
        for k in 0..len {
            self.beliefs[len + k] = channel[reverse_bits(k, self.n)];
        }
        node(&mut self.beliefs, len, &mut self.partial, 0, decide);
    }
}

fn node<M: Belief, D: FnMut(usize, M) -> u8>(
    beliefs: &mut [M],
    m: usize,
    out: &mut [u8],
    u_base: usize,
    decide: &mut D,
) {
    // level of width m lives at beliefs[m..2m]
    if m == 1 {
        out[0] = decide(u_base, beliefs[1]);
        return;
    }
    let half = m / 2;
    {
        let (lo, hi) = beliefs.split_at_mut(m);
        let (input, child) = (&hi[..m], &mut lo[half..]);
        for i in 0..half {
            child[i] = M::check(input[i], input[i + half]);
        }
    }
    node(beliefs, half, &mut out[..half], u_base, decide);
    {
        let (lo, hi) = beliefs.split_at_mut(m);
        let (input, child) = (&hi[..m], &mut lo[half..]);
        for i in 0..half {
            child[i] = M::combine(input[i], input[i + half], out[i]);
        }
    }
    node(beliefs, half, &mut out[half..m], u_base + half, decide);
    for i in 0..half {
        out[i] ^= out[i + half];
    }
}

fn finish(spec: &PolarCodeSpec, u_hat: Vec<u8>, undetermined_count: usize) -> DecodeResult {
    let info: Vec<u8> = spec.info_set().iter().map(|i| u_hat[i]).collect();
    DecodeResult {
        u_hat: BitVector::from_bits(&u_hat).expect("decisions are binary"),
        info_bits: BitVector::from_bits(&info).expect("decisions are binary"),
        undetermined_count,
    }
}

/// SC decoding over an erasure channel with exact three-valued messages.
/// Erased information decisions are set to 0 and counted.
pub fn sc_decode_bec(spec: &PolarCodeSpec, rw: &ReceivedWord) -> Result<DecodeResult, DecodeError> {
    if rw.len() != spec.len() {
        return Err(DecodeError::Length { expected: spec.len(), found: rw.len() });
    }
    let mut scratch = ScScratch::<Symbol>::new(spec.len());
    Ok(decode_bec_with(spec, rw.symbols(), &mut scratch))
}

pub(crate) fn decode_bec_with(
    spec: &PolarCodeSpec,
    symbols: &[Symbol],
    scratch: &mut ScScratch<Symbol>,
) -> DecodeResult {
    let mut u_hat = vec![0u8; spec.len()];
    let mut undetermined = 0;
    scratch.run(symbols, &mut |i, s: Symbol| {
        let bit = if !spec.is_info(i) {
            spec.frozen_value(i)
        } else {
            s.bit().unwrap_or_else(|| {
                undetermined += 1;
                false
            })
        };
        u_hat[i] = bit as u8;
        bit as u8
    });
    finish(spec, u_hat, undetermined)
}

/// SC decoding from channel LLRs. Inputs are clamped to `±LLR_CAP`; a
/// decision LLR of exactly 0 resolves to 0.
pub fn sc_decode_llr(spec: &PolarCodeSpec, rw: &LlrWord) -> Result<DecodeResult, DecodeError> {
    if rw.len() != spec.len() {
        return Err(DecodeError::Length { expected: spec.len(), found: rw.len() });
    }
    if let Some((position, &value)) = rw.values().iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(DecodeError::NonFinite { position, value });
    }
    let channel: Vec<Llr> = rw.values().iter().map(|&v| Llr(v.clamp(-LLR_CAP, LLR_CAP))).collect();
    let mut scratch = ScScratch::<Llr>::new(spec.len());
    let mut u_hat = vec![0u8; spec.len()];
    let mut undetermined = 0;
    scratch.run(&channel, &mut |i, l: Llr| {
        let bit = if !spec.is_info(i) {
            spec.frozen_value(i) as u8
        } else {
            if l.0 == 0.0 {
                undetermined += 1;
            }
            (l.0 < 0.0) as u8
        };
        u_hat[i] = bit;
        bit
    });
    Ok(finish(spec, u_hat, undetermined))
}
