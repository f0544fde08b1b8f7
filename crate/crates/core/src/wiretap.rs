//! Nested polar coset coding for the degraded erasure wiretap channel.
//!
//! The outer code `P(N, A)` is split into cosets of the subcode `P(N, B)`.
//! The secret picks the coset through the bits on `A \ B`; uniformly random
//! bits on `B` pick the codeword inside it. Eve's equivocation on an erasure
//! pattern `E` is `rank(H^(s)_E) - rank(H_E)`, where `H` and `H^(s)` are
//! parity-check matrices of the outer code and the subcode and the subscript
//! keeps the columns in `E`.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::channels::RngStream;
use crate::construction::{bec_reliability, select_info_set, select_secure_subset, ConstructionError};
use crate::decoder::{sc_decode_bec, DecodeError, ReceivedWord};
use crate::gf2::{BitMatrix, BitVector, Gf2Error, XorBasis};
use crate::index_set::IndexSet;
use crate::polar::{generator_matrix, polar_transform, CodeParams, PolarCodeSpec, PolarError};

/// Substream purpose tag for Eve's erasure patterns.
const PURPOSE_ERASURES: u8 = 0x20;

/// Enumeration guard for [`equivocation_bruteforce`].
pub const BRUTEFORCE_MAX_DIMENSION: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WiretapError {
    #[error("invalid wiretap parameter `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error("infeasible code sizes: |B| = {secure}, |A \\ B| = {message}, N = {len}")]
    InfeasibleSizes { secure: i64, message: i64, len: usize },
    #[error("B is not a subset of A")]
    NotNested,
    #[error("{what} has length {found}, expected {expected}")]
    Length { what: &'static str, expected: usize, found: usize },
    #[error("outer code dimension {0} exceeds the enumeration guard")]
    TooLargeToEnumerate(usize),
    #[error("equivocation differs between observations ({first} vs {other} bits)")]
    Asymmetric { first: f64, other: f64 },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// `P(N, A, B)`: codewords of `P(N, A)` partitioned into cosets of `P(N, B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedCodeSpec {
    params: CodeParams,
    a: IndexSet,
    b: IndexSet,
    message_set: IndexSet,
}

impl NestedCodeSpec {
    pub fn new(params: CodeParams, a: IndexSet, b: IndexSet) -> Result<Self, WiretapError> {
        a.check_bound(params.len())?;
        if !b.is_subset(&a) {
            return Err(WiretapError::NotNested);
        }
        let message_set = a.difference(&b);
        Ok(NestedCodeSpec { params, a, b, message_set })
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn a(&self) -> &IndexSet {
        &self.a
    }

    pub fn b(&self) -> &IndexSet {
        &self.b
    }

    /// `A \ B`, the positions carrying the secret.
    pub fn message_set(&self) -> &IndexSet {
        &self.message_set
    }

    pub fn message_len(&self) -> usize {
        self.message_set.len()
    }

    pub fn randomization_len(&self) -> usize {
        self.b.len()
    }

    /// `P(N, A)` with every frozen bit zero.
    pub fn outer_code(&self) -> PolarCodeSpec {
        PolarCodeSpec::new(self.params, self.a.clone()).expect("A validated against N")
    }
}

/// Design point and sampling parameters of a wiretap experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct WiretapConfig {
    pub e_m: f64,
    pub e_w: f64,
    pub rate: f64,
    pub n: u32,
    pub trials: u64,
    pub seed: u64,
}

impl WiretapConfig {
    /// The published design point: N = 1024, R = 0.25, e_m = 0.25, e_w = 0.5.
    pub fn fig1(trials: u64, seed: u64) -> Self {
        WiretapConfig { e_m: 0.25, e_w: 0.5, rate: 0.25, n: 10, trials, seed }
    }

    pub fn validate(&self) -> Result<(), WiretapError> {
        let bad = |key, reason: &str| Err(WiretapError::InvalidConfig { key, reason: reason.to_string() });
        if !(0.0..=1.0).contains(&self.e_m) {
            return bad("e_m", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.e_w) {
            return bad("e_w", "must lie in [0, 1]");
        }
        if self.e_w < self.e_m {
            return bad("e_w", "the wiretapper's channel must be degraded: e_w >= e_m");
        }
        if !(0.0..1.0).contains(&self.rate) {
            return bad("rate", "must lie in [0, 1)");
        }
        CodeParams::new(self.n).map_err(|e| WiretapError::InvalidConfig { key: "n", reason: e.to_string() })?;
        if self.trials == 0 {
            return bad("trials", "must be positive");
        }
        Ok(())
    }

    pub fn main_capacity(&self) -> f64 {
        1.0 - self.e_m
    }

    /// `min(R, C_M - C_W)` at wiretap erasure probability `e_w`, floored at 0.
    pub fn upper_bound(&self, e_w: f64) -> f64 {
        self.rate.min(e_w - self.e_m).max(0.0)
    }
}

/// Sizes `|B| = round(N (C_M - R))`, `|A| = |B| + round(N R)`; `A` is chosen
/// by main-channel reliability and `B` inside `A` by wiretap reliability.
pub fn build_wiretap_code(cfg: &WiretapConfig) -> Result<NestedCodeSpec, WiretapError> {
    cfg.validate()?;
    let params = CodeParams::new(cfg.n)?;
    let len = params.len();
    let secure = (len as f64 * (cfg.main_capacity() - cfg.rate)).round() as i64;
    let message = (len as f64 * cfg.rate).round() as i64;
    if secure < 0 || secure + message > len as i64 {
        return Err(WiretapError::InfeasibleSizes { secure, message, len });
    }
    let main = bec_reliability(cfg.n, cfg.e_m)?;
    let wiretap = bec_reliability(cfg.n, cfg.e_w)?;
    let a = select_info_set(&main, (secure + message) as usize)?;
    let b = select_secure_subset(&a, &wiretap, secure as usize)?;
    NestedCodeSpec::new(params, a, b)
}

/// `x = t G_B xor s G_{A\B}`, with every position outside `A` zero.
pub fn alice_encode(code: &NestedCodeSpec, s: &BitVector, t: &BitVector) -> Result<BitVector, WiretapError> {
    if s.len() != code.message_len() {
        return Err(WiretapError::Length { what: "secret", expected: code.message_len(), found: s.len() });
    }
    if t.len() != code.randomization_len() {
        return Err(WiretapError::Length {
            what: "randomization",
            expected: code.randomization_len(),
            found: t.len(),
        });
    }
    let mut u = BitVector::zeros(code.len());
    for (k, i) in code.b.iter().enumerate() {
        u.set(i, t.get(k));
    }
    for (k, i) in code.message_set.iter().enumerate() {
        u.set(i, s.get(k));
    }
    Ok(polar_transform(&u)?)
}

/// SC-decodes the outer code and keeps the bits on `A \ B`.
pub fn bob_decode(code: &NestedCodeSpec, rw: &ReceivedWord) -> Result<BitVector, WiretapError> {
    let result = sc_decode_bec(&code.outer_code(), rw)?;
    Ok(result.u_hat.select(&code.message_set)?)
}

/// Parity-check matrices `(H, H^(s))` of `P(N, A)` and `P(N, B)`.
pub fn parity_checks(code: &NestedCodeSpec) -> Result<(BitMatrix, BitMatrix), WiretapError> {
    let g = generator_matrix(code.params.n());
    let h = g.select_rows(&code.a)?.null_space_basis();
    let h_s = g.select_rows(&code.b)?.null_space_basis();
    Ok((h, h_s))
}

/// `rank(H^(s)_E) - rank(H_E)` for the erased positions `E`.
pub fn equivocation_rank(h: &BitMatrix, h_s: &BitMatrix, erased: &IndexSet) -> Result<usize, WiretapError> {
    let outer = h.select_columns(erased)?.rank();
    let sub = h_s.select_columns(erased)?.rank();
    // row-span of H lies inside the row-span of H^(s)
    debug_assert!(sub >= outer);
    Ok(sub - outer)
}

/// `H(S | Z = z)` in bits, by enumerating every `(s, t)`.
///
/// Codewords are grouped by their unerased positions. For a linear nested
/// code every observation gives the same conditional entropy; this is
/// checked for all observations and the common value returned.
pub fn equivocation_bruteforce(code: &NestedCodeSpec, erased: &IndexSet) -> Result<f64, WiretapError> {
    let dim = code.a.len();
    if dim > BRUTEFORCE_MAX_DIMENSION {
        return Err(WiretapError::TooLargeToEnumerate(dim));
    }
    erased.check_bound(code.len())?;
    let observed = erased.complement(code.len());
    let g = generator_matrix(code.params.n());
    // rows of G_A, each tagged with whether it carries a secret bit
    let rows: Vec<(BitVector, Option<usize>)> = code
        .a
        .iter()
        .map(|i| (g.row(i), code.message_set.as_slice().iter().position(|&m| m == i)))
        .collect();

    let mut groups: HashMap<BitVector, HashMap<u32, u64>> = HashMap::new();
    for word in 0u64..(1u64 << dim) {
        let mut x = BitVector::zeros(code.len());
        let mut secret = 0u32;
        for (k, (row, msg_pos)) in rows.iter().enumerate() {
            if (word >> k) & 1 == 1 {
                x.xor_assign(row)?;
                if let Some(p) = msg_pos {
                    secret |= 1 << p;
                }
            }
        }
        *groups.entry(x.select(&observed)?).or_default().entry(secret).or_default() += 1;
    }

    let mut common: Option<f64> = None;
    for counts in groups.values() {
        let total: u64 = counts.values().sum();
        // secrets absent from this group have probability zero
        let h: f64 = counts
            .values()
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum();
        match common {
            None => common = Some(h),
            Some(first) if (first - h).abs() > 1e-9 => {
                return Err(WiretapError::Asymmetric { first, other: h });
            }
            _ => {}
        }
    }
    Ok(common.unwrap_or(0.0).max(0.0))
}

/// Eve's equivocation at one swept erasure probability.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivocationReport {
    pub e_w: f64,
    pub mean_equivocation_rate: f64,
    /// Equivocation in bits for each sampled erasure pattern.
    pub per_trial: Vec<u32>,
    pub upper_bound: f64,
    pub trials: u64,
    pub a_size: usize,
    pub b_size: usize,
    pub block_length: usize,
    pub seed: u64,
}

/// Designs the code once at `cfg`, then measures Eve's equivocation rate at
/// every erasure probability in `sweep`.
///
/// Trial `t` draws one uniform per position from its own stream and erases
/// the positions whose draw falls below `e_w`, so all sweep points share the
/// same random numbers and erasure sets grow with `e_w`. Ranks are tracked
/// incrementally as columns are revealed in draw order.
pub fn run_wiretap_experiment(cfg: &WiretapConfig, sweep: &[f64]) -> Result<Vec<EquivocationReport>, WiretapError> {
    let code = build_wiretap_code(cfg)?;
    if let Some(&bad) = sweep.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(WiretapError::InvalidConfig { key: "sweep", reason: format!("{bad} outside [0, 1]") });
    }
    let (h, h_s) = parity_checks(&code)?;
    let columns = ColumnView::new(&h, &h_s);
    let len = code.len();

    let mut order: Vec<usize> = (0..sweep.len()).collect();
    order.sort_by(|&x, &y| sweep[x].total_cmp(&sweep[y]));

    let per_trial: Vec<Vec<u32>> = (0..cfg.trials)
        .into_par_iter()
        .map_init(
            || (XorBasis::new(h.rows()), XorBasis::new(h_s.rows())),
            |(outer, sub), t| {
                outer.clear();
                sub.clear();
                let draws = RngStream::for_trial(cfg.seed, t, PURPOSE_ERASURES).uniforms(len);
                let mut reveal: Vec<usize> = (0..len).collect();
                reveal.sort_by(|&x, &y| draws[x].total_cmp(&draws[y]).then(x.cmp(&y)));
                let mut out = vec![0u32; sweep.len()];
                let mut next = 0;
                for &p in &order {
                    while next < len && draws[reveal[next]] < sweep[p] {
                        let c = reveal[next];
                        outer.insert(columns.outer(c));
                        sub.insert(columns.sub(c));
                        next += 1;
                    }
                    out[p] = (sub.rank() - outer.rank()) as u32;
                }
                out
            },
        )
        .collect();

    Ok(sweep
        .iter()
        .enumerate()
        .map(|(p, &e_w)| {
            let values: Vec<u32> = per_trial.iter().map(|v| v[p]).collect();
            let total: u64 = values.iter().map(|&v| v as u64).sum();
            EquivocationReport {
                e_w,
                mean_equivocation_rate: total as f64 / (cfg.trials as f64 * len as f64),
                per_trial: values,
                upper_bound: cfg.upper_bound(e_w),
                trials: cfg.trials,
                a_size: code.a.len(),
                b_size: code.b.len(),
                block_length: len,
                seed: cfg.seed,
            }
        })
        .collect())
}

/// Columns of `H` and `H^(s)` stored as packed rows of their transposes.
struct ColumnView {
    outer_t: BitMatrix,
    sub_t: BitMatrix,
}

impl ColumnView {
    fn new(h: &BitMatrix, h_s: &BitMatrix) -> Self {
        ColumnView { outer_t: h.transpose(), sub_t: h_s.transpose() }
    }

    fn outer(&self, c: usize) -> &[u64] {
        self.outer_t.row_words(c)
    }

    fn sub(&self, c: usize) -> &[u64] {
        self.sub_t.row_words(c)
    }
}

pub fn write_sweep_csv<W: Write>(reports: &[EquivocationReport], w: &mut W) -> io::Result<()> {
    writeln!(w, "e_w,mean_equivocation_rate,upper_bound,trials,size_a,size_b,n,seed")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.e_w, r.mean_equivocation_rate, r.upper_bound, r.trials, r.a_size, r.b_size, r.block_length, r.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn toy_code() -> NestedCodeSpec {
        let cfg = WiretapConfig { e_m: 0.25, e_w: 0.5, rate: 0.25, n: 3, trials: 1, seed: 0 };
        build_wiretap_code(&cfg).unwrap()
    }

    #[test]
    fn fig1_sizes() {
        let code = build_wiretap_code(&WiretapConfig::fig1(1, 0)).unwrap();
        assert_eq!(code.b().len(), 512);
        assert_eq!(code.a().len(), 768);
        assert_eq!(code.message_len(), 256);
    }

    #[test]
    fn zero_rate_has_no_message() {
        let cfg = WiretapConfig { e_m: 0.3, e_w: 0.3, rate: 0.0, n: 6, trials: 1, seed: 0 };
        assert_eq!(build_wiretap_code(&cfg).unwrap().message_len(), 0);
    }

    #[test]
    fn infeasible_and_invalid_configs() {
        let cfg = WiretapConfig { e_m: 0.8, e_w: 0.9, rate: 0.5, n: 4, trials: 1, seed: 0 };
        assert!(matches!(build_wiretap_code(&cfg), Err(WiretapError::InfeasibleSizes { .. })));
        let cfg = WiretapConfig { e_m: 0.5, e_w: 0.4, rate: 0.1, n: 4, trials: 1, seed: 0 };
        assert!(matches!(build_wiretap_code(&cfg), Err(WiretapError::InvalidConfig { key: "e_w", .. })));
        let p = CodeParams::new(2).unwrap();
        let r = NestedCodeSpec::new(p, IndexSet::new(vec![1, 3]).unwrap(), IndexSet::new(vec![2]).unwrap());
        assert_eq!(r, Err(WiretapError::NotNested));
    }

    #[test]
    fn encoder_is_linear() {
        let code = toy_code();
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let mut rand_bits = |k: usize| BitVector::from_bools(&(0..k).map(|_| rng.gen()).collect::<Vec<bool>>());
        let zero = alice_encode(&code, &BitVector::zeros(code.message_len()), &BitVector::zeros(code.randomization_len()));
        assert!(zero.unwrap().is_zero());
        for _ in 0..20 {
            let (s1, s2) = (rand_bits(code.message_len()), rand_bits(code.message_len()));
            let (t1, t2) = (rand_bits(code.randomization_len()), rand_bits(code.randomization_len()));
            let lhs = alice_encode(&code, &s1.xor(&s2).unwrap(), &t1.xor(&t2).unwrap()).unwrap();
            let rhs = alice_encode(&code, &s1, &t1).unwrap().xor(&alice_encode(&code, &s2, &t2).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
        assert!(alice_encode(&code, &BitVector::zeros(7), &BitVector::zeros(code.randomization_len())).is_err());
    }

    #[test]
    fn bob_noiseless_and_erased() {
        let code = build_wiretap_code(&WiretapConfig::fig1(1, 0)).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..10 {
            let s = rng.random_bits(code.message_len());
            let t = rng.random_bits(code.randomization_len());
            let x = alice_encode(&code, &s, &t).unwrap();
            assert_eq!(bob_decode(&code, &ReceivedWord::clean(&x)).unwrap(), s);
        }
        let guess = bob_decode(&code, &ReceivedWord::all_erased(code.len())).unwrap();
        assert!(guess.is_zero());
    }

    #[test]
    fn parity_check_shapes() {
        let p = CodeParams::new(3).unwrap();
        let full = NestedCodeSpec::new(p, IndexSet::full(8), IndexSet::empty()).unwrap();
        let (h, h_s) = parity_checks(&full).unwrap();
        assert_eq!(h.rows(), 0);
        assert_eq!(h_s.rank(), 8);

        let code = toy_code();
        let (h, h_s) = parity_checks(&code).unwrap();
        assert_eq!(h.rank(), 8 - code.a().len());
        assert_eq!(h_s.rank(), 8 - code.b().len());
    }

    #[test]
    fn equivocation_extremes() {
        let code = toy_code();
        let (h, h_s) = parity_checks(&code).unwrap();
        assert_eq!(equivocation_rank(&h, &h_s, &IndexSet::empty()).unwrap(), 0);
        assert_eq!(equivocation_rank(&h, &h_s, &IndexSet::full(8)).unwrap(), code.message_len());
        assert_eq!(equivocation_bruteforce(&code, &IndexSet::empty()).unwrap(), 0.0);
        assert_eq!(equivocation_bruteforce(&code, &IndexSet::full(8)).unwrap(), code.message_len() as f64);
    }

    #[test]
    fn bruteforce_guard() {
        let p = CodeParams::new(5).unwrap();
        let code = NestedCodeSpec::new(p, IndexSet::full(32), IndexSet::empty()).unwrap();
        assert_eq!(equivocation_bruteforce(&code, &IndexSet::empty()), Err(WiretapError::TooLargeToEnumerate(32)));
    }

    #[test]
    fn sweep_extremes_and_incremental_agreement() {
        let cfg = WiretapConfig { e_m: 0.25, e_w: 0.5, rate: 0.25, n: 6, trials: 40, seed: 5 };
        let reports = run_wiretap_experiment(&cfg, &[1.0, 0.0, 0.4]).unwrap();
        assert_eq!(reports[1].mean_equivocation_rate, 0.0);
        let code = build_wiretap_code(&cfg).unwrap();
        assert!((reports[0].mean_equivocation_rate - code.message_len() as f64 / 64.0).abs() < 1e-15);

        // per-trial values equal the direct rank formula on the same pattern
        let (h, h_s) = parity_checks(&code).unwrap();
        for t in 0..cfg.trials {
            let draws = RngStream::for_trial(cfg.seed, t, PURPOSE_ERASURES).uniforms(64);
            let erased = IndexSet::from_unsorted((0..64).filter(|&i| draws[i] < 0.4));
            let direct = equivocation_rank(&h, &h_s, &erased).unwrap();
            assert_eq!(reports[2].per_trial[t as usize] as usize, direct);
        }
    }
}
