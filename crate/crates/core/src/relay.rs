//! Block-Markov decode-and-forward over a physically degraded,
//! receiver-orthogonal relay channel with erasure links.
//!
//! The source sends `B_count` codewords of a nested code `P(N, A, B)` in
//! `B_count + 1` blocks. The relay decodes all of `A` from its own (better)
//! observation and, one block later, forwards the bits on `A \ B` with a
//! separate polar code over the relay-destination link. The destination uses
//! those bits as frozen values to pick the coset, then decodes the stored
//! direct observation of the previous block inside it.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{bec_sample, cascade_erasure, ChannelError, RngStream};
use crate::construction::{bec_reliability, largest_within_budget, ConstructionError, ReliabilityProfile};
use crate::decoder::{decode_bec_with, ScScratch, Symbol};
use crate::gf2::BitVector;
use crate::index_set::IndexSet;
use crate::polar::{encode, CodeParams, PolarCodeSpec, PolarError};
use crate::wiretap::{NestedCodeSpec, WiretapError};

const PURPOSE_MESSAGE: u8 = 0x30;
const PURPOSE_SR: u8 = 0x31;
const PURPOSE_DEGRADE: u8 = 0x32;
const PURPOSE_RD: u8 = 0x33;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelayError {
    #[error("invalid relay parameter `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error("infeasible scheme: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Wiretap(#[from] WiretapError),
}

/// Erasure probabilities of the three links. The direct link is the cascade
/// of the source-relay link and an extra erasure stage with `e_deg`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelayChannelSpec {
    e_sr: f64,
    e_deg: f64,
    e_rd: f64,
}

impl RelayChannelSpec {
    pub fn new(e_sr: f64, e_deg: f64, e_rd: f64) -> Result<Self, RelayError> {
        for (key, v) in [("e_sr", e_sr), ("e_deg", e_deg), ("e_rd", e_rd)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(RelayError::InvalidConfig { key, reason: format!("{v} outside [0, 1]") });
            }
        }
        Ok(RelayChannelSpec { e_sr, e_deg, e_rd })
    }

    /// Picks `e_deg` so that the direct link has erasure probability `e_sd`.
    pub fn from_direct(e_sr: f64, e_sd: f64, e_rd: f64) -> Result<Self, RelayError> {
        if !(e_sr..=1.0).contains(&e_sd) {
            return Err(RelayError::InvalidConfig {
                key: "e_sd",
                reason: format!("{e_sd} must lie in [e_sr, 1] for physical degradedness"),
            });
        }
        let e_deg = if e_sr >= 1.0 { 0.0 } else { (e_sd - e_sr) / (1.0 - e_sr) };
        Self::new(e_sr, e_deg.clamp(0.0, 1.0), e_rd)
    }

    pub fn e_sr(&self) -> f64 {
        self.e_sr
    }

    pub fn e_deg(&self) -> f64 {
        self.e_deg
    }

    pub fn e_rd(&self) -> f64 {
        self.e_rd
    }

    pub fn e_sd(&self) -> f64 {
        self.e_sr + (1.0 - self.e_sr) * self.e_deg
    }

    pub fn c_sr(&self) -> f64 {
        1.0 - self.e_sr
    }

    pub fn c_sd(&self) -> f64 {
        1.0 - self.e_sd()
    }

    pub fn c_rd(&self) -> f64 {
        1.0 - self.e_rd
    }

    pub fn capacity(&self) -> f64 {
        self.c_sr().min(self.c_sd() + self.c_rd())
    }

    pub fn regime(&self) -> Regime {
        if self.c_sr() <= self.c_sd() + self.c_rd() {
            Regime::SourceRelayLimited
        } else {
            Regime::ForwardLimited
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `C_SR <= C_SD + C_RD`: `A` is as large as the relay can decode.
    SourceRelayLimited,
    /// `C_SR > C_SD + C_RD`: `A` is capped by what the destination can
    /// resolve from both of its observations.
    ForwardLimited,
}

/// An exact rational rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Rate { num: num / g, den: den / g }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelayScheme {
    source: NestedCodeSpec,
    rd_code: PolarCodeSpec,
    blocks: usize,
    regime: Regime,
}

impl RelayScheme {
    pub fn new(source: NestedCodeSpec, rd_code: PolarCodeSpec, blocks: usize, regime: Regime) -> Result<Self, RelayError> {
        if blocks == 0 {
            return Err(RelayError::InvalidConfig { key: "blocks", reason: "must be positive".into() });
        }
        if rd_code.dimension() != source.message_len() {
            return Err(RelayError::Infeasible(format!(
                "relay code carries {} bits but |A \\ B| = {}",
                rd_code.dimension(),
                source.message_len()
            )));
        }
        if rd_code.len() != source.len() {
            return Err(RelayError::Infeasible("relay code length differs from source code length".into()));
        }
        Ok(RelayScheme { source, rd_code, blocks, regime })
    }

    pub fn source(&self) -> &NestedCodeSpec {
        &self.source
    }

    pub fn rd_code(&self) -> &PolarCodeSpec {
        &self.rd_code
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `B |A| / (N (B + 1))`.
    pub fn achieved_rate(&self) -> Rate {
        let b = self.blocks as u64;
        Rate::new(b * self.source.a().len() as u64, self.source.len() as u64 * (b + 1))
    }

    /// Union bounds `(relay, relay-destination, destination)` on the three
    /// per-block decoding stages.
    pub fn stage_bounds(&self, spec: &RelayChannelSpec) -> Result<[f64; 3], RelayError> {
        let n = self.source.params().n();
        let sr = bec_reliability(n, spec.e_sr())?;
        let sd = bec_reliability(n, spec.e_sd())?;
        let rd = bec_reliability(n, spec.e_rd())?;
        Ok([
            sr.union_bound(self.source.a()),
            rd.union_bound(self.rd_code.info_set()),
            sd.union_bound(self.source.b()),
        ])
    }
}

fn rounded(x: f64, key: &'static str) -> Result<usize, RelayError> {
    if x < 0.0 || !x.is_finite() {
        return Err(RelayError::InvalidConfig { key, reason: format!("negative size {x}") });
    }
    Ok(x.round() as usize)
}

fn top(profile: &ReliabilityProfile, k: usize) -> IndexSet {
    IndexSet::from_unsorted(profile.ranking().into_iter().take(k))
}

/// `A` plus `B`, with `A` grown from `B` by source-relay reliability to `size`.
fn extend_to(b: &IndexSet, sr: &ReliabilityProfile, size: usize) -> IndexSet {
    let extra = sr.ranking().into_iter().filter(|&i| !b.contains(i)).take(size.saturating_sub(b.len()));
    b.union(&IndexSet::from_unsorted(extra))
}

fn finish_scheme(
    params: CodeParams,
    a: IndexSet,
    b: IndexSet,
    rd: &ReliabilityProfile,
    blocks: usize,
    regime: Regime,
) -> Result<RelayScheme, RelayError> {
    if !b.is_subset(&a) {
        return Err(RelayError::Infeasible("B is not nested in A".into()));
    }
    let source = NestedCodeSpec::new(params, a, b)?;
    let rd_code = PolarCodeSpec::new(params, top(rd, source.message_len()))?;
    RelayScheme::new(source, rd_code, blocks, regime)
}

/// Size-targeted construction: every target is `margin` times the
/// corresponding capacity times `N`, rounded.
pub fn build_relay_scheme(
    spec: &RelayChannelSpec,
    n: u32,
    blocks: usize,
    margin: f64,
) -> Result<RelayScheme, RelayError> {
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(RelayError::InvalidConfig { key: "margin", reason: format!("{margin} outside (0, 1]") });
    }
    let params = CodeParams::new(n)?;
    let len = params.len() as f64;
    let sr = bec_reliability(n, spec.e_sr())?;
    let sd = bec_reliability(n, spec.e_sd())?;
    let rd = bec_reliability(n, spec.e_rd())?;
    let b_target = rounded(margin * len * spec.c_sd(), "e_sd")?;
    let regime = spec.regime();
    let (a, b) = match regime {
        Regime::SourceRelayLimited => {
            let a = top(&sr, rounded(margin * len * spec.c_sr(), "e_sr")?);
            let b = a.intersection(&top(&sd, b_target));
            let limit = rounded(margin * len * spec.c_rd(), "e_rd")?;
            if a.len() - b.len() > limit {
                return Err(RelayError::Infeasible(format!(
                    "|A \\ B| = {} exceeds the relay-destination budget {limit}",
                    a.len() - b.len()
                )));
            }
            (a, b)
        }
        Regime::ForwardLimited => {
            let b = top(&sd, b_target);
            let size = rounded(margin * len * (spec.c_sd() + spec.c_rd()), "e_rd")?;
            (extend_to(&b, &sr, size), b)
        }
    };
    finish_scheme(params, a, b, &rd, blocks, regime)
}

/// Union-bound-targeted construction: each stage's information set is the
/// largest whose summed Bhattacharyya parameters stay within `budget`.
///
/// `A` is the largest such set for the source-relay link and `B` the largest
/// such subset of `A` for the direct link. When `|A \ B|` exceeds what the
/// relay-destination link can carry within budget, `A` is cut back to `B`
/// plus the most reliable remaining source-relay indices.
pub fn build_relay_scheme_for_budget(
    spec: &RelayChannelSpec,
    n: u32,
    blocks: usize,
    budget: f64,
) -> Result<RelayScheme, RelayError> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(RelayError::InvalidConfig { key: "budget", reason: format!("{budget} must be finite and >= 0") });
    }
    let params = CodeParams::new(n)?;
    let sr = bec_reliability(n, spec.e_sr())?;
    let sd = bec_reliability(n, spec.e_sd())?;
    let rd = bec_reliability(n, spec.e_rd())?;

    let sr_order = sr.ranking();
    let a = IndexSet::from_unsorted(sr_order.iter().copied().take(largest_within_budget(sr.z(), &sr_order, budget)));
    let sd_order: Vec<usize> = sd.ranking().into_iter().filter(|&i| a.contains(i)).collect();
    let b = IndexSet::from_unsorted(sd_order.iter().copied().take(largest_within_budget(sd.z(), &sd_order, budget)));
    let rd_capacity = largest_within_budget(rd.z(), &rd.ranking(), budget);

    let a = if a.len() - b.len() > rd_capacity { extend_to(&b, &sr, b.len() + rd_capacity) } else { a };
    finish_scheme(params, a, b, &rd, blocks, spec.regime())
}

/// Splits an end-to-end error target evenly over the `3 * blocks` stage
/// decodings, so the union bound over a whole transmission is `overall`.
pub fn build_relay_scheme_for_target(
    spec: &RelayChannelSpec,
    n: u32,
    blocks: usize,
    overall: f64,
) -> Result<RelayScheme, RelayError> {
    if blocks == 0 {
        return Err(RelayError::InvalidConfig { key: "blocks", reason: "must be positive".into() });
    }
    build_relay_scheme_for_budget(spec, n, blocks, overall / (3 * blocks) as f64)
}

/// Outcome of one source block in one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockOutcome {
    pub trial: u64,
    /// 1-based source block index.
    pub block: usize,
    /// Relay failed to recover all of `A`.
    pub relay_error: bool,
    /// Destination failed to recover the forwarded `A \ B` bits.
    pub rd_error: bool,
    /// Destination's final estimate of the block is wrong, or any earlier
    /// stage for this block failed.
    pub dest_error: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelayRunReport {
    pub outcomes: Vec<BlockOutcome>,
    pub trials: u64,
    /// Trials in which any source block was decoded wrongly.
    pub failed_trials: u64,
    pub overall_error_rate: f64,
    /// Fraction of source blocks the destination got wrong.
    pub block_error_rate: f64,
    pub achieved_rate: Rate,
    pub seed: u64,
}

impl RelayRunReport {
    /// Per-stage block error counts `(relay, rd, dest)`.
    pub fn stage_errors(&self) -> (usize, usize, usize) {
        let count = |f: fn(&BlockOutcome) -> bool| self.outcomes.iter().filter(|o| f(o)).count();
        (count(|o| o.relay_error), count(|o| o.rd_error), count(|o| o.dest_error))
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "trial,block,relay_error,rd_error,dest_error,achieved_rate,overall_error_rate")?;
        for o in &self.outcomes {
            writeln!(
                w,
                "{},{},{},{},{},,",
                o.trial, o.block, o.relay_error as u8, o.rd_error as u8, o.dest_error as u8
            )?;
        }
        writeln!(w, "summary,,,,,{},{}", self.achieved_rate.as_f64(), self.overall_error_rate)
    }
}

/// A stage fails when its SC decoder meets an undetermined information
/// decision or its output differs from what was sent. Counting undetermined
/// decisions even when the zero guess is lucky makes every stage's error
/// event a function of its erasure pattern alone.
fn stage_failed(undetermined: usize, estimate: &BitVector, truth: &BitVector) -> bool {
    undetermined > 0 || estimate != truth
}

/// Runs `trials` independent block-Markov transmissions.
pub fn simulate_relay(
    scheme: &RelayScheme,
    spec: &RelayChannelSpec,
    trials: u64,
    seed: u64,
) -> Result<RelayRunReport, RelayError> {
    if trials == 0 {
        return Err(RelayError::InvalidConfig { key: "trials", reason: "must be positive".into() });
    }
    let outcomes: Vec<Vec<BlockOutcome>> = (0..trials)
        .into_par_iter()
        .map_init(
            || ScScratch::<Symbol>::new(scheme.source.len()),
            |scratch, t| run_trial(scheme, spec, seed, t, scratch),
        )
        .collect::<Result<_, _>>()?;
    let failed_trials = outcomes.iter().filter(|blocks| blocks.iter().any(|o| o.dest_error)).count() as u64;
    let outcomes: Vec<BlockOutcome> = outcomes.into_iter().flatten().collect();
    let failed_blocks = outcomes.iter().filter(|o| o.dest_error).count();
    Ok(RelayRunReport {
        block_error_rate: failed_blocks as f64 / outcomes.len().max(1) as f64,
        outcomes,
        trials,
        failed_trials,
        overall_error_rate: failed_trials as f64 / trials as f64,
        achieved_rate: scheme.achieved_rate(),
        seed,
    })
}

fn run_trial(
    scheme: &RelayScheme,
    spec: &RelayChannelSpec,
    seed: u64,
    trial: u64,
    scratch: &mut ScScratch<Symbol>,
) -> Result<Vec<BlockOutcome>, RelayError> {
    let source = &scheme.source;
    let outer = source.outer_code();
    let params = source.params();
    let (a, b, forwarded_set) = (source.a(), source.b(), source.message_set());
    // positions of A \ B within the A-ordered message
    let fwd_in_a: Vec<usize> = forwarded_set.iter().map(|i| a.as_slice().binary_search(&i).unwrap()).collect();

    let mut msg_rng = RngStream::for_trial(seed, trial, PURPOSE_MESSAGE);
    let mut sr_rng = RngStream::for_trial(seed, trial, PURPOSE_SR);
    let mut deg_rng = RngStream::for_trial(seed, trial, PURPOSE_DEGRADE);
    let mut rd_rng = RngStream::for_trial(seed, trial, PURPOSE_RD);

    let mut out = Vec::with_capacity(scheme.blocks);
    // (message, direct observation, relay estimate of A \ B, relay failed)
    let mut pending: Option<(BitVector, Vec<Symbol>, BitVector, bool)> = None;

    // block k = 1..=B carries source codeword k; block B + 1 only the relay
    for k in 1..=scheme.blocks + 1 {
        let mut current = None;
        if k <= scheme.blocks {
            let message = msg_rng.random_bits(a.len());
            let x = encode(&outer, &message)?;
            let y1 = bec_sample(&x, spec.e_sr(), &mut sr_rng)?;
            let y_direct = cascade_erasure(&y1, spec.e_deg(), &mut deg_rng)?;
            let relay = decode_bec_with(&outer, y1.symbols(), scratch);
            let relay_failed = stage_failed(relay.undetermined_count, &relay.info_bits, &message);
            let forward = BitVector::from_bools(&fwd_in_a.iter().map(|&p| relay.info_bits.get(p)).collect::<Vec<_>>());
            current = Some((message, y_direct.symbols().to_vec(), forward, relay_failed));
        }

        if let Some((message, y_direct, forward, relay_failed)) = pending.take() {
            // relay -> destination, carrying block k-1's A \ B
            let x_rd = encode(&scheme.rd_code, &forward)?;
            let y_rd = bec_sample(&x_rd, spec.e_rd(), &mut rd_rng)?;
            let rd = decode_bec_with(&scheme.rd_code, y_rd.symbols(), scratch);
            let rd_failed = stage_failed(rd.undetermined_count, &rd.info_bits, &forward);

            // destination: the forwarded bits fix the coset of P(N, B)
            let mut frozen = BitVector::zeros(params.len());
            for (j, i) in forwarded_set.iter().enumerate() {
                frozen.set(i, rd.info_bits.get(j));
            }
            let coset = PolarCodeSpec::with_frozen(params, b.clone(), frozen)?;
            let dest = decode_bec_with(&coset, &y_direct, scratch);
            let estimate = dest.u_hat.select(a).expect("A within N");
            let dest_failed = relay_failed || rd_failed || stage_failed(dest.undetermined_count, &estimate, &message);

            out.push(BlockOutcome {
                trial,
                block: k - 1,
                relay_error: relay_failed,
                rd_error: rd_failed,
                dest_error: dest_failed,
            });
        }
        pending = current;
    }
    Ok(out)
}
