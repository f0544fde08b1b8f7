//! Bit-channel reliabilities and information/secure set selection.
//!
//! Sets are selected by size: the `k` indices with the smallest
//! Bhattacharyya parameter, ties going to the smaller index.

use std::cmp::Ordering;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{bec_sample, bsc_sample, ChannelError, RngStream};
use crate::decoder::{Llr, ScScratch};
use crate::gf2::BitVector;
use crate::index_set::IndexSet;
use crate::polar::{CodeParams, PolarError};

/// Substream purpose tag for Monte-Carlo construction.
const PURPOSE_MC: u8 = 0x10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("requested {requested} indices but only {available} are available")]
    SizeTooLarge { requested: usize, available: usize },
    #[error("at least one Monte-Carlo trial is required")]
    NoTrials,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Polar(#[from] PolarError),
}

/// A binary-input symmetric channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelSpec {
    /// Erasure probability.
    Bec(f64),
    /// Crossover probability.
    Bsc(f64),
}

impl ChannelSpec {
    pub fn bec(eps: f64) -> Result<Self, ChannelError> {
        if (0.0..=1.0).contains(&eps) {
            Ok(ChannelSpec::Bec(eps))
        } else {
            Err(ChannelError::ErasureProbability(eps))
        }
    }

    pub fn bsc(p: f64) -> Result<Self, ChannelError> {
        if (0.0..=0.5).contains(&p) {
            Ok(ChannelSpec::Bsc(p))
        } else {
            Err(ChannelError::CrossoverProbability(p))
        }
    }

    pub fn capacity(&self) -> f64 {
        match *self {
            ChannelSpec::Bec(e) => 1.0 - e,
            ChannelSpec::Bsc(p) => 1.0 - binary_entropy(p),
        }
    }
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Per-index Bhattacharyya parameters (or Monte-Carlo estimates of them).
#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityProfile {
    params: CodeParams,
    z: Vec<f64>,
    exact: bool,
}

impl ReliabilityProfile {
    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// True iff computed by the exact erasure recursion.
    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn mean(&self) -> f64 {
        self.z.iter().sum::<f64>() / self.z.len() as f64
    }

    /// `sum_{i in set} z[i]`: the union bound on SC block error.
    pub fn union_bound(&self, set: &IndexSet) -> f64 {
        set.iter().map(|i| self.z[i]).sum()
    }

    /// All indices, most reliable first.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.z.len()).collect();
        idx.sort_by(|&a, &b| by_reliability(&self.z, a, b));
        idx
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "index,z,exact")?;
        for (i, z) in self.z.iter().enumerate() {
            writeln!(w, "{i},{z},{}", self.exact)?;
        }
        Ok(())
    }
}

fn by_reliability(z: &[f64], a: usize, b: usize) -> Ordering {
    z[a].total_cmp(&z[b]).then(a.cmp(&b))
}

/// Exact Bhattacharyya parameters of the `2^n` synthesized channels of a
/// BEC(`eps`), indexed like the inputs `u_i` of [`crate::polar::polar_transform`].
///
/// Each stage maps `z` to `(2z - z^2, z^2)`, interleaved so that index bits
/// are consumed most-significant first.
pub fn bec_reliability(n: u32, eps: f64) -> Result<ReliabilityProfile, ConstructionError> {
    let params = CodeParams::new(n)?;
    ChannelSpec::bec(eps)?;
    let mut z = vec![eps];
    for _ in 0..n {
        let mut next = Vec::with_capacity(2 * z.len());
        for &v in &z {
            next.push((2.0 * v - v * v).clamp(0.0, 1.0));
            next.push((v * v).clamp(0.0, 1.0));
        }
        z = next;
    }
    Ok(ReliabilityProfile { params, z, exact: true })
}

/// Genie-aided SC estimate of each bit-channel's error indicator.
///
/// The all-zero codeword is sent; at step `i` the decoder is fed the true
/// past bits and scores an error when the decision LLR is `<= 0`. Ties count
/// as errors, so on the BEC the estimate converges to the erasure
/// probability of the bit-channel, i.e. its Bhattacharyya parameter.
/// The result depends only on `(channel, n, trials, seed)`.
pub fn mc_reliability(
    channel: ChannelSpec,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<ReliabilityProfile, ConstructionError> {
    let params = CodeParams::new(n)?;
    if trials == 0 {
        return Err(ConstructionError::NoTrials);
    }
    let channel = match channel {
        ChannelSpec::Bec(e) => ChannelSpec::bec(e)?,
        ChannelSpec::Bsc(p) => ChannelSpec::bsc(p)?,
    };
    let len = params.len();
    let zero = BitVector::zeros(len);
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || (vec![0u64; len], ScScratch::<Llr>::new(len)),
            |(mut counts, mut scratch), t| {
                let mut rng = RngStream::for_trial(seed, t, PURPOSE_MC);
                let llrs: Vec<Llr> = match channel {
                    ChannelSpec::Bec(e) => bec_sample(&zero, e, &mut rng)
                        .expect("validated")
                        .symbols()
                        .iter()
                        .map(|s| Llr(s.to_llr()))
                        .collect(),
                    ChannelSpec::Bsc(p) => {
                        bsc_sample(&zero, p, &mut rng).expect("validated").values().iter().map(|&v| Llr(v)).collect()
                    }
                };
                scratch.run(&llrs, &mut |i, l: Llr| {
                    if l.0 <= 0.0 {
                        counts[i] += 1;
                    }
                    0
                });
                (counts, scratch)
            },
        )
        .map(|(counts, _)| counts)
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let z = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    Ok(ReliabilityProfile { params, z, exact: false })
}

/// The `k` indices with smallest `z`.
pub fn select_info_set(profile: &ReliabilityProfile, k: usize) -> Result<IndexSet, ConstructionError> {
    let len = profile.z.len();
    if k > len {
        return Err(ConstructionError::SizeTooLarge { requested: k, available: len });
    }
    Ok(IndexSet::from_unsorted(profile.ranking().into_iter().take(k)))
}

/// The `b` members of `a` with smallest wiretap-channel `z`.
pub fn select_secure_subset(
    a: &IndexSet,
    wiretap: &ReliabilityProfile,
    b: usize,
) -> Result<IndexSet, ConstructionError> {
    if b > a.len() {
        return Err(ConstructionError::SizeTooLarge { requested: b, available: a.len() });
    }
    let mut members: Vec<usize> = a.iter().collect();
    members.sort_by(|&x, &y| by_reliability(&wiretap.z, x, y));
    Ok(IndexSet::from_unsorted(members.into_iter().take(b)))
}

/// Largest prefix of `order` whose `z` values sum to at most `budget`.
pub fn largest_within_budget(z: &[f64], order: &[usize], budget: f64) -> usize {
    let mut sum = 0.0;
    for (k, &i) in order.iter().enumerate() {
        sum += z[i];
        if sum > budget {
            return k;
        }
    }
    order.len()
}

/// How a code's sets are selected.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionPolicy {
    pub info_size: usize,
    pub secure_size: usize,
    /// Trials for channels without an exact recursion.
    pub mc_trials: u64,
    pub seed: u64,
}

impl ConstructionPolicy {
    /// Reliability profile for `channel`: exact on the BEC, Monte-Carlo
    /// otherwise.
    pub fn profile(&self, channel: ChannelSpec, n: u32) -> Result<ReliabilityProfile, ConstructionError> {
        match channel {
            ChannelSpec::Bec(e) => bec_reliability(n, e),
            other => mc_reliability(other, n, self.mc_trials, self.seed),
        }
    }

    /// `(A, B)` with `A` from `main`, `B` from `wiretap`.
    pub fn select(
        &self,
        main: &ReliabilityProfile,
        wiretap: &ReliabilityProfile,
    ) -> Result<(IndexSet, IndexSet), ConstructionError> {
        let a = select_info_set(main, self.info_size)?;
        let b = select_secure_subset(&a, wiretap, self.secure_size)?;
        Ok((a, b))
    }
}
