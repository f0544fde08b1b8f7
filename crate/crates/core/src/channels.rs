//! Seeded channel samplers.
//!
//! Every random draw comes from an [`RngStream`]: ChaCha8 keyed by a 64-bit
//! master seed, with the 64-bit ChaCha stream selector used as a substream id.
//! Experiments derive one stream per (trial, purpose) so that trials are
//! replayable in isolation and may run in any order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decoder::{LlrWord, ReceivedWord, Symbol, LLR_CAP};
use crate::gf2::BitVector;

/// Recorded in experiment output so runs can be reproduced.
pub const GENERATOR: &str = "chacha8-rand_chacha0.3";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("probability {0} outside [0, 1]")]
    ErasureProbability(f64),
    #[error("crossover probability {0} outside [0, 1/2]")]
    CrossoverProbability(f64),
}

/// A deterministic random stream identified by `(master_seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        RngStream { master_seed, stream_id, rng }
    }

    /// Substream for one purpose within one trial.
    pub fn for_trial(master_seed: u64, trial: u64, purpose: u8) -> Self {
        Self::new(master_seed, (trial << 8) | purpose as u64)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn random_bits(&mut self, len: usize) -> BitVector {
        let bits: Vec<bool> = (0..len).map(|_| self.rng.gen()).collect();
        BitVector::from_bools(&bits)
    }

    /// One uniform draw in `[0, 1)` per position.
    pub fn uniforms(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.rng.gen()).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

fn check_prob(p: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ChannelError::ErasureProbability(p))
    }
}

/// Binary erasure channel. Position `i` is erased iff its uniform draw is
/// below `eps`, so one draw is consumed per position whatever `eps` is and
/// erasure sets are nested in `eps` for a fixed stream.
pub fn bec_sample<R: Rng + ?Sized>(
    x: &BitVector,
    eps: f64,
    rng: &mut R,
) -> Result<ReceivedWord, ChannelError> {
    check_prob(eps)?;
    let symbols = x
        .iter()
        .map(|bit| {
            let u: f64 = rng.gen();
            if u < eps {
                Symbol::Erased
            } else {
                Symbol::known(bit)
            }
        })
        .collect();
    Ok(ReceivedWord::new(symbols))
}

/// Further erases each unerased symbol of `y1` with probability `e_deg`,
/// producing the output of the cascade `X -> Y1 -> Y'`.
pub fn cascade_erasure<R: Rng + ?Sized>(
    y1: &ReceivedWord,
    e_deg: f64,
    rng: &mut R,
) -> Result<ReceivedWord, ChannelError> {
    check_prob(e_deg)?;
    let symbols = y1
        .symbols()
        .iter()
        .map(|&s| {
            let u: f64 = rng.gen();
            if u < e_deg {
                Symbol::Erased
            } else {
                s
            }
        })
        .collect();
    Ok(ReceivedWord::new(symbols))
}

/// Binary symmetric channel emitting clamped LLRs `(1 - 2y) ln((1-p)/p)`.
pub fn bsc_sample<R: Rng + ?Sized>(x: &BitVector, p: f64, rng: &mut R) -> Result<LlrWord, ChannelError> {
    if !(0.0..=0.5).contains(&p) {
        return Err(ChannelError::CrossoverProbability(p));
    }
    let mag = bsc_llr_magnitude(p);
    let llrs = x
        .iter()
        .map(|bit| {
            let u: f64 = rng.gen();
            let received = bit ^ (u < p);
            if received {
                -mag
            } else {
                mag
            }
        })
        .collect();
    Ok(LlrWord::new(llrs))
}

pub(crate) fn bsc_llr_magnitude(p: f64) -> f64 {
    if p == 0.0 {
        LLR_CAP
    } else {
        ((1.0 - p) / p).ln().min(LLR_CAP)
    }
}
