//! Nested polar codes for the degraded wiretap channel and the physically
//! degraded receiver-orthogonal relay channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`gf2`]: bit-packed GF(2) vectors and matrices, rank and null spaces.
//! - [`polar`]: the transform `G = R F^{(x)n}` and encoding.
//! - [`construction`]: Bhattacharyya parameters and set selection.
//! - [`decoder`]: successive cancellation decoding (erasure and LLR).
//! - [`channels`]: seeded erasure and symmetric channel samplers.
//! - [`wiretap`]: coset coding and Eve's exact equivocation on the BEC.
//! - [`relay`]: block-Markov decode-and-forward simulation.
//! - [`cli`]: the experiment driver behind the `npolar` binary.

pub mod channels;
pub mod cli;
pub mod construction;
pub mod decoder;
pub mod gf2;
pub mod index_set;
pub mod polar;
pub mod relay;
pub mod wiretap;

pub use gf2::{BitMatrix, BitVector, Gf2Error};
pub use index_set::IndexSet;
