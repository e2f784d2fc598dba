//! Phase-modulated frequency-permutation waveforms for joint radar and
//! communications.
//!
//! A waveform is `L` rectangular subpulses, each carrying one tone from an
//! orthogonal stepped-frequency comb and one `M`-PSK phase. The tone order is a
//! permutation, so the constellation holds `L! * M^L` waveforms. This crate
//! holds the pure algorithmic pieces:
//!
//! - [`codec`]: index <-> (permutation, phase word) mapping via the factorial
//!   number system.
//! - [`waveform`]: sampled complex baseband and the orthogonal-basis view.
//! - [`ambiguity`]: analytic complex ambiguity function, cuts, peak sidelobes.
//! - [`fisher`]: delay/Doppler Fisher information and Cramér–Rao bounds.
//! - [`channel`]: correlated Rician/Rayleigh receive-array channels.
//! - [`receiver`]: exhaustive and assignment-based maximum likelihood detection.
//! - [`bounds`]: pairwise error probabilities, union bound, nearest neighbour
//!   approximation and the gain-thresholded Rayleigh bound.
//! - [`sim`]: reproducible Monte Carlo block-error-rate engine.
//!
//! The crate is `no_std` and only needs `alloc`. IO, threading and the
//! command line live in the `permwave` crate.
#![cfg_attr(not(test), no_std)]
#![deny(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ambiguity;
pub mod assignment;
pub mod bounds;
pub mod channel;
pub mod codec;
mod error;
pub mod fisher;
pub mod linalg;
pub mod quad;
pub mod receiver;
pub mod rng;
pub mod sim;
pub mod special;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use codec::{WaveformParams, WaveformSymbol};
