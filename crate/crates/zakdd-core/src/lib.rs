//! Delay-Doppler signal algebra for Zak-OTFS integrated sensing and
//! communication.
//!
//! Discrete quasi-periodic grids, twisted convolution, ambiguity functions,
//! chirp-spread pilots, effective channel computation, model-free channel
//! estimation and MMSE detection. Everything here is deterministic and
//! allocation-only; random draws are supplied by the caller.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ambiguity;
pub mod channel;
pub mod dd;
mod error;
pub mod estimation;
pub mod isac;
mod linalg;
pub mod spreading;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
