// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulsed single-photon source model with coherent laser leakage.
//!
//! The crate computes the two-time field correlations of a two-level emitter
//! driven by a Gaussian pi pulse, with an optional coherent leakage field
//! added to the output mode. From those correlations it derives the
//! integrated second-order correlation, the Hong-Ou-Mandel visibility and the
//! ratio F = (1 - V)/g2, optionally after a Lorentzian spectral filter.
//!
//! Time is measured in units of 1/Gamma and the group velocity is 1.
//!
//! The crate is `no_std` with `alloc`. The `std` feature (default) adds
//! rayon parallelism and the FFT filter route.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod ansatz;
pub mod correlations;
pub mod error;
pub mod filter;
pub mod fit;
pub mod hom;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod qrt;
pub mod special;
pub mod steady_state;

mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
