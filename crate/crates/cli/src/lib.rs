// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Sweeps, fits, oracle comparisons and plot scripts on top of
//! `sps_purity_core`.

pub mod cache;
pub mod config;
pub mod fitio;
pub mod intensity;
pub mod oracle;
pub mod plot;
pub mod sweep;

use std::process::ExitCode;

/// Bad configuration or input. Maps to exit status 1.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

impl From<sps_purity_core::Error> for ValidationError {
    fn from(e: sps_purity_core::Error) -> Self {
        ValidationError(e.to_string())
    }
}

/// How a command finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Invalid,
    PartialFailure,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Invalid => 1,
            Status::PartialFailure => 2,
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub use sweep::run_sweep;
