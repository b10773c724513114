// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Continuous-wave intensity ratio tables.

use std::io::Write;

use sps_purity_core::model::{EmitterParams, LeakageParams};
use sps_purity_core::steady_state::intensity_curve;

use crate::{fmt_f64, ValidationError};

pub const INTENSITY_HEADER: [&str; 7] = ["x", "theta", "drive_ratio", "gamma_d", "efficiency", "delta_over_gamma", "ratio"];

/// Product grid of curves; each curve spans `deltas`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityGrid {
    pub xs: Vec<f64>,
    pub thetas: Vec<f64>,
    pub drive_ratios: Vec<f64>,
    pub gamma_d: f64,
    pub efficiency: f64,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityRow {
    pub x: f64,
    pub theta: f64,
    pub drive_ratio: f64,
    pub gamma_d: f64,
    pub efficiency: f64,
    pub delta: f64,
    pub ratio: f64,
}

impl IntensityGrid {
    /// Rows ordered by drive ratio, then `x`, `theta`, detuning.
    pub fn rows(&self) -> Result<Vec<IntensityRow>, ValidationError> {
        if [&self.xs, &self.thetas, &self.drive_ratios, &self.deltas].iter().any(|v| v.is_empty()) {
            return Err(ValidationError("intensity: empty parameter list".into()));
        }
        if !(self.efficiency.is_finite() && self.efficiency > 0.0) {
            return Err(ValidationError("intensity: efficiency must be > 0".into()));
        }
        let mut out = Vec::new();
        for &s in &self.drive_ratios {
            if !(s.is_finite() && s >= 0.0) {
                return Err(ValidationError(format!("intensity: drive ratio must be >= 0, got {s}")));
            }
            for &x in &self.xs {
                for &theta in &self.thetas {
                    let emitter = EmitterParams::new(1.0, self.gamma_d, 0.0)?;
                    let leak = LeakageParams::new(x, theta)?;
                    for p in intensity_curve(&emitter, &leak, s, self.efficiency, &self.deltas) {
                        out.push(IntensityRow {
                            x,
                            theta,
                            drive_ratio: s,
                            gamma_d: self.gamma_d,
                            efficiency: self.efficiency,
                            delta: p.delta,
                            ratio: p.ratio,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn write_csv<W: Write>(rows: &[IntensityRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INTENSITY_HEADER)?;
    for r in rows {
        w.write_record([r.x, r.theta, r.drive_ratio, r.gamma_d, r.efficiency, r.delta, r.ratio].map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}
