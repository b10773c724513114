// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV ingestion for the leakage fit and its JSON report.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sps_purity_core::fit::{fit, FitPins, FitPoint, FitResult, FitSeeds, PARAM_NAMES};

use crate::ValidationError;

#[derive(Debug, Deserialize)]
struct Record {
    delta_over_gamma: f64,
    ratio: f64,
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    drive_scale: Option<f64>,
}

/// Reads `delta_over_gamma, ratio[, sigma][, drive_scale]`.
pub fn read_points<R: Read>(input: R) -> Result<Vec<FitPoint>, ValidationError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| ValidationError(format!("fit csv: {e}")))?.clone();
    for need in ["delta_over_gamma", "ratio"] {
        if !headers.iter().any(|h| h == need) {
            return Err(ValidationError(format!("fit csv: missing column `{need}`")));
        }
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<Record>().enumerate() {
        let r = rec.map_err(|e| ValidationError(format!("fit csv row {}: {e}", i + 2)))?;
        let mut p = FitPoint::new(r.delta_over_gamma, r.ratio);
        if let Some(s) = r.sigma {
            p = p.with_sigma(s);
        }
        if let Some(d) = r.drive_scale {
            p = p.with_drive_scale(d);
        }
        out.push(p);
    }
    Ok(out)
}

pub fn read_points_file(path: &Path) -> Result<Vec<FitPoint>, ValidationError> {
    let f = std::fs::File::open(path).map_err(|e| ValidationError(format!("cannot open {}: {e}", path.display())))?;
    read_points(f)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ParamEstimate {
    pub name: &'static str,
    pub value: f64,
    pub std_error: f64,
    pub pinned: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AlternateReport {
    pub x: f64,
    pub theta: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FitReport {
    pub points: usize,
    pub parameters: Vec<ParamEstimate>,
    pub covariance: [[f64; 5]; 5],
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub condition_number: f64,
    pub unidentifiable: bool,
    pub theta_unidentifiable: bool,
    pub alternate: Option<AlternateReport>,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn new(points: usize, r: &FitResult, pins: &FitPins) -> Self {
        let pinned = [pins.x, pins.theta, pins.a, pins.drive, pins.gamma_d].map(|p| p.is_some());
        let se = r.std_errors();
        let parameters = PARAM_NAMES
            .iter()
            .zip(r.params())
            .enumerate()
            .map(|(i, (&name, value))| ParamEstimate {
                name,
                value,
                std_error: se[i],
                pinned: pinned[i],
            })
            .collect();
        Self {
            points,
            parameters,
            covariance: r.covariance,
            residual_rms: r.residual_rms,
            converged: r.converged,
            iterations: r.iterations,
            condition_number: r.condition_number,
            unidentifiable: r.unidentifiable,
            theta_unidentifiable: r.theta_unidentifiable,
            alternate: r.alternate.as_ref().map(|a| AlternateReport {
                x: a.x,
                theta: a.theta,
                a: a.a,
            }),
            warnings: r.warnings.clone(),
        }
    }
}

/// Reads, fits and renders the JSON report.
pub fn fit_csv<R: Read>(input: R, pins: &FitPins, seeds: &FitSeeds) -> Result<(FitReport, String), ValidationError> {
    let points = read_points(input)?;
    let result = fit(&points, pins, seeds)?;
    let report = FitReport::new(points.len(), &result, pins);
    let json = serde_json::to_string_pretty(&report).map_err(|e| ValidationError(e.to_string()))?;
    Ok((report, json))
}
