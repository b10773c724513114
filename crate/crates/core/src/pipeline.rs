// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! One parameter point end to end: grid, ansatz, optional filter, HOM metrics.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ansatz::{self, AnsatzSolution, RESIDUAL_EXCITATION_LIMIT};
use crate::correlations::{kernels, CorrelationKernels};
use crate::filter::{filtered_correlations, BoundFilter, FilterEngine, FilterOptions, FilterSpec};
use crate::hom::{hom_report, HomReport};
use crate::model::{make_grid, EmitterParams, GridKind, LeakageParams, PulseParams};
use crate::Result;

pub const FLAG_F_ILL_CONDITIONED: &str = "f_ill_conditioned";
pub const FLAG_F_OUTSIDE_BOUNDS: &str = "f_outside_1_3";
pub const FLAG_RESIDUAL_EXCITATION: &str = "residual_excitation";

/// Tolerance on the unfiltered `F` interval `[1, 3]` before it is flagged.
pub const F_BOUND_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointConfig {
    pub emitter: EmitterParams,
    pub leak: LeakageParams,
    pub pulse: PulseParams,
    pub n: usize,
    pub grid_kind: GridKind,
    pub filter: Option<FilterSpec>,
    pub engine: FilterEngine,
}

impl PointConfig {
    /// Resonant emitter, standard pi pulse of width `sigma`.
    pub fn standard(sigma: f64, x: f64, theta: f64, n: usize) -> Result<Self> {
        let emitter = EmitterParams::resonant();
        Ok(PointConfig {
            emitter,
            leak: LeakageParams::new(x, theta)?,
            pulse: PulseParams::standard(&emitter, sigma)?,
            n,
            grid_kind: GridKind::Auto,
            filter: None,
            engine: FilterEngine::Auto,
        })
    }

    pub fn with_filter(self, filter: Option<FilterSpec>) -> Self {
        PointConfig { filter, ..self }
    }

    pub fn filter_options(&self) -> FilterOptions {
        FilterOptions {
            engine: self.engine,
            emitter_gamma: self.emitter.gamma,
            ..FilterOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub hom: HomReport,
    pub norm_error: f64,
    pub residual_excitation: f64,
    /// `ansatz`, `ansatz+fourier` or `ansatz+time`.
    pub method: &'static str,
    pub flags: Vec<&'static str>,
}

impl PointReport {
    pub fn flags_string(&self) -> String {
        self.flags.join(";")
    }
}

/// Runs the ansatz for `cfg` on its grid.
pub fn solve_point(cfg: &PointConfig) -> Result<AnsatzSolution> {
    let grid = make_grid(cfg.grid_kind, &cfg.emitter, &cfg.pulse, cfg.n)?;
    ansatz::solve(&cfg.emitter, &cfg.leak, &cfg.pulse, &grid)
}

/// Kernels seen by the detector, and the method label.
pub fn detected_kernels(cfg: &PointConfig, sol: &AnsatzSolution) -> Result<(CorrelationKernels, &'static str)> {
    match &cfg.filter {
        None => Ok((kernels(sol), "ansatz")),
        Some(spec) => {
            let opts = cfg.filter_options();
            let fourier = BoundFilter::new(spec, &sol.grid, &opts)?.uses_fourier();
            let k = filtered_correlations(sol, spec, &opts)?;
            Ok((k, if fourier { "ansatz+fourier" } else { "ansatz+time" }))
        }
    }
}

/// Metrics for an already solved point.
pub fn evaluate_solution(cfg: &PointConfig, sol: &AnsatzSolution) -> Result<PointReport> {
    let (k, method) = detected_kernels(cfg, sol)?;
    let hom = hom_report(&k)?;
    let mut flags = Vec::new();
    if hom.ill_conditioned {
        flags.push(FLAG_F_ILL_CONDITIONED);
    } else if !(hom.f_ratio >= 1.0 - F_BOUND_SLACK && hom.f_ratio <= 3.0 + F_BOUND_SLACK) {
        flags.push(FLAG_F_OUTSIDE_BOUNDS);
    }
    let residual_excitation = sol.residual_excitation();
    if residual_excitation > RESIDUAL_EXCITATION_LIMIT {
        flags.push(FLAG_RESIDUAL_EXCITATION);
    }
    Ok(PointReport {
        hom,
        norm_error: sol.norm_error(),
        residual_excitation,
        method,
        flags,
    })
}

/// Solves and evaluates one point.
pub fn evaluate(cfg: &PointConfig) -> Result<PointReport> {
    let sol = solve_point(cfg)?;
    evaluate_solution(cfg, &sol)
}
