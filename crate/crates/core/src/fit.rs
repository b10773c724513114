// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Damped least-squares extraction of leakage, efficiency, drive and
//! dephasing from continuous-wave intensity ratios.
//!
//! Detunings and the dephasing rate are in units of Gamma. Each point may
//! carry a relative drive scale `r`, so the drive intensity at that point is
//! `drive * r`. Data taken at two or more drive powers makes the drive and
//! dephasing separately identifiable; at a single power only their
//! combination in the linewidth is.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::model::wrap_phase;

pub const MIN_POINTS: usize = 8;
pub const CONDITION_LIMIT: f64 = 1e8;
pub const THETA_MAGNITUDE_FLOOR: f64 = 1e-3;
const MAX_ITERATIONS: usize = 400;
const FLOOR: f64 = 1e-12;

/// Parameter order in vectors and the covariance.
pub const PARAM_NAMES: [&str; 5] = ["x", "theta", "a", "drive", "gamma_d"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub delta: f64,
    pub ratio: f64,
    /// Standard deviation of `ratio`; `None` means unit weight.
    pub sigma: Option<f64>,
    pub drive_scale: f64,
}

impl FitPoint {
    pub fn new(delta: f64, ratio: f64) -> Self {
        FitPoint { delta, ratio, sigma: None, drive_scale: 1.0 }
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        FitPoint { sigma: Some(sigma), ..self }
    }

    pub fn with_drive_scale(self, r: f64) -> Self {
        FitPoint { drive_scale: r, ..self }
    }
}

/// Parameters held fixed at the given values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitPins {
    pub x: Option<f64>,
    pub theta: Option<f64>,
    pub a: Option<f64>,
    pub drive: Option<f64>,
    pub gamma_d: Option<f64>,
}

/// Extra starting point tried before the built-in starts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitSeeds {
    pub x: Option<f64>,
    pub theta: Option<f64>,
    pub a: Option<f64>,
    pub drive: Option<f64>,
    pub gamma_d: Option<f64>,
}

/// Second exact solution with the same curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitAlternate {
    pub x: f64,
    pub theta: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub x_hat: f64,
    pub theta_hat: f64,
    pub a_hat: f64,
    pub drive_hat: f64,
    pub gamma_d_hat: f64,
    pub residual_rms: f64,
    pub covariance: [[f64; 5]; 5],
    pub converged: bool,
    pub iterations: usize,
    pub condition_number: f64,
    pub unidentifiable: bool,
    pub theta_unidentifiable: bool,
    pub alternate: Option<FitAlternate>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn params(&self) -> [f64; 5] {
        [self.x_hat, self.theta_hat, self.a_hat, self.drive_hat, self.gamma_d_hat]
    }

    pub fn std_errors(&self) -> [f64; 5] {
        let mut s = [0.0; 5];
        for (i, v) in s.iter_mut().enumerate() {
            *v = self.covariance[i][i].max(0.0).sqrt();
        }
        s
    }
}

/// Model ratio at `delta` for `p = [x, theta, a, drive, gamma_d]`.
pub fn model(p: &[f64; 5], delta: f64, drive_scale: f64) -> f64 {
    let [m, th, a, s, gd] = *p;
    let gp = 1.0 + 2.0 * gd;
    let (sn, c) = th.sin_cos();
    let num = gp - m * (gp * c + 2.0 * delta * sn);
    let den = gp * gp + 4.0 * delta * delta + 2.0 * s * drive_scale * gp;
    a * (4.0 * num / den + m * m)
}

/// Partial derivatives of [`model`] in parameter order.
pub fn model_gradient(p: &[f64; 5], delta: f64, drive_scale: f64) -> [f64; 5] {
    let [m, th, a, s, gd] = *p;
    let r = drive_scale;
    let gp = 1.0 + 2.0 * gd;
    let (sn, c) = th.sin_cos();
    let num = gp - m * (gp * c + 2.0 * delta * sn);
    let den = gp * gp + 4.0 * delta * delta + 2.0 * s * r * gp;
    let d_num_gp = 1.0 - m * c;
    let d_den_gp = 2.0 * gp + 2.0 * s * r;
    [
        a * (-4.0 * (gp * c + 2.0 * delta * sn) / den + 2.0 * m),
        a * (-4.0 * m * (-gp * sn + 2.0 * delta * c) / den),
        4.0 * num / den + m * m,
        -8.0 * a * num * gp * r / (den * den),
        2.0 * 4.0 * a * (d_num_gp * den - num * d_den_gp) / (den * den),
    ]
}

fn pins_array(p: &FitPins) -> [Option<f64>; 5] {
    [p.x, p.theta, p.a, p.drive, p.gamma_d]
}

fn project(p: &mut [f64; 5], free: &[bool; 5]) {
    if p[0] < 0.0 {
        if free[1] {
            p[0] = -p[0];
            p[1] += PI;
        } else {
            p[0] = 0.0;
        }
    }
    p[0] = p[0].min(1.0);
    p[1] = wrap_phase(p[1]);
    p[2] = p[2].max(FLOOR);
    p[3] = p[3].max(FLOOR);
    p[4] = p[4].max(0.0);
}

struct Problem<'a> {
    data: &'a [FitPoint],
    free: [bool; 5],
}

impl Problem<'_> {
    fn residuals(&self, p: &[f64; 5]) -> Vec<f64> {
        self.data
            .iter()
            .map(|d| (model(p, d.delta, d.drive_scale) - d.ratio) / d.sigma.unwrap_or(1.0))
            .collect()
    }

    fn cost(&self, p: &[f64; 5]) -> f64 {
        self.residuals(p).iter().map(|r| r * r).sum()
    }

    fn free_index(&self) -> Vec<usize> {
        (0..5).filter(|&i| self.free[i]).collect()
    }

    fn jacobian(&self, p: &[f64; 5]) -> DMatrix<f64> {
        let idx = self.free_index();
        let mut j = DMatrix::zeros(self.data.len(), idx.len());
        for (row, d) in self.data.iter().enumerate() {
            let g = model_gradient(p, d.delta, d.drive_scale);
            let w = 1.0 / d.sigma.unwrap_or(1.0);
            for (col, &k) in idx.iter().enumerate() {
                j[(row, col)] = g[k] * w;
            }
        }
        j
    }
}

struct Run {
    p: [f64; 5],
    cost: f64,
    converged: bool,
    iterations: usize,
}

fn levenberg_marquardt(prob: &Problem, start: [f64; 5]) -> Run {
    let idx = prob.free_index();
    let mut p = start;
    project(&mut p, &prob.free);
    let mut cost = prob.cost(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut it = 0;
    while it < MAX_ITERATIONS {
        it += 1;
        let j = prob.jacobian(&p);
        let r = DVector::from_vec(prob.residuals(&p));
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * r;
        if g.amax() < 1e-15 * (1.0 + cost) {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for k in 0..idx.len() {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-12);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let mut trial = p;
            for (col, &k) in idx.iter().enumerate() {
                trial[k] += step[col];
            }
            project(&mut trial, &prob.free);
            let c = prob.cost(&trial);
            if c.is_finite() && c <= cost {
                let small_step = idx
                    .iter()
                    .all(|&k| (trial[k] - p[k]).abs() <= 1e-12 * (p[k].abs() + 1e-9));
                let small_gain = cost - c <= 1e-15 * cost + 1e-30;
                p = trial;
                cost = c;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if small_step || small_gain {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
    }
    Run { p, cost, converged, iterations: it }
}

/// Linear least squares for `(a x^2, a(1 - x cos), a x sin)` at fixed drive and
/// dephasing, mapped back to the larger-efficiency root.
fn linear_seed(data: &[FitPoint], drive: f64, gamma_d: f64) -> Option<(f64, f64, f64)> {
    let gp = 1.0 + 2.0 * gamma_d;
    let mut m = DMatrix::zeros(data.len(), 3);
    let mut b = DVector::zeros(data.len());
    for (i, d) in data.iter().enumerate() {
        let w = 1.0 / d.sigma.unwrap_or(1.0);
        let den = gp * gp + 4.0 * d.delta * d.delta + 2.0 * drive * d.drive_scale * gp;
        m[(i, 0)] = w;
        m[(i, 1)] = 4.0 * gp / den * w;
        m[(i, 2)] = -8.0 * d.delta / den * w;
        b[i] = d.ratio * w;
    }
    let sol = m.svd(true, true).solve(&b, 1e-14).ok()?;
    let (f1, k, v) = (sol[0].max(0.0), sol[1], sol[2]);
    let sum = 2.0 * k + f1;
    let disc = (sum * sum - 4.0 * (k * k + v * v)).max(0.0);
    let a = 0.5 * (sum + disc.sqrt());
    if !(a > 0.0) {
        return None;
    }
    let x = (f1 / a).sqrt().min(1.0);
    let theta = if x > 0.0 { v.atan2(a - k) } else { 0.0 };
    Some((x, theta, a))
}

/// Other root of the efficiency quadratic that reproduces the same curve.
fn mirror_root(p: &[f64; 5]) -> Option<[f64; 5]> {
    let [m, th, a, s, gd] = *p;
    let (sn, c) = th.sin_cos();
    let k = a * (1.0 - m * c);
    let f1 = a * m * m;
    let v = a * m * sn;
    let a2 = 2.0 * k + f1 - a;
    if !(a2 > FLOOR) || f1 <= 0.0 {
        return None;
    }
    let m2 = (f1 / a2).sqrt();
    if m2 > 1.0 {
        return None;
    }
    let theta2 = v.atan2(a2 - k);
    Some([m2, wrap_phase(theta2), a2, s, gd])
}

fn validate(data: &[FitPoint]) -> Result<Vec<String>> {
    if data.len() < MIN_POINTS {
        return Err(invalid("data", format!("need at least {MIN_POINTS} points, got {}", data.len())));
    }
    for d in data {
        if !(d.delta.is_finite() && d.ratio.is_finite()) {
            return Err(invalid("data", "non-finite delta or ratio"));
        }
        if let Some(s) = d.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid("sigma", format!("must be > 0, got {s}")));
            }
        }
        if !(d.drive_scale.is_finite() && d.drive_scale > 0.0) {
            return Err(invalid("drive_scale", format!("must be > 0, got {}", d.drive_scale)));
        }
    }
    let d0 = data[0].delta;
    if data.iter().all(|d| d.delta == d0) {
        return Err(Error::Degenerate("all detunings are equal".into()));
    }
    let mut warnings = Vec::new();
    let has_neg = data.iter().any(|d| d.delta < 0.0);
    let has_pos = data.iter().any(|d| d.delta > 0.0);
    if !(has_neg && has_pos) {
        warnings.push("detunings do not cover both signs; theta and -theta are not distinguishable".into());
    }
    Ok(warnings)
}

/// Fits the ratio model to `data`.
pub fn fit(data: &[FitPoint], pins: &FitPins, seeds: &FitSeeds) -> Result<FitResult> {
    let mut warnings = validate(data)?;
    let pinned = pins_array(pins);
    for (i, v) in pinned.iter().enumerate() {
        if let Some(v) = v {
            if !v.is_finite() {
                return Err(invalid(PARAM_NAMES[i], "pin must be finite"));
            }
        }
    }
    let mut free = [true; 5];
    for i in 0..5 {
        free[i] = pinned[i].is_none();
    }
    let prob = Problem { data, free };

    let mut starts: Vec<[f64; 5]> = Vec::new();
    let apply_pins = |mut p: [f64; 5]| {
        for i in 0..5 {
            if let Some(v) = pinned[i] {
                p[i] = v;
            }
        }
        p
    };
    let seed_arr = [seeds.x, seeds.theta, seeds.a, seeds.drive, seeds.gamma_d];
    if seed_arr.iter().any(Option::is_some) {
        let base = [0.1, 0.0, 1.0, 0.1, 0.0];
        let mut p = base;
        for i in 0..5 {
            if let Some(v) = seed_arr[i] {
                p[i] = v;
            }
        }
        starts.push(apply_pins(p));
    }
    for &s in &[1e-2, 1.0] {
        for &gd in &[0.0, 0.5] {
            let s = pinned[3].unwrap_or(s);
            let gd = pinned[4].unwrap_or(gd);
            let (x0, th0, a0) = linear_seed(data, s, gd).unwrap_or((0.1, 0.0, 1.0));
            starts.push(apply_pins([x0, th0, a0, s, gd]));
            for &th in &[0.0, PI / 2.0, -PI / 2.0, PI] {
                starts.push(apply_pins([x0.max(1e-2), th, a0, s, gd]));
            }
        }
    }

    let runs = crate::par::map_range(starts.len(), |i| levenberg_marquardt(&prob, starts[i]));
    let best = runs
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("at least one start");
    let mut p = best.p;

    // Prefer the minimal-leakage root when two roots fit equally well.
    let mut alternate = None;
    if free[0] && free[1] && free[2] {
        if let Some(q) = mirror_root(&p) {
            let cq = prob.cost(&q);
            if cq <= best.cost * (1.0 + 1e-6) + 1e-24 {
                let other = if q[2] > p[2] {
                    let o = p;
                    p = q;
                    o
                } else {
                    q
                };
                if (other[2] - p[2]).abs() > 1e-9 * p[2] {
                    alternate = Some(FitAlternate { x: other[0], theta: other[1], a: other[2] });
                }
            }
        }
    }

    let n = data.len();
    let cost = prob.cost(&p);
    let idx = prob.free_index();
    let j = prob.jacobian(&p);
    let sv = j.clone().svd(false, false).singular_values;
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let condition_number = if idx.is_empty() {
        1.0
    } else if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let unidentifiable = condition_number > CONDITION_LIMIT;
    if unidentifiable {
        warnings.push(format!("condition number {condition_number:.3e} exceeds {CONDITION_LIMIT:.0e}"));
    }

    let mut covariance = [[0.0; 5]; 5];
    let dof = n.saturating_sub(idx.len()).max(1) as f64;
    let s2 = cost / dof;
    if let Some(inv) = (j.transpose() * &j).try_inverse() {
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                covariance[ia][ib] = s2 * inv[(a, b)];
            }
        }
    } else {
        for &i in &idx {
            covariance[i][i] = f64::INFINITY;
        }
    }

    let theta_unidentifiable = p[0] < THETA_MAGNITUDE_FLOOR;
    if theta_unidentifiable {
        warnings.push("leakage magnitude below 1e-3; phase is not identifiable".into());
    }
    if !best.converged {
        warnings.push("iteration cap reached".into());
    }

    Ok(FitResult {
        x_hat: p[0],
        theta_hat: p[1],
        a_hat: p[2],
        drive_hat: p[3],
        gamma_d_hat: p[4],
        residual_rms: (cost / n as f64).sqrt(),
        covariance,
        converged: best.converged,
        iterations: best.iterations,
        condition_number,
        unidentifiable,
        theta_unidentifiable,
        alternate,
        warnings,
    })
}

/// Noiseless samples of the model, useful for round-trip checks.
pub fn synthesize(p: &[f64; 5], deltas: &[f64], drive_scales: &[f64]) -> Vec<FitPoint> {
    let mut out = vec![];
    for &r in drive_scales {
        for &d in deltas {
            out.push(FitPoint::new(d, model(p, d, r)).with_drive_scale(r));
        }
    }
    out
}
