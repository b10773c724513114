// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical parameters, the Gaussian drive, time grids and the leaked field.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, require_finite, require_nonnegative, require_positive};
use crate::{Result, C64};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Two-level emitter rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterParams {
    /// Spontaneous emission rate.
    pub gamma: f64,
    /// Pure dephasing rate. Only enters the steady-state model.
    pub gamma_d: f64,
    /// Detuning of the transition from the drive carrier.
    pub delta: f64,
}

impl EmitterParams {
    pub fn new(gamma: f64, gamma_d: f64, delta: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        require_nonnegative("gamma_d", gamma_d)?;
        require_finite("delta", delta)?;
        Ok(Self {
            gamma,
            gamma_d,
            delta,
        })
    }

    /// Gamma = 1, no dephasing, on resonance.
    pub fn resonant() -> Self {
        Self {
            gamma: 1.0,
            gamma_d: 0.0,
            delta: 0.0,
        }
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(self.gamma, self.gamma_d, delta)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_phase(theta: f64) -> f64 {
    let mut t = libm::remainder(theta, 2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Leakage factor `x = |x| exp(-i theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageParams {
    pub magnitude: f64,
    pub phase: f64,
}

impl LeakageParams {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !(magnitude.is_finite() && (0.0..=1.0).contains(&magnitude)) {
            return Err(invalid("magnitude", format!("must lie in [0, 1], got {magnitude}")));
        }
        require_finite("phase", phase)?;
        Ok(Self {
            magnitude,
            phase: wrap_phase(phase),
        })
    }

    pub fn none() -> Self {
        Self {
            magnitude: 0.0,
            phase: 0.0,
        }
    }

    /// The complex factor `|x| exp(-i theta)`.
    pub fn factor(&self) -> C64 {
        C64::from_polar(self.magnitude, -self.phase)
    }
}

/// Gaussian drive `Omega(t) = Omega0 exp(-(t - t0)^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    pub sigma: f64,
    pub t0: f64,
    pub area: f64,
}

impl PulseParams {
    pub fn new(sigma: f64, t0: f64, area: f64) -> Result<Self> {
        require_positive("sigma", sigma)?;
        require_finite("t0", t0)?;
        require_nonnegative("area", area)?;
        Ok(Self { sigma, t0, area })
    }

    /// Pi pulse centred at `max(6 sigma, 1/gamma)`.
    pub fn standard(emitter: &EmitterParams, sigma: f64) -> Result<Self> {
        Self::with_area(emitter, sigma, PI)
    }

    pub fn with_area(emitter: &EmitterParams, sigma: f64, area: f64) -> Result<Self> {
        require_positive("sigma", sigma)?;
        Self::new(sigma, f64::max(6.0 * sigma, 1.0 / emitter.gamma), area)
    }

    /// Peak Rabi frequency `area / (sqrt(2 pi) sigma)`.
    pub fn peak(&self) -> f64 {
        self.area / (SQRT_2PI * self.sigma)
    }
}

/// Instantaneous Rabi frequency of the pulse.
pub fn rabi_envelope(pulse: &PulseParams, t: f64) -> f64 {
    let u = (t - pulse.t0) / pulse.sigma;
    pulse.peak() * libm::exp(-0.5 * u * u)
}

/// Integral of the envelope from `-inf` to `t`.
pub fn cumulative_area(pulse: &PulseParams, t: f64) -> f64 {
    0.5 * pulse.area * libm::erfc(-(t - pulse.t0) / (SQRT_2 * pulse.sigma))
}

/// Ordered quadrature nodes with trapezoid weights.
///
/// A uniform grid carries its spacing; a mapped grid is uniform in a
/// stretched coordinate that concentrates nodes under the pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dt: Option<f64>,
}

/// Minimum node count accepted by the grid builders.
pub const MIN_GRID_POINTS: usize = 64;

impl TimeGrid {
    pub fn uniform(t_start: f64, t_end: f64, n: usize) -> Result<Self> {
        require_finite("t_start", t_start)?;
        require_finite("t_end", t_end)?;
        if n < 2 {
            return Err(invalid("n", "a grid needs at least two points"));
        }
        if t_end <= t_start {
            return Err(invalid("t_end", "must exceed t_start"));
        }
        let dt = (t_end - t_start) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|k| if k == n - 1 { t_end } else { t_start + k as f64 * dt })
            .collect();
        let mut weights = alloc::vec![dt; n];
        weights[0] = 0.5 * dt;
        weights[n - 1] = 0.5 * dt;
        Ok(Self {
            nodes,
            weights,
            dt: Some(dt),
        })
    }

    /// Trapezoid weights on arbitrary strictly increasing nodes.
    pub fn trapezoid(nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        let mut weights = alloc::vec![0.0; n];
        for k in 0..n.saturating_sub(1) {
            let h = 0.5 * (nodes[k + 1] - nodes[k]);
            weights[k] += h;
            weights[k + 1] += h;
        }
        Self::from_nodes(nodes, weights)
    }

    /// Builds a grid from strictly increasing nodes and precomputed weights.
    pub fn from_nodes(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != weights.len() {
            return Err(invalid("nodes", "need >= 2 nodes and one weight per node"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("nodes", "must be strictly increasing"));
        }
        Ok(Self {
            nodes,
            weights,
            dt: None,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Spacing of a uniform grid.
    pub fn dt(&self) -> Option<f64> {
        self.dt
    }

    pub fn is_uniform(&self) -> bool {
        self.dt.is_some()
    }

    /// Width of interval `k`, between nodes `k` and `k + 1`.
    pub fn step(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn min_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Trapezoid integral of samples on the grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }
}

/// Grid placement strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridKind {
    Uniform,
    Refined,
    /// Uniform unless the pulse would be under-resolved.
    #[default]
    Auto,
}

/// Grid bounds `[0, t0 + max(6 sigma, 10/gamma)]`.
pub fn grid_bounds(emitter: &EmitterParams, pulse: &PulseParams) -> (f64, f64) {
    (0.0, pulse.t0 + f64::max(6.0 * pulse.sigma, 10.0 / emitter.gamma))
}

/// Uniform grid of `n >= 64` points covering pulse and decay.
pub fn build_grid(emitter: &EmitterParams, pulse: &PulseParams, n: usize) -> Result<TimeGrid> {
    if n < MIN_GRID_POINTS {
        return Err(invalid("n", format!("need at least {MIN_GRID_POINTS} points, got {n}")));
    }
    let (a, b) = grid_bounds(emitter, pulse);
    TimeGrid::uniform(a, b, n)
}

/// Half-width of the flat core of the refined grid, in units of sigma.
const REFINE_WIDTH: f64 = 3.0;
/// Uniform spacing above `sigma / RESOLVE_RATIO` triggers refinement in `Auto`.
const RESOLVE_RATIO: f64 = 16.0;

/// Grid `t(s) = t0 + c sinh((s - s0)/beta)` for uniform `s` in `[0, 1]`, with
/// `c = 3 sigma`.
///
/// Spacing is nearly constant across the pulse and grows geometrically away
/// from it. Weights are trapezoid weights in `s` times `dt/ds`, which keeps
/// the quadrature smooth in the mapped coordinate. Falls back to the uniform
/// grid when the core would not be finer than the uniform spacing.
pub fn build_refined_grid(
    emitter: &EmitterParams,
    pulse: &PulseParams,
    n: usize,
) -> Result<TimeGrid> {
    let uniform = build_grid(emitter, pulse, n)?;
    let (a, b) = grid_bounds(emitter, pulse);
    let c = REFINE_WIDTH * pulse.sigma;
    let left = libm::asinh((pulse.t0 - a) / c);
    let right = libm::asinh((b - pulse.t0) / c);
    let beta = 1.0 / (left + right);
    let ds = 1.0 / (n - 1) as f64;
    if c * ds / beta >= uniform.dt().unwrap_or(f64::INFINITY) {
        return Ok(uniform);
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let u = (k as f64 * ds) * (left + right) - left;
        let t = match k {
            0 => a,
            _ if k == n - 1 => b,
            _ => pulse.t0 + c * libm::sinh(u),
        };
        nodes.push(t);
        weights.push(c / beta * libm::cosh(u) * ds);
    }
    weights[0] *= 0.5;
    weights[n - 1] *= 0.5;
    TimeGrid::from_nodes(nodes, weights)
}

/// Builds a grid of the requested kind.
pub fn make_grid(
    kind: GridKind,
    emitter: &EmitterParams,
    pulse: &PulseParams,
    n: usize,
) -> Result<TimeGrid> {
    match kind {
        GridKind::Uniform => build_grid(emitter, pulse, n),
        GridKind::Refined => build_refined_grid(emitter, pulse, n),
        GridKind::Auto => {
            let g = build_grid(emitter, pulse, n)?;
            if g.dt().unwrap_or(0.0) * RESOLVE_RATIO > pulse.sigma {
                build_refined_grid(emitter, pulse, n)
            } else {
                Ok(g)
            }
        }
    }
}

/// Coherent leaked field sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakedField {
    pub samples: Vec<C64>,
}

impl LeakedField {
    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

/// `E'(t) = x Omega(t) / (2 sqrt(gamma))` at every node.
pub fn leaked_field(
    leak: &LeakageParams,
    pulse: &PulseParams,
    emitter: &EmitterParams,
    grid: &TimeGrid,
) -> LeakedField {
    let scale = leak.factor() / (2.0 * emitter.gamma.sqrt());
    LeakedField {
        samples: grid
            .nodes()
            .iter()
            .map(|&t| scale * rabi_envelope(pulse, t))
            .collect(),
    }
}

/// Closed form of the integrated leaked photon flux over all time.
pub fn leaked_photon_number(leak: &LeakageParams, pulse: &PulseParams, emitter: &EmitterParams) -> f64 {
    // int Omega^2 dt = Omega0^2 sigma sqrt(pi)
    let p = pulse.peak();
    leak.magnitude * leak.magnitude * p * p * pulse.sigma * PI.sqrt() / (4.0 * emitter.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_peak() {
        let p = PulseParams::new(1.0, 0.0, PI).unwrap();
        assert!((rabi_envelope(&p, 0.0) - (PI / 2.0).sqrt()).abs() < 1e-15);
        assert!(rabi_envelope(&p, 10.0) < 2e-22 * p.peak());
    }

    #[test]
    fn standard_grid_bounds() {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, 0.1).unwrap();
        let g = build_grid(&e, &p, 1024).unwrap();
        assert_eq!(p.t0, 1.0);
        assert!((g.t_end() - 11.0).abs() < 1e-12);
        let p = PulseParams::standard(&e, 10.0).unwrap();
        let g = build_grid(&e, &p, 1024).unwrap();
        assert_eq!(p.t0, 60.0);
        assert!((g.t_end() - 120.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_grid() {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, 0.1).unwrap();
        assert!(build_grid(&e, &p, 63).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn refined_grid_is_monotone_and_integrates() {
        let e = EmitterParams::resonant();
        for &s in &[1e-4, 1e-3, 0.01] {
            let p = PulseParams::standard(&e, s).unwrap();
            let g = build_refined_grid(&e, &p, 512).unwrap();
            assert!(!g.is_uniform());
            assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
            let omega: Vec<f64> = g.nodes().iter().map(|&t| rabi_envelope(&p, t)).collect();
            assert!((g.integrate(&omega) - PI).abs() < 1e-8, "sigma {s}");
            let len: f64 = g.weights().iter().sum();
            assert!((len - g.t_end()).abs() < 1e-3 * g.t_end());
            assert!(g.min_step() < s / 8.0);
        }
    }

    #[test]
    fn auto_keeps_uniform_for_wide_pulses() {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, 0.3).unwrap();
        assert!(make_grid(GridKind::Auto, &e, &p, 1024).unwrap().is_uniform());
        let p = PulseParams::standard(&e, 1e-3).unwrap();
        assert!(!make_grid(GridKind::Auto, &e, &p, 1024).unwrap().is_uniform());
    }
}
