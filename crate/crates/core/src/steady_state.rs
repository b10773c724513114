// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Continuous-wave steady state of the driven, dephased two-level emitter and
//! the transmitted-intensity ratio with coherent leakage.

use alloc::vec::Vec;

use nalgebra::{Matrix4, Vector4};
#[allow(unused_imports)]
use num_traits::Float;

use crate::model::{EmitterParams, LeakageParams};
use crate::C64;

/// Stationary density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub rho_gg: f64,
    pub rho_ee: f64,
    pub rho_eg: C64,
    pub rho_ge: C64,
}

/// Closed-form stationary state for a real Rabi frequency `omega`.
pub fn solve_steady(emitter: &EmitterParams, omega: f64) -> SteadyState {
    let EmitterParams { gamma, gamma_d, delta } = *emitter;
    let gp = 1.0 + 2.0 * gamma_d / gamma;
    let w2 = omega * omega;
    let width = gamma + 2.0 * gamma_d;
    let den = width * width + 4.0 * delta * delta + 2.0 * w2 * gp;
    let rho_eg = C64::new(2.0 * delta, width) * (omega / den);
    SteadyState {
        rho_gg: (width * width + 4.0 * delta * delta + w2 * gp) / den,
        rho_ee: w2 * gp / den,
        rho_eg,
        rho_ge: rho_eg.conj(),
    }
}

/// Right-hand side of the population and coherence equations.
pub fn steady_rhs(emitter: &EmitterParams, omega: f64, s: &SteadyState) -> [C64; 4] {
    let EmitterParams { gamma, gamma_d, delta } = *emitter;
    let i = C64::new(0.0, 1.0);
    let w = C64::new(omega, 0.0);
    let inv = C64::new(s.rho_ee - s.rho_gg, 0.0);
    let d_gg = s.rho_ee * gamma + i * 0.5 * (w.conj() * s.rho_eg - w * s.rho_ge);
    let d_eg = -C64::new(0.5 * gamma + gamma_d, delta) * s.rho_eg - i * 0.5 * w * inv;
    let d_ge = -C64::new(0.5 * gamma + gamma_d, -delta) * s.rho_ge + i * 0.5 * w.conj() * inv;
    let d_ee = -s.rho_ee * gamma + i * 0.5 * (w * s.rho_ge - w.conj() * s.rho_eg);
    [d_gg, d_eg, d_ge, d_ee]
}

/// Largest equation residual, relative to the fastest rate in the problem.
pub fn steady_residual(emitter: &EmitterParams, omega: f64, s: &SteadyState) -> f64 {
    let scale = emitter.gamma + emitter.gamma_d + emitter.delta.abs() + omega.abs();
    let r = steady_rhs(emitter, omega, s);
    let trace = (s.rho_gg + s.rho_ee - 1.0).abs();
    r.iter().map(|z| z.norm() / scale).fold(trace, f64::max)
}

/// Stationary state by direct LU solve of the rate equations with the
/// trace condition replacing the ground-population equation.
pub fn solve_steady_linear(emitter: &EmitterParams, omega: f64) -> Option<SteadyState> {
    let EmitterParams { gamma, gamma_d, delta } = *emitter;
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let w = C64::new(omega, 0.0);
    let h = w * 0.5;
    // unknowns (gg, ee, eg, ge)
    #[rustfmt::skip]
    let m = Matrix4::new(
        one, one, z, z,
        i * h, -i * h, -C64::new(0.5 * gamma + gamma_d, delta), z,
        -i * h.conj(), i * h.conj(), z, -C64::new(0.5 * gamma + gamma_d, -delta),
        z, -one * gamma, -i * h.conj(), i * h,
    );
    let b = Vector4::new(one, z, z, z);
    let x = m.lu().solve(&b)?;
    Some(SteadyState {
        rho_gg: x[0].re,
        rho_ee: x[1].re,
        rho_eg: x[2],
        rho_ge: x[3],
    })
}

/// `I_out / I_in` with leakage, efficiency `A` and `drive_ratio = I / I_sat`.
pub fn intensity_ratio(emitter: &EmitterParams, leak: &LeakageParams, drive_ratio: f64, efficiency: f64) -> f64 {
    let g = emitter.gamma;
    let gp = 1.0 + 2.0 * emitter.gamma_d / g;
    let d = 2.0 * emitter.delta / g;
    let x = leak.factor();
    let interference = 2.0 * (x * C64::new(0.5 * gp, emitter.delta / g)).re;
    efficiency * (4.0 / (gp * gp + d * d + 2.0 * drive_ratio * gp) * (gp - interference) + leak.magnitude * leak.magnitude)
}

/// Same ratio evaluated from the stationary state and the output operator
/// `x E_in + i sqrt(gamma) sigma_-`.
pub fn intensity_ratio_from_state(
    emitter: &EmitterParams,
    leak: &LeakageParams,
    drive_ratio: f64,
    efficiency: f64,
) -> f64 {
    let g = emitter.gamma;
    let omega = g * drive_ratio.sqrt();
    let s = solve_steady(emitter, omega);
    let x = leak.factor();
    let coherent = 2.0 * (x.conj() * C64::new(0.0, 2.0 * g) * s.rho_eg / omega).re;
    efficiency * (x.norm_sqr() + 4.0 * g * g * s.rho_ee / (omega * omega) + coherent)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityPoint {
    pub delta: f64,
    pub drive_ratio: f64,
    pub ratio: f64,
    pub efficiency: f64,
}

/// Ratio at each detuning.
pub fn intensity_curve(
    emitter: &EmitterParams,
    leak: &LeakageParams,
    drive_ratio: f64,
    efficiency: f64,
    deltas: &[f64],
) -> Vec<IntensityPoint> {
    deltas
        .iter()
        .map(|&delta| {
            let e = EmitterParams { delta, ..*emitter };
            IntensityPoint {
                delta,
                drive_ratio,
                ratio: intensity_ratio(&e, leak, drive_ratio, efficiency),
                efficiency,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn undriven() {
        let s = solve_steady(&EmitterParams::resonant(), 0.0);
        assert_eq!((s.rho_gg, s.rho_ee), (1.0, 0.0));
        assert_eq!(s.rho_eg, C64::new(0.0, 0.0));
    }

    #[test]
    fn unit_drive() {
        let s = solve_steady(&EmitterParams::resonant(), 1.0);
        assert!((s.rho_ee - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.rho_eg - C64::new(0.0, 1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn saturation() {
        let s = solve_steady(&EmitterParams::resonant(), 1e3);
        assert!((s.rho_ee - 0.5).abs() < 1e-5);
    }

    #[test]
    fn closed_form_solves_equations() {
        let e = EmitterParams::new(1.0, 0.3, -0.7).unwrap();
        let s = solve_steady(&e, 2.1);
        assert!(steady_residual(&e, 2.1, &s) < 1e-15);
        let l = solve_steady_linear(&e, 2.1).unwrap();
        assert!((l.rho_ee - s.rho_ee).abs() < 1e-14);
        assert!((l.rho_eg - s.rho_eg).norm() < 1e-14);
    }

    #[test]
    fn perfect_transmission() {
        for &d in &[-3.0, 0.0, 0.4, 50.0] {
            let e = EmitterParams::new(1.0, 0.0, d).unwrap();
            for &s in &[1e-3, 1.0, 30.0] {
                let r = intensity_ratio(&e, &LeakageParams::new(1.0, 0.0).unwrap(), s, 1.0);
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn far_detuned_bare_emitter() {
        let e = EmitterParams::new(1.0, 0.0, 1e3).unwrap();
        assert!(intensity_ratio(&e, &LeakageParams::none(), 1e-3, 1.0) < 1e-5);
    }

    #[test]
    fn symbolic_point() {
        // |x| = 0.1, theta = pi, delta = 0, s = 0.1: 4/(1.2) (1 + 0.1) + 0.01
        let e = EmitterParams::resonant();
        let r = intensity_ratio(&e, &LeakageParams::new(0.1, PI).unwrap(), 0.1, 1.0);
        assert!((r - (4.0 / 1.2 * 1.1 + 0.01)).abs() < 1e-14);
    }

    #[test]
    fn state_route_matches_closed_form() {
        let e = EmitterParams::new(1.0, 0.4, 1.3).unwrap();
        let l = LeakageParams::new(0.3, 2.0).unwrap();
        let a = intensity_ratio(&e, &l, 0.7, 0.9);
        let b = intensity_ratio_from_state(&e, &l, 0.7, 0.9);
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn asymmetry_follows_phase() {
        let e = EmitterParams::resonant();
        let ds: Vec<f64> = (-20..=20).map(|k| 0.25 * k as f64).collect();
        let sym = intensity_curve(&e, &LeakageParams::new(0.5, 0.0).unwrap(), 0.1, 1.0, &ds);
        for k in 0..ds.len() {
            assert!((sym[k].ratio - sym[ds.len() - 1 - k].ratio).abs() < 1e-12);
        }
        let asym = intensity_curve(&e, &LeakageParams::new(0.5, PI / 2.0).unwrap(), 0.1, 1.0, &ds);
        assert!((asym[0].ratio - asym[ds.len() - 1].ratio).abs() > 1e-3);
    }
}
