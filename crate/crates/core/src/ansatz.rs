// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-photon truncated wavefunction of the pulsed emitter.
//!
//! The state is expanded as
//! `c_g |g,0> + c_e |e,0> + int phi1g |g,1_t> + int phi1e |e,1_t> + int int phi2 |g,1_t1 1_t2>`
//! with emission times as photon labels. The excited amplitudes are stored in
//! the frame rotating with the detuning.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::linalg::{weighted_norm_sqr, CMatrix};
use crate::model::{rabi_envelope, EmitterParams, LeakageParams, LeakedField, PulseParams, TimeGrid};
use crate::{par, Result, C64};

/// Largest tolerated drift of the total norm.
pub const NORM_TOLERANCE: f64 = 1e-4;
/// Population left in excited sectors at the grid end that raises a flag.
pub const RESIDUAL_EXCITATION_LIMIT: f64 = 1e-4;

type Mat2 = [[C64; 2]; 2];

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn add_scaled(a: &Mat2, s: f64, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0] * s, a[0][1] + b[0][1] * s],
        [a[1][0] + b[1][0] * s, a[1][1] + b[1][1] * s],
    ]
}

const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

#[inline]
fn apply(p: &Mat2, y: [C64; 2]) -> [C64; 2] {
    [
        p[0][0] * y[0] + p[0][1] * y[1],
        p[1][0] * y[0] + p[1][1] * y[1],
    ]
}

/// Generator of `d/dt (c_g, c~_e)` at time `t`.
fn generator(emitter: &EmitterParams, omega: f64, t: f64) -> Mat2 {
    let rot = C64::from_polar(1.0, emitter.delta * t);
    let half = 0.5 * omega;
    [
        [ZERO, I * half * rot.conj()],
        [I * half * rot, C64::new(-0.5 * emitter.gamma, 0.0)],
    ]
}

/// One classical RK4 step of the linear system, as a matrix.
fn rk4_propagator(a1: &Mat2, a2: &Mat2, a3: &Mat2, h: f64) -> Mat2 {
    let k1 = *a1;
    let k2 = mul(a2, &add_scaled(&IDENTITY, 0.5 * h, &k1));
    let k3 = mul(a2, &add_scaled(&IDENTITY, 0.5 * h, &k2));
    let k4 = mul(a3, &add_scaled(&IDENTITY, h, &k3));
    let mut s = add_scaled(&k1, 2.0, &k2);
    s = add_scaled(&s, 2.0, &k3);
    s = add_scaled(&s, 1.0, &k4);
    add_scaled(&IDENTITY, h / 6.0, &s)
}

/// RK4 step matrices for every grid interval.
fn propagators<F: Fn(f64) -> f64>(emitter: &EmitterParams, omega: &F, grid: &TimeGrid) -> Vec<Mat2> {
    let t = grid.nodes();
    (0..t.len() - 1)
        .map(|k| {
            let h = t[k + 1] - t[k];
            let tm = t[k] + 0.5 * h;
            rk4_propagator(
                &generator(emitter, omega(t[k]), t[k]),
                &generator(emitter, omega(tm), tm),
                &generator(emitter, omega(t[k + 1]), t[k + 1]),
                h,
            )
        })
        .collect()
}

/// Emission boundary factor `i sqrt(gamma) exp(-i delta t)`.
fn emission_factor(emitter: &EmitterParams, t: f64) -> C64 {
    I * emitter.gamma.sqrt() * C64::from_polar(1.0, -emitter.delta * t)
}

/// Ground and rotated excited amplitudes of the no-emission branch.
pub fn integrate_emitter(
    emitter: &EmitterParams,
    pulse: &PulseParams,
    grid: &TimeGrid,
) -> (Vec<C64>, Vec<C64>) {
    integrate_emitter_with(emitter, &|t| rabi_envelope(pulse, t), grid)
}

/// [`integrate_emitter`] for an arbitrary real drive.
pub fn integrate_emitter_with<F: Fn(f64) -> f64>(
    emitter: &EmitterParams,
    omega: &F,
    grid: &TimeGrid,
) -> (Vec<C64>, Vec<C64>) {
    run_emitter(&propagators(emitter, omega, grid))
}

fn run_emitter(props: &[Mat2]) -> (Vec<C64>, Vec<C64>) {
    let mut cg = Vec::with_capacity(props.len() + 1);
    let mut ce = Vec::with_capacity(props.len() + 1);
    let mut y = [ONE, ZERO];
    cg.push(y[0]);
    ce.push(y[1]);
    for p in props {
        y = apply(p, y);
        cg.push(y[0]);
        ce.push(y[1]);
    }
    (cg, ce)
}

/// Full one-photon histories indexed `[(t, t_e1)]`, zero for `t < t_e1`.
#[derive(Debug, Clone)]
pub struct OnePhotonHistory {
    pub phi1g: CMatrix,
    pub phi1e: CMatrix,
}

/// One-photon branch for every first-emission node, keeping all times.
///
/// Quadratic memory. [`solve`] streams the same recursion without storing it.
pub fn integrate_one_photon(
    emitter: &EmitterParams,
    pulse: &PulseParams,
    grid: &TimeGrid,
    ce: &[C64],
) -> OnePhotonHistory {
    let props = propagators(emitter, &|t| rabi_envelope(pulse, t), grid);
    let n = grid.len();
    let t = grid.nodes();
    // Rows indexed by t_e1, transposed at the end.
    let mut g = CMatrix::zeros(n, n);
    let mut e = CMatrix::zeros(n, n);
    par::for_each_row(g.as_mut_slice(), n, |j, row| {
        let mut y = [emission_factor(emitter, t[j]) * ce[j], ZERO];
        row[j] = y[0];
        for k in j..n - 1 {
            y = apply(&props[k], y);
            row[k + 1] = y[0];
        }
    });
    par::for_each_row(e.as_mut_slice(), n, |j, row| {
        let mut y = [emission_factor(emitter, t[j]) * ce[j], ZERO];
        for k in j..n - 1 {
            y = apply(&props[k], y);
            row[k + 1] = y[1];
        }
    });
    OnePhotonHistory {
        phi1g: g.transpose(),
        phi1e: e.transpose(),
    }
}

/// Two-photon amplitude `phi2[(k, j)]` from the excited one-photon history.
pub fn extract_phi2(emitter: &EmitterParams, grid: &TimeGrid, phi1e_hist: &CMatrix) -> CMatrix {
    let n = grid.len();
    let t = grid.nodes();
    let mut phi2 = CMatrix::zeros(n, n);
    par::for_each_row(phi2.as_mut_slice(), n, |k, row| {
        let f = emission_factor(emitter, t[k]);
        for j in 0..k {
            row[j] = f * phi1e_hist[(k, j)];
        }
    });
    phi2
}

/// Amplitudes of the truncated state at the end of the grid.
#[derive(Debug, Clone)]
pub struct AnsatzSolution {
    pub grid: TimeGrid,
    pub emitter: EmitterParams,
    pub leak: LeakageParams,
    /// `c_g(t)` on every node.
    pub cg: Vec<C64>,
    /// Rotated `c~_e(t)` on every node.
    pub ce: Vec<C64>,
    /// `phi1g(T, t_e1)`.
    pub phi1g_final: Vec<C64>,
    /// Rotated `phi1e(T, t_e1)`.
    pub phi1e_final: Vec<C64>,
    /// `phi2(t_e2, t_e1)` at `[(e2, e1)]`, strictly lower triangular.
    pub phi2: CMatrix,
    /// Total excited population `|c~_e|^2 + int |phi1e(t, .)|^2` at every node.
    pub excited_population: Vec<f64>,
    pub leaked: LeakedField,
    /// Total norm at the grid end.
    pub norm: f64,
}

impl AnsatzSolution {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn norm_error(&self) -> f64 {
        (self.norm - 1.0).abs()
    }

    pub fn final_cg(&self) -> C64 {
        self.cg[self.cg.len() - 1]
    }

    pub fn final_ce(&self) -> C64 {
        self.ce[self.ce.len() - 1]
    }

    /// Probability of two emitted photons.
    pub fn two_photon_probability(&self) -> f64 {
        let w = self.grid.weights();
        (0..self.len())
            .map(|k| w[k] * weighted_norm_sqr(&self.phi2.row(k)[..k], &w[..k]))
            .sum()
    }

    /// Excited population remaining at the grid end.
    pub fn residual_excitation(&self) -> f64 {
        self.excited_population[self.excited_population.len() - 1]
    }
}

/// Integrates the truncated ansatz for a Gaussian pulse.
pub fn solve(
    emitter: &EmitterParams,
    leak: &LeakageParams,
    pulse: &PulseParams,
    grid: &TimeGrid,
) -> Result<AnsatzSolution> {
    solve_with_drive(emitter, leak, &|t| rabi_envelope(pulse, t), grid)
}

/// Integrates the truncated ansatz for an arbitrary real drive.
pub fn solve_with_drive<F: Fn(f64) -> f64 + Sync>(
    emitter: &EmitterParams,
    leak: &LeakageParams,
    omega: &F,
    grid: &TimeGrid,
) -> Result<AnsatzSolution> {
    let n = grid.len();
    let t = grid.nodes();
    let w = grid.weights();
    let props = propagators(emitter, omega, grid);
    let (cg, ce) = run_emitter(&props);

    // Row j holds phi1 branches started at node j; the phi2 row is filled
    // transposed so that each worker owns one row.
    let mut phi2t = CMatrix::zeros(n, n);
    let finals: Vec<[C64; 2]> = {
        let mut fin = vec![[ZERO, ZERO]; n];
        let mut slots: Vec<(&mut [C64], &mut [C64; 2])> = phi2t
            .as_mut_slice()
            .chunks_mut(n)
            .zip(fin.iter_mut())
            .collect();
        run_rows(&mut slots, |j, row, out| {
            let mut y = [emission_factor(emitter, t[j]) * ce[j], ZERO];
            for k in j..n - 1 {
                y = apply(&props[k], y);
                row[k + 1] = emission_factor(emitter, t[k + 1]) * y[1];
            }
            *out = y;
        });
        fin
    };
    let phi2 = phi2t.transpose();
    drop(phi2t);
    let phi1g_final: Vec<C64> = finals.iter().map(|y| y[0]).collect();
    let phi1e_final: Vec<C64> = finals.iter().map(|y| y[1]).collect();

    let excited_population: Vec<f64> = par::map_range(n, |k| {
        let one = weighted_norm_sqr(&phi2.row(k)[..k], &w[..k]) / emitter.gamma;
        ce[k].norm_sqr() + one
    });

    let two: f64 = (0..n)
        .map(|k| w[k] * weighted_norm_sqr(&phi2.row(k)[..k], &w[..k]))
        .sum();
    let norm = cg[n - 1].norm_sqr()
        + ce[n - 1].norm_sqr()
        + weighted_norm_sqr(&phi1g_final, w)
        + weighted_norm_sqr(&phi1e_final, w)
        + two;

    let scale = leak.factor() / (2.0 * emitter.gamma.sqrt());
    let leaked = LeakedField {
        samples: t.iter().map(|&s| scale * omega(s)).collect(),
    };

    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NonConvergence {
            stage: "ansatz",
            detail: format!("norm drift {:.3e} exceeds {NORM_TOLERANCE:e}", norm - 1.0),
        });
    }

    Ok(AnsatzSolution {
        grid: grid.clone(),
        emitter: *emitter,
        leak: *leak,
        cg,
        ce,
        phi1g_final,
        phi1e_final,
        phi2,
        excited_population,
        leaked,
        norm,
    })
}

fn run_rows<F>(slots: &mut [(&mut [C64], &mut [C64; 2])], f: F)
where
    F: Fn(usize, &mut [C64], &mut [C64; 2]) + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        slots
            .par_iter_mut()
            .enumerate()
            .for_each(|(j, (row, out))| f(j, row, out));
    }
    #[cfg(not(feature = "std"))]
    for (j, (row, out)) in slots.iter_mut().enumerate() {
        f(j, row, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_grid, make_grid, GridKind};
    use core::f64::consts::PI;

    fn reference(sigma: f64, n: usize) -> (EmitterParams, PulseParams, TimeGrid) {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, sigma).unwrap();
        let g = make_grid(GridKind::Auto, &e, &p, n).unwrap();
        (e, p, g)
    }

    #[test]
    fn undriven_is_vacuum() {
        let (e, _, g) = reference(0.1, 256);
        let s = solve_with_drive(&e, &LeakageParams::none(), &|_| 0.0, &g).unwrap();
        assert!(s.cg.iter().all(|z| *z == ONE));
        assert!(s.ce.iter().all(|z| *z == ZERO));
        assert_eq!(s.norm, 1.0);
    }

    #[test]
    fn short_pi_pulse_inverts() {
        let (e, p, g) = reference(1e-3, 1024);
        let (_, ce) = integrate_emitter(&e, &p, &g);
        let k = g.nodes().iter().position(|&t| t >= p.t0 + 5.0 * p.sigma).unwrap();
        assert!((ce[k].norm_sqr() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn norm_flux_balance() {
        // d(|cg|^2 + |ce|^2)/dt = -gamma |ce|^2
        let e = EmitterParams::resonant();
        let g = TimeGrid::uniform(0.0, 5.0, 2001).unwrap();
        let (cg, ce) = integrate_emitter_with(&e, &|_| 1.0, &g);
        let h = g.dt().unwrap();
        let pop: Vec<f64> = cg.iter().zip(&ce).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        for k in 2..pop.len() - 2 {
            let d = (-pop[k + 2] + 8.0 * pop[k + 1] - 8.0 * pop[k - 1] + pop[k - 2]) / (12.0 * h);
            assert!((d + ce[k].norm_sqr()).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn history_route_matches_streamed_solution() {
        let e = EmitterParams::new(1.0, 0.0, 0.7).unwrap();
        let p = PulseParams::standard(&e, 0.3).unwrap();
        let g = build_grid(&e, &p, 200).unwrap();
        let s = solve(&e, &LeakageParams::none(), &p, &g).unwrap();
        let h = integrate_one_photon(&e, &p, &g, &s.ce);
        let phi2 = extract_phi2(&e, &g, &h.phi1e);
        assert!(phi2.max_abs_diff(&s.phi2) < 1e-14);
        let n = g.len();
        for j in 0..n {
            assert!((h.phi1g[(n - 1, j)] - s.phi1g_final[j]).norm() < 1e-14);
            assert!((h.phi1e[(n - 1, j)] - s.phi1e_final[j]).norm() < 1e-14);
            for k in 0..j {
                assert_eq!(h.phi1g[(k, j)], ZERO);
            }
        }
        // zero-length integration at the last node
        let last = n - 1;
        assert_eq!(h.phi1g[(last, last)], emission_factor(&e, g.t_end()) * s.ce[last]);
    }

    #[test]
    fn phi2_strictly_lower() {
        let (e, p, g) = reference(0.2, 128);
        let s = solve(&e, &LeakageParams::none(), &p, &g).unwrap();
        for k in 0..g.len() {
            for j in k..g.len() {
                assert_eq!(s.phi2[(k, j)], ZERO);
            }
        }
    }

    #[test]
    fn no_reexcitation_after_pulse() {
        // drive switched off: phi1g constant, phi1e zero
        let e = EmitterParams::resonant();
        let g = TimeGrid::uniform(0.0, 8.0, 400).unwrap();
        let drive = |t: f64| if t < 1.0 { PI } else { 0.0 };
        let (_, ce) = integrate_emitter_with(&e, &drive, &g);
        let j = 200;
        let f = emission_factor(&e, g.nodes()[j]) * ce[j];
        let s = solve_with_drive(&e, &LeakageParams::none(), &drive, &g).unwrap();
        assert!((s.phi1g_final[j] - f).norm() < 1e-15);
        assert_eq!(s.phi1e_final[j], ZERO);
    }

    #[test]
    fn norm_conserved_at_reference_point() {
        let (e, p, g) = reference(0.1, 1024);
        let s = solve(&e, &LeakageParams::none(), &p, &g).unwrap();
        assert!(s.norm_error() < 1e-6, "{}", s.norm_error());
    }
}
