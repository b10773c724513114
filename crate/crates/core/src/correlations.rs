// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! First- and second-order correlations of the output field.
//!
//! The detected field is the emitted photon field plus the classical leaked
//! amplitude `E'`. Kernels are indexed by emission times.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::ansatz::AnsatzSolution;
use crate::error::Error;
use crate::linalg::{weighted_gram, weighted_matvec, weighted_norm_sqr, CMatrix, RMatrix};
use crate::{par, Result, C64};

/// Two-time correlation kernels on an emission-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationKernels {
    /// `G1(t1, t2)`, Hermitian.
    pub g1: CMatrix,
    /// `G2(t1, t2)`, symmetric and nonnegative.
    pub g2: RMatrix,
    /// Mean photon number.
    pub nbar: f64,
    /// Quadrature weights of the grid.
    pub weights: Vec<f64>,
}

impl CorrelationKernels {
    /// Builds kernels and fills `nbar` from the `g1` diagonal.
    pub fn new(g1: CMatrix, g2: RMatrix, weights: Vec<f64>) -> Self {
        let nbar = trace(&g1, &weights);
        Self {
            g1,
            g2,
            nbar,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `int int f(t1, t2)` with the grid weights.
    pub fn integrate2(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let w = &self.weights;
        (0..w.len())
            .map(|i| w[i] * (0..w.len()).map(|j| w[j] * f(i, j)).sum::<f64>())
            .sum()
    }
}

fn trace(g1: &CMatrix, w: &[f64]) -> f64 {
    w.iter().enumerate().map(|(i, wi)| wi * g1[(i, i)].re).sum()
}

/// Output-state amplitudes entering the correlation assembly.
///
/// Vector and matrix fields are functions of detected (external) times and
/// may carry a spectral filter; scalars involve only internal integrals.
#[derive(Debug, Clone)]
pub struct OutputAmplitudes {
    /// Leaked field `E'(t)`.
    pub leaked: Vec<C64>,
    /// `phi1g(T, t)`.
    pub phi1: Vec<C64>,
    /// `phi1e(T, t)`.
    pub phi1e: Vec<C64>,
    /// Symmetrised two-photon amplitude `S(t1, t2)`.
    pub two_photon: CMatrix,
    /// `M1(t1, t2) = int conj(S(t1, c)) S(t2, c) dc`.
    pub overlap: CMatrix,
    /// `w(t) = int conj(phi1(c)) S(t, c) dc`.
    pub mixed: Vec<C64>,
    pub cg: C64,
    pub ce: C64,
    /// `int |phi1g|^2`.
    pub n1: f64,
    /// `int |phi1e|^2`.
    pub ne: f64,
    /// Two-photon probability.
    pub p2: f64,
}

/// `S = phi2 + phi2^T`.
pub fn symmetric_two_photon(phi2: &CMatrix) -> CMatrix {
    let n = phi2.rows();
    CMatrix::from_fn(n, n, |i, j| phi2[(i, j)] + phi2[(j, i)])
}

/// Unfiltered amplitudes of a solution.
pub fn output_amplitudes(sol: &AnsatzSolution) -> OutputAmplitudes {
    let w = sol.grid.weights();
    let s = symmetric_two_photon(&sol.phi2);
    let overlap = weighted_gram(&s, w);
    let conj_phi1: Vec<C64> = sol.phi1g_final.iter().map(|z| z.conj()).collect();
    let mixed = weighted_matvec(&s, w, &conj_phi1);
    OutputAmplitudes {
        leaked: sol.leaked.samples.clone(),
        phi1: sol.phi1g_final.clone(),
        phi1e: sol.phi1e_final.clone(),
        overlap,
        mixed,
        cg: sol.final_cg(),
        ce: sol.final_ce(),
        n1: weighted_norm_sqr(&sol.phi1g_final, w),
        ne: weighted_norm_sqr(&sol.phi1e_final, w),
        p2: sol.two_photon_probability(),
        two_photon: s,
    }
}

impl OutputAmplitudes {
    /// Squared norm of the state these amplitudes describe.
    pub fn norm(&self) -> f64 {
        self.cg.norm_sqr() + self.ce.norm_sqr() + self.n1 + self.ne + self.p2
    }

    /// `G1` as a sum of per-sector overlaps.
    pub fn g1(&self) -> CMatrix {
        let n = self.leaked.len();
        let e = &self.leaked;
        let v: Vec<C64> = (0..n).map(|i| self.phi1[i] + e[i] * self.cg).collect();
        let ve: Vec<C64> = (0..n).map(|i| self.phi1e[i] + e[i] * self.ce).collect();
        let internal = self.n1 + self.p2 + self.ne;
        let mut g1 = CMatrix::zeros(n, n);
        par::for_each_row(g1.as_mut_slice(), n, |i, row| {
            let (vi, vei, ei, wi) = (v[i].conj(), ve[i].conj(), e[i].conj(), self.mixed[i].conj());
            let m = self.overlap.row(i);
            for j in 0..n {
                row[j] = vi * v[j]
                    + vei * ve[j]
                    + m[j]
                    + ei * self.mixed[j]
                    + e[j] * wi
                    + ei * e[j] * internal;
            }
        });
        for i in 0..n {
            g1[(i, i)].im = 0.0;
        }
        g1
    }

    /// `G2` as the squared norm of the twice-annihilated state.
    pub fn g2(&self) -> RMatrix {
        let n = self.leaked.len();
        let e = &self.leaked;
        let m_diag: Vec<f64> = (0..n).map(|i| self.overlap[(i, i)].re).collect();
        let high = self.p2 + self.ne;
        let mut g2 = RMatrix::zeros(n, n);
        par::for_each_row(g2.as_mut_slice(), n, |i, row| {
            let (e1, p1, q1, w1) = (e[i], self.phi1[i], self.phi1e[i], self.mixed[i]);
            let s = self.two_photon.row(i);
            let m = self.overlap.row(i);
            for j in 0..n {
                let (e2, p2, q2, w2) = (e[j], self.phi1[j], self.phi1e[j], self.mixed[j]);
                let ee = e1 * e2;
                let vac = s[j] + e1 * p2 + e2 * p1 + ee * self.cg;
                let exc = e1 * q2 + e2 * q1 + ee * self.ce;
                let one = e1.norm_sqr() * m_diag[j]
                    + e2.norm_sqr() * m_diag[i]
                    + 2.0 * (e1.conj() * e2 * m[j].conj()).re
                    + ee.norm_sqr() * self.n1
                    + 2.0 * (ee.conj() * (e1 * w2 + e2 * w1)).re;
                row[j] = vac.norm_sqr() + exc.norm_sqr() + one.max(0.0) + ee.norm_sqr() * high;
            }
        });
        g2
    }

    pub fn kernels(&self, weights: &[f64]) -> CorrelationKernels {
        CorrelationKernels::new(self.g1(), self.g2(), weights.to_vec())
    }
}

/// Unfiltered `G1`.
pub fn g1_kernel(sol: &AnsatzSolution) -> CMatrix {
    output_amplitudes(sol).g1()
}

/// Unfiltered `G2` by the sum-of-squares route.
pub fn g2_kernel(sol: &AnsatzSolution) -> RMatrix {
    output_amplitudes(sol).g2()
}

/// Unfiltered `G1`, `G2` and mean photon number.
pub fn kernels(sol: &AnsatzSolution) -> CorrelationKernels {
    output_amplitudes(sol).kernels(sol.grid.weights())
}

/// Coefficient of the `|E'(t1)|^2 |E'(t2)|^2` term in the expanded `G2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuarticCoefficient {
    /// Literal unit coefficient, exact for a normalised state.
    Unit,
    /// Squared norm of the computed state.
    StateNorm,
}

/// `G2` from the term-by-term expansion in powers of the leaked field.
///
/// Independent of [`OutputAmplitudes::g2`]; both agree to rounding when the
/// quartic coefficient is the state norm.
pub fn g2_kernel_expanded(sol: &AnsatzSolution, quartic: QuarticCoefficient) -> RMatrix {
    let w = sol.grid.weights();
    let n = sol.len();
    let phi2 = &sol.phi2;
    let e = &sol.leaked.samples;
    let p1 = &sol.phi1g_final;
    let q1 = &sol.phi1e_final;
    let cg = sol.final_cg();
    let ce = sol.final_ce();
    let amp = output_amplitudes(sol);
    let coeff = match quartic {
        QuarticCoefficient::Unit => 1.0,
        QuarticCoefficient::StateNorm => amp.norm(),
    };
    // int over the internal index of the two orderings of phi2
    let cross = |a: usize, b: usize| -> C64 {
        (0..n)
            .map(|c| {
                let ra = [phi2[(c, a)], phi2[(a, c)]];
                let rb = [phi2[(c, b)], phi2[(b, c)]];
                let mut acc = C64::new(0.0, 0.0);
                for x in ra {
                    for y in rb {
                        acc += x.conj() * y;
                    }
                }
                acc * w[c]
            })
            .sum()
    };
    let half_mixed = |a: usize| -> C64 {
        (0..n)
            .map(|c| p1[c] * (phi2[(c, a)].conj() + phi2[(a, c)].conj()) * w[c])
            .sum()
    };
    let diag: Vec<f64> = (0..n).map(|a| cross(a, a).re).collect();
    let hm: Vec<C64> = (0..n).map(half_mixed).collect();
    let mut g2 = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (e1, e2) = (e[i], e[j]);
            let a1 = e1.norm_sqr();
            let a2 = e2.norm_sqr();
            let s21 = phi2[(j, i)];
            let s12 = phi2[(i, j)];
            let mut t = s21.norm_sqr() + s12.norm_sqr() + coeff * a1 * a2;
            t += a1 * diag[j] + a2 * diag[i];
            t += a1 * p1[j].norm_sqr() + a2 * p1[i].norm_sqr();
            let mut h = s21.conj() * s12;
            h += e1 * e2 * cg * (s12.conj() + s21.conj());
            h += (e1 * p1[j] + e2 * p1[i]) * (s21.conj() + s12.conj());
            h += e1 * e2.conj() * (p1[i].conj() * p1[j] + cross(i, j));
            h += a1 * e2 * hm[j] + a2 * e1 * hm[i];
            h += a1 * e2 * cg * p1[j].conj() + a2 * e1 * cg * p1[i].conj();
            t += 2.0 * h.re;
            // excited-emitter sectors
            let exc = e1 * q1[j] + e2 * q1[i] + e1 * e2 * ce;
            t += exc.norm_sqr() - (a1 * a2) * ce.norm_sqr();
            g2[(i, j)] = t;
        }
    }
    g2
}

/// Trapezoid integral of the `G1` diagonal.
pub fn mean_photons(k: &CorrelationKernels) -> f64 {
    trace(&k.g1, &k.weights)
}

/// Pulse-integrated `g2 = int int G2 / (int G1(t, t))^2`.
pub fn g2_integrated(k: &CorrelationKernels) -> Result<f64> {
    let nbar = mean_photons(k);
    if !(nbar > 0.0) {
        return Err(Error::Degenerate(format!("mean photon number is {nbar}")));
    }
    let num = k.integrate2(|i, j| k.g2[(i, j)]);
    Ok(num / (nbar * nbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::solve;
    use crate::model::{make_grid, EmitterParams, GridKind, LeakageParams, PulseParams};
    use alloc::vec;
    use core::f64::consts::PI;

    /// Brute-force Fock-space evaluation on discrete modes `a_i = sqrt(w_i) b(t_i)`.
    struct FockOracle {
        n: usize,
        w: Vec<f64>,
        e: Vec<C64>,
        state: Vec<C64>,
    }

    impl FockOracle {
        fn pair(&self, i: usize, j: usize) -> usize {
            // i > j
            2 + 2 * self.n + i * (i - 1) / 2 + j
        }

        fn new(amp: &RawState, w: &[f64]) -> Self {
            let n = w.len();
            let mut o = Self {
                n,
                w: w.to_vec(),
                e: amp.leaked.clone(),
                state: vec![],
            };
            let dim = 2 + 2 * n + n * (n - 1) / 2;
            let mut s = vec![C64::new(0.0, 0.0); dim];
            s[0] = amp.cg;
            s[1] = amp.ce;
            for i in 0..n {
                s[2 + i] = amp.phi1[i] * w[i].sqrt();
                s[2 + n + i] = amp.phi1e[i] * w[i].sqrt();
                for j in 0..i {
                    s[o.pair(i, j)] = amp.phi2[(i, j)] * (w[i] * w[j]).sqrt();
                }
            }
            o.state = s;
            o
        }

        /// `(b(t_i) + E'(t_i)) psi`.
        fn field(&self, i: usize, psi: &[C64]) -> Vec<C64> {
            let n = self.n;
            let mut out: Vec<C64> = psi.iter().map(|z| z * self.e[i]).collect();
            let r = 1.0 / self.w[i].sqrt();
            out[0] += psi[2 + i] * r;
            out[1] += psi[2 + n + i] * r;
            for k in 0..n {
                if k == i {
                    continue;
                }
                let (a, b) = if k > i { (k, i) } else { (i, k) };
                out[2 + k] += psi[self.pair(a, b)] * r;
            }
            out
        }

        fn g1(&self, i: usize, j: usize) -> C64 {
            let a = self.field(i, &self.state);
            let b = self.field(j, &self.state);
            a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum()
        }

        fn g2(&self, i: usize, j: usize) -> f64 {
            let a = self.field(i, &self.field(j, &self.state));
            a.iter().map(|z| z.norm_sqr()).sum()
        }
    }

    struct RawState {
        cg: C64,
        ce: C64,
        phi1: Vec<C64>,
        phi1e: Vec<C64>,
        phi2: CMatrix,
        leaked: Vec<C64>,
    }

    fn pseudo(k: usize) -> C64 {
        let x = k as f64;
        C64::new(libm::sin(1.7 * x + 0.3), libm::cos(2.3 * x - 0.1))
    }

    fn random_state(n: usize) -> (RawState, Vec<f64>) {
        let w: Vec<f64> = (0..n).map(|i| 0.1 + 0.05 * libm::sin(i as f64)).collect();
        let phi2 = CMatrix::from_fn(n, n, |i, j| if i > j { pseudo(i * n + j) * 0.3 } else { C64::new(0.0, 0.0) });
        let st = RawState {
            cg: C64::new(0.3, -0.2),
            ce: C64::new(0.05, 0.1),
            phi1: (0..n).map(|i| pseudo(1000 + i) * 0.5).collect(),
            phi1e: (0..n).map(|i| pseudo(2000 + i) * 0.2).collect(),
            phi2,
            leaked: (0..n).map(|i| pseudo(3000 + i) * 0.4).collect(),
        };
        (st, w)
    }

    fn amplitudes_of(st: &RawState, w: &[f64]) -> OutputAmplitudes {
        let s = symmetric_two_photon(&st.phi2);
        let conj_phi1: Vec<C64> = st.phi1.iter().map(|z| z.conj()).collect();
        let n = w.len();
        let p2 = (0..n)
            .map(|k| w[k] * weighted_norm_sqr(&st.phi2.row(k)[..k], &w[..k]))
            .sum();
        OutputAmplitudes {
            leaked: st.leaked.clone(),
            phi1: st.phi1.clone(),
            phi1e: st.phi1e.clone(),
            overlap: weighted_gram(&s, w),
            mixed: weighted_matvec(&s, w, &conj_phi1),
            two_photon: s,
            cg: st.cg,
            ce: st.ce,
            n1: weighted_norm_sqr(&st.phi1, w),
            ne: weighted_norm_sqr(&st.phi1e, w),
            p2,
        }
    }

    #[test]
    fn assembly_matches_fock_space_oracle() {
        let (st, w) = random_state(9);
        let amp = amplitudes_of(&st, &w);
        let oracle = FockOracle::new(&st, &w);
        let g1 = amp.g1();
        let g2 = amp.g2();
        for i in 0..9 {
            for j in 0..9 {
                let a = oracle.g1(i, j);
                assert!((g1[(i, j)] - a).norm() < 1e-12 * (1.0 + a.norm()), "g1 {i} {j}");
                let b = oracle.g2(i, j);
                assert!((g2[(i, j)] - b).abs() < 1e-12 * (1.0 + b), "g2 {i} {j}");
            }
        }
    }

    fn point(x: f64, theta: f64, sigma: f64, n: usize) -> AnsatzSolution {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, sigma).unwrap();
        let g = make_grid(GridKind::Auto, &e, &p, n).unwrap();
        solve(&e, &LeakageParams::new(x, theta).unwrap(), &p, &g).unwrap()
    }

    #[test]
    fn expanded_route_agrees() {
        for &(x, th, s) in &[(0.1, 0.4, 0.2), (0.3, -2.0, 0.5), (0.0, 0.0, 0.1)] {
            let sol = point(x, th, s, 96);
            let a = g2_kernel(&sol);
            let b = g2_kernel_expanded(&sol, QuarticCoefficient::StateNorm);
            let scale = a.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(a.max_abs_diff(&b) < 1e-10 * scale);
            let c = g2_kernel_expanded(&sol, QuarticCoefficient::Unit);
            assert!(a.max_abs_diff(&c) <= 2.0 * sol.norm_error() * scale + 1e-12 * scale);
        }
    }

    #[test]
    fn kernel_structure() {
        let sol = point(0.2, 1.1, 0.3, 128);
        let k = kernels(&sol);
        assert!(k.g1.max_abs_diff(&k.g1.adjoint()) < 1e-12);
        assert!(k.g2.max_abs_diff(&k.g2.transpose()) < 1e-12);
        assert!(k.g2.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn undriven_kernels_vanish() {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, 0.1).unwrap();
        let g = make_grid(GridKind::Auto, &e, &p, 128).unwrap();
        let sol = crate::ansatz::solve_with_drive(&e, &LeakageParams::new(0.1, 0.0).unwrap(), &|_| 0.0, &g).unwrap();
        let k = kernels(&sol);
        assert_eq!(mean_photons(&k), 0.0);
        assert!(g2_integrated(&k).is_err());
    }

    #[test]
    fn short_pulse_single_photon() {
        let sol = point(0.0, 0.0, 1e-3, 512);
        let k = kernels(&sol);
        assert!((k.nbar - 1.0).abs() < 1e-2);
        assert!(g2_integrated(&k).unwrap() < 1e-3);
        let _ = PI;
    }
}
