// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Hong-Ou-Mandel coincidences, visibility and the multi-photon ratio F.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::correlations::{g2_integrated, CorrelationKernels};
use crate::error::{invalid, Error};
use crate::Result;

/// Default threshold below which `F = (1 - V)/g2` is flagged.
pub const F_EPSILON: f64 = 1e-10;

/// HOM figures of merit for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomReport {
    pub pcc: f64,
    pub pcc_dist: f64,
    pub visibility: f64,
    pub g2: f64,
    pub f_ratio: f64,
    pub nbar: f64,
    /// `g2` below the F threshold.
    pub ill_conditioned: bool,
}

/// Coincidence probability for identical and for distinguishable inputs.
pub fn coincidence(k: &CorrelationKernels) -> (f64, f64) {
    let n = k.len();
    let diag: Vec<f64> = (0..n).map(|i| k.g1[(i, i)].re).collect();
    let g2 = k.integrate2(|i, j| k.g2[(i, j)]);
    let dd = k.integrate2(|i, j| diag[i] * diag[j]);
    let overlap = k.integrate2(|i, j| k.g1[(i, j)].norm_sqr());
    let pcc = 0.25 * (2.0 * g2 + 2.0 * dd - 2.0 * overlap);
    let pcc_dist = 0.25 * (2.0 * g2 + 2.0 * dd);
    (pcc, pcc_dist)
}

/// `V = int int |G1|^2 / int int (G2 + G1(t,t) G1(t',t'))`.
pub fn visibility(k: &CorrelationKernels) -> Result<f64> {
    let (pcc, dist) = coincidence(k);
    if !(dist > 0.0) {
        return Err(Error::Degenerate(format!("no photons: normaliser {dist}")));
    }
    Ok(1.0 - pcc / dist)
}

/// `F = (1 - v)/g2` and whether `g2 < eps`.
pub fn f_ratio(v: f64, g2: f64, eps: f64) -> (f64, bool) {
    ((1.0 - v) / g2, !(g2 >= eps))
}

pub fn hom_report(k: &CorrelationKernels) -> Result<HomReport> {
    hom_report_with(k, F_EPSILON)
}

pub fn hom_report_with(k: &CorrelationKernels, eps: f64) -> Result<HomReport> {
    let (pcc, pcc_dist) = coincidence(k);
    let visibility = visibility(k)?;
    let g2 = g2_integrated(k)?;
    let (f, ill) = f_ratio(visibility, g2, eps);
    Ok(HomReport {
        pcc,
        pcc_dist,
        visibility,
        g2,
        f_ratio: f,
        nbar: k.nbar,
        ill_conditioned: ill,
    })
}

/// Two orthonormal modes `psi` and `psi_perp` holding at most two photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockToyState {
    pub p0: f64,
    pub p1: f64,
    pub pn: f64,
    /// Single-photon weights on `(psi, psi_perp)`.
    pub single_photon_weights: [f64; 2],
    /// Probabilities of `|2,0>`, `|1,1>`, `|0,2>` within the two-photon part.
    pub two_photon_occupation: [f64; 3],
}

/// Analytic and brute-force figures of a toy state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockToyReport {
    pub visibility: f64,
    pub g2: f64,
    pub f: f64,
    pub b: f64,
    pub b_prime: f64,
    pub v1: f64,
    /// `V - [V1 (1 - F g2) + B (1 - V1) g2]`.
    pub first_order_residual: f64,
    /// Difference between brute-force `V` and the exact decomposition.
    pub exact_residual: f64,
}

impl FockToyState {
    pub fn validate(&self) -> Result<()> {
        let probs = [self.p0, self.p1, self.pn];
        let all = probs
            .iter()
            .chain(&self.single_photon_weights)
            .chain(&self.two_photon_occupation);
        for &p in all {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(invalid("toy state", format!("probability {p} outside [0, 1]")));
            }
        }
        let close = |s: f64| (s - 1.0).abs() < 1e-12;
        if !close(probs.iter().sum()) {
            return Err(invalid("toy state", "p0 + p1 + pn must be 1"));
        }
        if !close(self.single_photon_weights.iter().sum()) {
            return Err(invalid("toy state", "single-photon weights must sum to 1"));
        }
        if !close(self.two_photon_occupation.iter().sum()) {
            return Err(invalid("toy state", "two-photon occupations must sum to 1"));
        }
        if !(self.p1 + self.pn > 0.0) {
            return Err(invalid("toy state", "state has no photons"));
        }
        Ok(())
    }
}

/// Photon numbers `(n_psi, n_perp)` of the three two-photon configurations.
const PAIRS: [(usize, usize); 3] = [(2, 0), (1, 1), (0, 2)];

/// Exact figures of merit of a toy state.
///
/// `V` and `g2` come from the explicit two-mode density matrix; `F`, `B`
/// and `B'` from the closed forms in terms of mode occupations.
pub fn fock_toy_f(s: &FockToyState) -> Result<FockToyReport> {
    s.validate()?;
    let (visibility, g2, mean) = brute_force(s);
    let w = s.single_photon_weights;
    let q = s.two_photon_occupation;
    // <n_l>_{n>1} and <n(n-1)>_{n>1} = 2
    let n_mode = [
        PAIRS.iter().zip(&q).map(|(p, qi)| p.0 as f64 * qi).sum::<f64>(),
        PAIRS.iter().zip(&q).map(|(p, qi)| p.1 as f64 * qi).sum::<f64>(),
    ];
    let nn1 = 2.0;
    let n_tot = 2.0;
    let other = w[0] * n_mode[1] + w[1] * n_mode[0];
    let same = w[0] * n_mode[0] + w[1] * n_mode[1];
    let f = 1.0 + s.p1 * 2.0 * other / nn1;
    let b = 2.0 * s.p1 * same / nn1;
    let b_prime = 1.0 + 2.0 * s.p1 * n_tot / nn1;
    let v1 = w[0] * w[0] + w[1] * w[1];
    let first_order_residual = visibility - (v1 * (1.0 - f * g2) + b * (1.0 - v1) * g2);

    // Exact: V = 1 - [g2 + (P1^2 (1 - V1) + 2 P1 Pn sum w_l <n_!l> + Pn^2 I) / <n>^2] / (1 + g2)
    let i_two = {
        let c = two_photon_coherence(s);
        let diag = c[0] + c[1];
        diag * diag - (c[0] * c[0] + c[1] * c[1])
    };
    let num = s.p1 * s.p1 * (1.0 - v1) + 2.0 * s.p1 * s.pn * other + s.pn * s.pn * i_two;
    let exact = 1.0 - (g2 + num / (mean * mean)) / (1.0 + g2);
    Ok(FockToyReport {
        visibility,
        g2,
        f,
        b,
        b_prime,
        v1,
        first_order_residual,
        exact_residual: visibility - exact,
    })
}

/// `<a_l^dag a_l>` within the two-photon component.
fn two_photon_coherence(s: &FockToyState) -> [f64; 2] {
    let q = s.two_photon_occupation;
    [
        PAIRS.iter().zip(&q).map(|(p, qi)| p.0 as f64 * qi).sum(),
        PAIRS.iter().zip(&q).map(|(p, qi)| p.1 as f64 * qi).sum(),
    ]
}

/// Visibility, `g2` and mean photon number from the explicit density matrix.
fn brute_force(s: &FockToyState) -> (f64, f64, f64) {
    // basis |n_psi, n_perp> with n_psi + n_perp <= 2
    let basis: Vec<(usize, usize)> = (0..=2usize)
        .flat_map(|a| (0..=2 - a).map(move |b| (a, b)))
        .collect();
    let idx = |st: (usize, usize)| basis.iter().position(|&b| b == st).unwrap();
    let d = basis.len();
    let mut rho = alloc::vec![0.0; d * d];
    let mut put = |st: (usize, usize), p: f64| {
        let i = idx(st);
        rho[i * d + i] += p;
    };
    put((0, 0), s.p0);
    put((1, 0), s.p1 * s.single_photon_weights[0]);
    put((0, 1), s.p1 * s.single_photon_weights[1]);
    for (pair, q) in PAIRS.iter().zip(&s.two_photon_occupation) {
        put(*pair, s.pn * q);
    }
    // annihilation operators as dense matrices
    let lower = |mode: usize| -> Vec<f64> {
        let mut m = alloc::vec![0.0; d * d];
        for (j, &(a, b)) in basis.iter().enumerate() {
            let (n, to) = if mode == 0 {
                (a, a.checked_sub(1).map(|a1| (a1, b)))
            } else {
                (b, b.checked_sub(1).map(|b1| (a, b1)))
            };
            if let Some(t) = to {
                m[idx(t) * d + j] = (n as f64).sqrt();
            }
        }
        m
    };
    let ops = [lower(0), lower(1)];
    let mat = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut c = alloc::vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let x = a[i * d + k];
                if x != 0.0 {
                    for j in 0..d {
                        c[i * d + j] += x * b[k * d + j];
                    }
                }
            }
        }
        c
    };
    let dag = |a: &[f64]| -> Vec<f64> {
        let mut t = alloc::vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                t[j * d + i] = a[i * d + j];
            }
        }
        t
    };
    let expect = |op: &[f64]| -> f64 { (0..d).map(|i| (0..d).map(|k| op[i * d + k] * rho[k * d + i]).sum::<f64>()).sum() };
    // mode correlation matrix C[l][m] = <a_l^dag a_m>
    let mut c = [[0.0; 2]; 2];
    for l in 0..2 {
        for m in 0..2 {
            c[l][m] = expect(&mat(&dag(&ops[l]), &ops[m]));
        }
    }
    // <a^dag a^dag a a> summed over modes
    let mut nn = 0.0;
    for l in 0..2 {
        for m in 0..2 {
            let op = mat(&mat(&dag(&ops[l]), &dag(&ops[m])), &mat(&ops[m], &ops[l]));
            nn += expect(&op);
        }
    }
    let mean = c[0][0] + c[1][1];
    let overlap: f64 = c.iter().flatten().map(|x| x * x).sum();
    let visibility = overlap / (nn + mean * mean);
    (visibility, nn / (mean * mean), mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, RMatrix};
    use crate::C64;

    fn kernels_from(g1: CMatrix, g2: RMatrix) -> CorrelationKernels {
        let n = g1.rows();
        CorrelationKernels::new(g1, g2, alloc::vec![0.1; n])
    }

    #[test]
    fn pure_single_photon_has_unit_visibility() {
        let f: Vec<C64> = (0..20).map(|i| C64::from_polar((-(i as f64 - 8.0).powi(2) / 9.0).exp(), 0.2 * i as f64)).collect();
        let g1 = CMatrix::from_fn(20, 20, |i, j| f[i].conj() * f[j]);
        let k = kernels_from(g1, RMatrix::zeros(20, 20));
        let (pcc, _) = coincidence(&k);
        assert!(pcc.abs() < 1e-14);
        assert!((visibility(&k).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_state_limit() {
        let f: Vec<C64> = (0..20).map(|i| C64::new((-(i as f64 - 8.0).powi(2) / 9.0).exp(), 0.1)).collect();
        let g1 = CMatrix::from_fn(20, 20, |i, j| f[i].conj() * f[j]);
        let g2 = RMatrix::from_fn(20, 20, |i, j| f[i].norm_sqr() * f[j].norm_sqr());
        let r = hom_report(&kernels_from(g1, g2)).unwrap();
        assert!((r.visibility - 0.5).abs() < 1e-14);
        assert!((r.g2 - 1.0).abs() < 1e-14);
        assert!((r.f_ratio - 0.5).abs() < 1e-14);
    }

    #[test]
    fn f_ratio_cases() {
        assert_eq!(f_ratio(0.5, 1.0, F_EPSILON), (0.5, false));
        assert_eq!(f_ratio(1.0, 0.3, F_EPSILON).0, 0.0);
        assert!(f_ratio(0.9, 1e-12, F_EPSILON).1);
    }

    fn toy(pairs: [f64; 3]) -> FockToyState {
        FockToyState {
            p0: 0.0,
            p1: 1.0 - 1e-12,
            pn: 1e-12,
            single_photon_weights: [1.0, 0.0],
            two_photon_occupation: pairs,
        }
    }

    #[test]
    fn toy_cases_give_one_two_three() {
        let r = fock_toy_f(&toy([1.0, 0.0, 0.0])).unwrap();
        assert!((r.f - 1.0).abs() < 1e-10);
        let r = fock_toy_f(&toy([0.0, 1.0, 0.0])).unwrap();
        assert!((r.f - 2.0).abs() < 1e-10);
        let r = fock_toy_f(&toy([0.0, 0.0, 1.0])).unwrap();
        assert!((r.f - 3.0).abs() < 1e-10);
    }

    #[test]
    fn toy_rejects_bad_states() {
        let mut s = toy([1.0, 0.0, 0.0]);
        s.p0 = 0.5;
        assert!(fock_toy_f(&s).is_err());
    }
}
