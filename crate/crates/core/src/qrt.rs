// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Density-matrix reference model: the emitter output cascaded into a
//! single-mode filter cavity, with two-time correlations from the quantum
//! regression theorem.
//!
//! Basis ordering is `|n> (x) |s>` with cavity photon number `n` and emitter
//! state `s in {g, e}`. Density matrices are vectorised row-major, so that
//! `vec(A rho B) = (A (x) B^T) vec(rho)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::correlations::CorrelationKernels;
use crate::error::{invalid, require_positive, Error};
use crate::linalg::{CMatrix, RMatrix};
use crate::model::{rabi_envelope, EmitterParams, LeakageParams, PulseParams, TimeGrid};
use crate::special::gauss_erfcx;
use crate::{par, Result, C64};

type DM = DMatrix<C64>;

/// Largest tolerated trace drift of a propagated density matrix.
pub const TRACE_TOLERANCE: f64 = 1e-6;

/// Drive values below this fraction of the peak are treated as zero.
const DRIVE_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrtParams {
    pub emitter: EmitterParams,
    pub leak: LeakageParams,
    pub pulse: PulseParams,
    /// Cavity energy decay rate.
    pub kappa: f64,
    /// Highest cavity photon number kept.
    pub cavity_cutoff: usize,
}

impl QrtParams {
    pub fn new(emitter: EmitterParams, leak: LeakageParams, pulse: PulseParams, kappa: f64) -> Result<Self> {
        require_positive("kappa", kappa)?;
        Ok(Self {
            emitter,
            leak,
            pulse,
            kappa,
            cavity_cutoff: 2,
        })
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(invalid("cavity_cutoff", "must be at least 1"));
        }
        self.cavity_cutoff = cutoff;
        Ok(self)
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        2 * (self.cavity_cutoff + 1)
    }

    fn drive(&self, t: f64) -> f64 {
        let v = rabi_envelope(&self.pulse, t);
        if v < DRIVE_FLOOR * self.pulse.peak() {
            0.0
        } else {
            v
        }
    }
}

/// Density matrix at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrtState {
    pub rho: DM,
    pub t: f64,
}

impl QrtState {
    /// Emitter and cavity in their ground states.
    pub fn ground(params: &QrtParams, t: f64) -> Self {
        let d = params.dim();
        let mut rho = DM::zeros(d, d);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        Self { rho, t }
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Emitter excited-state population.
    pub fn excited_population(&self) -> f64 {
        (0..self.rho.nrows()).filter(|i| i % 2 == 1).map(|i| self.rho[(i, i)].re).sum()
    }

    /// Mean cavity photon number.
    pub fn cavity_photons(&self) -> f64 {
        (0..self.rho.nrows()).map(|i| (i / 2) as f64 * self.rho[(i, i)].re).sum()
    }
}

struct Operators {
    a: DM,
    sm: DM,
    sx: DM,
    see: DM,
    id: DM,
}

fn operators(p: &QrtParams) -> Operators {
    let d = p.dim();
    let mut a = DM::zeros(d, d);
    let mut sm = DM::zeros(d, d);
    let mut sx = DM::zeros(d, d);
    let mut see = DM::zeros(d, d);
    let one = C64::new(1.0, 0.0);
    for n in 0..=p.cavity_cutoff {
        let g = 2 * n;
        let e = 2 * n + 1;
        sm[(g, e)] = one;
        sx[(g, e)] = one;
        sx[(e, g)] = one;
        see[(e, e)] = one;
        if n > 0 {
            let s = (n as f64).sqrt();
            a[(2 * (n - 1), g)] = C64::new(s, 0.0);
            a[(2 * (n - 1) + 1, e)] = C64::new(s, 0.0);
        }
    }
    Operators {
        a,
        sm,
        sx,
        see,
        id: DM::identity(d, d),
    }
}

fn kron(a: &DM, b: &DM) -> DM {
    a.kronecker(b)
}

/// Superoperator `rho -> -i [H, rho]`.
fn commutator_super(h: &DM, id: &DM) -> DM {
    let mi = C64::new(0.0, -1.0);
    (kron(h, id) - kron(id, &h.transpose())) * mi
}

fn dissipator_super(c: &DM, id: &DM) -> DM {
    let cdc = c.adjoint() * c;
    let half = C64::new(0.5, 0.0);
    kron(c, &c.map(|z| z.conj())) - (kron(&cdc, id) + kron(id, &cdc.transpose())) * half
}

/// Matrix exponential by scaling and squaring of a degree-18 Taylor series.
fn expm(m: &DM) -> DM {
    let norm = (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * C64::new(scale, 0.0);
    let n = m.nrows();
    let mut out = DM::identity(n, n);
    let mut term = DM::identity(n, n);
    for k in 1..=18 {
        term = &term * &a * C64::new(1.0 / k as f64, 0.0);
        out += &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

/// Generator split as `L(t) = L0 + Omega(t) L1`.
struct Generator {
    l0: DM,
    l1: DM,
    /// `[L0, L1]`
    comm: DM,
}

fn generator(p: &QrtParams, ops: &Operators) -> Generator {
    let gamma = p.emitter.gamma;
    let kappa = p.kappa;
    let coupling = (gamma * kappa).sqrt() / (2.0 * SQRT_2);
    let h0 = &ops.see * C64::new(p.emitter.delta, 0.0)
        + (ops.a.adjoint() * &ops.sm + &ops.a * ops.sm.adjoint()) * C64::new(coupling, 0.0);
    let c1 = &ops.sm * C64::new(0.0, gamma.sqrt()) + &ops.a * C64::new((0.5 * kappa).sqrt(), 0.0);
    let c2 = &ops.a * C64::new((0.5 * kappa).sqrt(), 0.0);
    let l0 = commutator_super(&h0, &ops.id) + dissipator_super(&c1, &ops.id) + dissipator_super(&c2, &ops.id);
    let l1 = commutator_super(&(&ops.sx * C64::new(0.5, 0.0)), &ops.id);
    let comm = &l0 * &l1 - &l1 * &l0;
    Generator { l0, l1, comm }
}

impl Generator {
    /// Fourth-order Magnus propagator over `[t, t + h]`.
    fn step(&self, p: &QrtParams, t: f64, h: f64) -> DM {
        let r = 3f64.sqrt() / 6.0;
        let wa = p.drive(t + h * (0.5 - r));
        let wb = p.drive(t + h * (0.5 + r));
        let mut m = &self.l0 * C64::new(h, 0.0) + &self.l1 * C64::new(0.5 * h * (wa + wb), 0.0);
        if wa != wb {
            m += &self.comm * C64::new(3f64.sqrt() / 12.0 * h * h * (wa - wb), 0.0);
        }
        expm(&m)
    }

    fn rhs(&self, omega: f64, v: &[C64]) -> Vec<C64> {
        let n = v.len();
        (0..n)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .map(|(j, vj)| (self.l0[(i, j)] + self.l1[(i, j)] * omega) * vj)
                    .sum()
            })
            .collect()
    }
}

fn vectorise(m: &DM) -> Vec<C64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            v.push(m[(i, j)]);
        }
    }
    v
}

fn unvectorise(v: &[C64], d: usize) -> DM {
    DM::from_fn(d, d, |i, j| v[i * d + j])
}

/// Propagates by classical RK4 of the master equation.
pub fn propagate(state: &QrtState, params: &QrtParams, t_target: f64) -> Result<QrtState> {
    if !(t_target >= state.t) {
        return Err(invalid("t_target", "must not precede the state time"));
    }
    let ops = operators(params);
    let gen = generator(params, &ops);
    let d = params.dim();
    let rate = params.kappa.max(params.emitter.gamma).max(params.pulse.peak());
    let h_max = f64::min(params.pulse.sigma / 16.0, 0.5 / rate);
    let span = t_target - state.t;
    let steps = ((span / h_max).ceil() as usize).max(1);
    let h = span / steps as f64;
    let mut v = vectorise(&state.rho);
    let mut t = state.t;
    let axpy = |a: &[C64], s: f64, b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + y * s).collect() };
    for _ in 0..steps {
        let w1 = params.drive(t);
        let w2 = params.drive(t + 0.5 * h);
        let w3 = params.drive(t + h);
        let k1 = gen.rhs(w1, &v);
        let k2 = gen.rhs(w2, &axpy(&v, 0.5 * h, &k1));
        let k3 = gen.rhs(w2, &axpy(&v, 0.5 * h, &k2));
        let k4 = gen.rhs(w3, &axpy(&v, h, &k3));
        for i in 0..v.len() {
            v[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        t += h;
    }
    let out = QrtState {
        rho: unvectorise(&v, d),
        t: t_target,
    };
    let drift = (out.trace() - state.trace()).norm();
    if drift > TRACE_TOLERANCE {
        return Err(Error::NonConvergence {
            stage: "qrt propagation",
            detail: format!("trace drift {drift:.3e}"),
        });
    }
    Ok(out)
}

/// Leaked drive after the cavity, `int (kappa/2) E(t') exp(-kappa (t - t')/2) dt'`
/// with `E = Omega / (2 sqrt(gamma))`, integrated from zero.
///
/// Real for a cavity resonant with the drive. The leakage factor is applied
/// separately.
pub fn leaked_alpha(params: &QrtParams, t: f64) -> f64 {
    let p = &params.pulse;
    let k = params.kappa;
    let s = p.sigma;
    let pref = k * p.area / (8.0 * params.emitter.gamma.sqrt());
    let za = (0.5 * k * s * s + p.t0) / (SQRT_2 * s);
    let tail = crate::special::erfcx(za) * (-0.5 * k * t - p.t0 * p.t0 / (2.0 * s * s)).exp();
    pref * (gauss_erfcx(t - p.t0, s, k) - tail)
}

/// Precomputed propagation data on a grid.
struct Engine {
    d: usize,
    /// Row-major `d^2 x d^2` step propagators.
    steps: Vec<Vec<C64>>,
    /// Density matrices at every node, vectorised.
    rho: Vec<Vec<C64>>,
    a: DM,
    alpha: Vec<C64>,
}

impl Engine {
    fn new(params: &QrtParams, grid: &TimeGrid) -> Result<Self> {
        let ops = operators(params);
        let gen = generator(params, &ops);
        let d = params.dim();
        let t = grid.nodes();
        let mut steps: Vec<Vec<C64>> = Vec::with_capacity(t.len() - 1);
        let mut last: Option<(u64, u64, usize)> = None;
        for k in 0..t.len() - 1 {
            let h = t[k + 1] - t[k];
            let quiet = params.drive(t[k]) == 0.0 && params.drive(t[k + 1]) == 0.0 && params.drive(t[k] + 0.5 * h) == 0.0;
            let key = (h.to_bits(), 0u64, 0usize);
            if quiet {
                if let Some((hb, _, idx)) = last {
                    if hb == key.0 {
                        let u = steps[idx].clone();
                        steps.push(u);
                        continue;
                    }
                }
            }
            let u = gen.step(params, t[k], h);
            steps.push(vectorise(&u));
            last = if quiet { Some((key.0, 0, k)) } else { None };
        }
        let x = params.leak.factor();
        let alpha: Vec<C64> = t.iter().map(|&s| x * leaked_alpha(params, s)).collect();
        let mut rho = Vec::with_capacity(t.len());
        let mut v = vectorise(&QrtState::ground(params, t[0]).rho);
        rho.push(v.clone());
        for u in &steps {
            v = matvec(u, &v);
            rho.push(v.clone());
        }
        for (k, r) in rho.iter().enumerate() {
            let tr: C64 = (0..d).map(|i| r[i * d + i]).sum();
            if (tr - 1.0).norm() > TRACE_TOLERANCE {
                return Err(Error::NonConvergence {
                    stage: "qrt propagation",
                    detail: format!("trace drift {:.3e} at node {k}", (tr - 1.0).norm()),
                });
            }
        }
        Ok(Self {
            d,
            steps,
            rho,
            a: ops.a,
            alpha,
        })
    }

    fn output_op(&self, k: usize, kappa: f64) -> DM {
        let d = self.d;
        &self.a * C64::new((0.5 * kappa).sqrt(), 0.0) + DM::identity(d, d) * self.alpha[k]
    }
}

fn matvec(m: &[C64], v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|i| m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn matvec_into(m: &[C64], v: &[C64], out: &mut [C64]) {
    let n = v.len();
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            acc += row[j] * v[j];
        }
        out[i] = acc;
    }
}

/// `Tr(B X)` with `bt` the row-major transpose of `B`.
fn trace_with(bt: &[C64], x: &[C64]) -> C64 {
    bt.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn transposed(m: &DM) -> Vec<C64> {
    vectorise(&m.transpose())
}

fn apply_lr(l: &DM, rho: &[C64], r: &DM, d: usize) -> Vec<C64> {
    vectorise(&(l * unvectorise(rho, d) * r))
}

/// Excited-state population of the emitter at every node.
pub fn emitter_population(params: &QrtParams, grid: &TimeGrid) -> Result<Vec<f64>> {
    let eng = Engine::new(params, grid)?;
    let d = eng.d;
    Ok(eng
        .rho
        .iter()
        .map(|r| (0..d).filter(|i| i % 2 == 1).map(|i| r[i * d + i].re).sum())
        .collect())
}

/// Filtered `G1` and `G2` of the cavity output on a grid.
pub fn qrt_g1_g2(params: &QrtParams, grid: &TimeGrid) -> Result<CorrelationKernels> {
    let eng = Engine::new(params, grid)?;
    let n = grid.len();
    let d = eng.d;
    let outs: Vec<DM> = (0..n).map(|k| eng.output_op(k, params.kappa)).collect();
    let number_t: Vec<Vec<C64>> = outs.iter().map(|o| transposed(&(o.adjoint() * o))).collect();
    let out_t: Vec<Vec<C64>> = outs.iter().map(transposed).collect();

    // row i holds G2(t_i, t_k) and G1(t_i, t_k) for k >= i
    let rows: Vec<(Vec<f64>, Vec<C64>)> = par::map_range(n, |i| {
        let mut x = apply_lr(&outs[i], &eng.rho[i], &outs[i].adjoint(), d);
        let mut y = apply_lr(&DM::identity(d, d), &eng.rho[i], &outs[i].adjoint(), d);
        let mut g2 = vec![0.0; n];
        let mut g1 = vec![C64::new(0.0, 0.0); n];
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        for k in i..n {
            if k > i {
                matvec_into(&eng.steps[k - 1], &x, &mut tmp);
                core::mem::swap(&mut x, &mut tmp);
                matvec_into(&eng.steps[k - 1], &y, &mut tmp);
                core::mem::swap(&mut y, &mut tmp);
            }
            g2[k] = trace_with(&number_t[k], &x).re;
            g1[k] = trace_with(&out_t[k], &y);
        }
        (g2, g1)
    });
    let mut g1 = CMatrix::zeros(n, n);
    let mut g2 = RMatrix::zeros(n, n);
    for (i, (r2, r1)) in rows.iter().enumerate() {
        for k in i..n {
            g2[(i, k)] = r2[k];
            g2[(k, i)] = r2[k];
            g1[(i, k)] = r1[k];
            g1[(k, i)] = r1[k].conj();
        }
        g1[(i, i)].im = 0.0;
    }
    Ok(CorrelationKernels::new(g1, g2, grid.weights().to_vec()))
}

/// `G2` assembled from separately propagated operator insertions, grouped
/// by powers of the leakage factor.
pub fn qrt_g2_by_terms(params: &QrtParams, grid: &TimeGrid) -> Result<RMatrix> {
    let eng = Engine::new(params, grid)?;
    let n = grid.len();
    let d = eng.d;
    let a = &eng.a;
    let ad = a.adjoint();
    let id = DM::identity(d, d);
    let x = params.leak.factor();
    let xc = x.conj();
    let rk = (0.5 * params.kappa).sqrt();
    let kh = 0.5 * params.kappa;
    let alpha: Vec<f64> = grid.nodes().iter().map(|&t| leaked_alpha(params, t)).collect();
    let tn = transposed(&(&ad * a));
    let ta = transposed(a);
    let tad = transposed(&ad);
    let ti = transposed(&id);

    let rows: Vec<Vec<f64>> = par::map_range(n, |i| {
        // insertions at t1: a rho a^dag, a rho, rho a^dag, rho
        let mut ins = [
            apply_lr(a, &eng.rho[i], &ad, d),
            apply_lr(a, &eng.rho[i], &id, d),
            apply_lr(&id, &eng.rho[i], &ad, d),
            eng.rho[i].clone(),
        ];
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        let mut out = vec![0.0; n];
        let a1 = alpha[i];
        for k in i..n {
            if k > i {
                for v in ins.iter_mut() {
                    matvec_into(&eng.steps[k - 1], v, &mut tmp);
                    core::mem::swap(v, &mut tmp);
                }
            }
            let a2 = alpha[k];
            let tr = |o: &[C64], v: &[C64]| trace_with(o, v);
            let [aa, al, ar, rr] = &ins;
            let t1 = tr(&tn, aa) * (kh * kh);
            let t2 = tr(&tn, al) * (kh * rk * a1) * xc
                + tr(&tn, ar) * (kh * rk * a1) * x
                + tr(&ta, aa) * (kh * rk * a2) * xc
                + tr(&tad, aa) * (kh * rk * a2) * x;
            let x2 = x.norm_sqr();
            let t3 = tr(&tn, rr) * (kh * x2 * a1 * a1)
                + tr(&ti, aa) * (kh * x2 * a2 * a2)
                + tr(&ta, ar) * (kh * x2 * a1 * a2)
                + tr(&tad, al) * (kh * x2 * a1 * a2);
            let t4 = tr(&ta, al) * (kh * a1 * a2) * (xc * xc) + tr(&tad, ar) * (kh * a1 * a2) * (x * x);
            let t5 = tr(&ta, rr) * (rk * a1 * a1 * a2) * (x * xc * xc)
                + tr(&tad, rr) * (rk * a1 * a1 * a2) * (xc * x * x)
                + tr(&ti, al) * (rk * a1 * a2 * a2) * (x * xc * xc)
                + tr(&ti, ar) * (rk * a1 * a2 * a2) * (xc * x * x);
            let t6 = x2 * x2 * a1 * a1 * a2 * a2;
            out[k] = (t1 + t2 + t3 + t4 + t5).re + t6;
        }
        out
    });
    let mut g2 = RMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        for k in i..n {
            g2[(i, k)] = r[k];
            g2[(k, i)] = r[k];
        }
    }
    Ok(g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_grid;

    fn params(x: f64, theta: f64, sigma: f64, kappa: f64) -> QrtParams {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, sigma).unwrap();
        QrtParams::new(e, LeakageParams::new(x, theta).unwrap(), p, kappa).unwrap()
    }

    #[test]
    fn expm_matches_closed_form() {
        // exp of t [[0, 1], [-1, 0]] is a rotation.
        let t = 7.3;
        let m = DM::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(t, 0.0), C64::new(-t, 0.0), C64::new(0.0, 0.0)]);
        let e = expm(&m);
        assert!((e[(0, 0)] - C64::new(t.cos(), 0.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - C64::new(t.sin(), 0.0)).norm() < 1e-13);
        let d = DM::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-40.0, 3.0), C64::new(0.2, 0.0)]));
        let e = expm(&d);
        assert!((e[(0, 0)] - C64::new(-40.0, 3.0).exp()).norm() < 1e-25);
        assert!((e[(1, 1)] - C64::new(0.2f64.exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn alpha_matches_quadrature() {
        let q = params(0.1, 0.0, 0.1, 3.32);
        let e_field = |t: f64| rabi_envelope(&q.pulse, t) / (2.0 * q.emitter.gamma.sqrt());
        for k in 0..100 {
            let t = 0.04 * k as f64;
            let steps = 20_000;
            let h = t / steps as f64;
            let mut acc = 0.0;
            for j in 0..=steps {
                let s = j as f64 * h;
                let w = if j == 0 || j == steps {
                    1.0 / 3.0
                } else if j % 2 == 1 {
                    4.0 / 3.0
                } else {
                    2.0 / 3.0
                };
                acc += w * 0.5 * q.kappa * e_field(s) * (-0.5 * q.kappa * (t - s)).exp();
            }
            acc *= h;
            assert!((leaked_alpha(&q, t) - acc).abs() < 1e-8, "t={t}");
        }
        assert!(leaked_alpha(&q, -5.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_wide_cavity_follows_drive() {
        let q = params(0.1, 0.0, 0.3, 1e4);
        let t = q.pulse.t0 + 0.1;
        let e = rabi_envelope(&q.pulse, t) / 2.0;
        assert!((leaked_alpha(&q, t) / e - 1.0).abs() < 1e-2);
    }

    #[test]
    fn undriven_stays_ground() {
        let mut q = params(0.0, 0.0, 0.1, 3.32);
        q.pulse.area = 0.0;
        let s = propagate(&QrtState::ground(&q, 0.0), &q, 5.0).unwrap();
        assert_eq!(s.rho, QrtState::ground(&q, 0.0).rho);
    }

    #[test]
    fn trace_and_positivity_over_pulse() {
        let q = params(0.0, 0.0, 0.1, 3.32);
        let mut s = QrtState::ground(&q, 0.0);
        for k in 1..=30 {
            s = propagate(&s, &q, 0.1 * k as f64).unwrap();
            assert!((s.trace() - 1.0).norm() < 1e-8);
            assert!(s.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn rk4_and_magnus_agree() {
        let q = params(0.0, 0.0, 0.2, 3.32);
        let g = build_grid(&q.emitter, &q.pulse, 256).unwrap();
        let pop = emitter_population(&q, &g).unwrap();
        let k = 60;
        let s = propagate(&QrtState::ground(&q, 0.0), &q, g.nodes()[k]).unwrap();
        assert!((s.excited_population() - pop[k]).abs() < 1e-7);
    }

    #[test]
    fn term_list_matches_direct() {
        for &(x, th) in &[(0.0, 0.0), (0.3, 0.8), (0.1, -2.5)] {
            let q = params(x, th, 0.2, 3.32);
            let g = build_grid(&q.emitter, &q.pulse, 96).unwrap();
            let direct = qrt_g1_g2(&q, &g).unwrap();
            let terms = qrt_g2_by_terms(&q, &g).unwrap();
            let scale = direct.g2.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(direct.g2.max_abs_diff(&terms) < 1e-10 * scale);
        }
    }

    #[test]
    fn kernel_structure() {
        let q = params(0.2, 1.0, 0.2, 3.32);
        let g = build_grid(&q.emitter, &q.pulse, 96).unwrap();
        let k = qrt_g1_g2(&q, &g).unwrap();
        assert!(k.g1.max_abs_diff(&k.g1.adjoint()) < 1e-8);
        assert!(k.g2.max_abs_diff(&k.g2.transpose()) < 1e-8);
        assert!(k.g2.as_slice().iter().all(|&v| v > -1e-8));
    }
}
