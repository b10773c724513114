// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Lorentzian spectral filtering of the detected field.
//!
//! Conventions: `x(t) = int dw exp(-i w t) X(w)`, so the forward transform
//! carries `exp(+i w t) / (2 pi)`. A filter multiplies `X(w)` by
//! `T(w) = gamma / (i (w - w_c) - gamma)`, which in time is the causal
//! convolution with `h(tau) = -gamma exp(-(gamma + i w_c) tau)`.
//!
//! Detected (external) time arguments are filtered; integrals over the
//! undetected photon are not.

#[cfg(feature = "std")]
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::ansatz::AnsatzSolution;
use crate::correlations::{output_amplitudes, symmetric_two_photon, CorrelationKernels, OutputAmplitudes};
#[cfg(feature = "std")]
use crate::error::invalid;
use crate::error::{require_finite, require_positive, Error};
use crate::linalg::{weighted_gram, weighted_matvec, CMatrix};
use crate::model::TimeGrid;
use crate::{par, Result, C64};

/// Largest transmission tolerated at the Nyquist frequency of the DFT route.
pub const NYQUIST_TRANSMISSION_LIMIT: f64 = 0.05;

/// Frequency response of a linear filter acting on the field.
pub trait Transmission: Sync {
    fn transmission(&self, omega: f64) -> C64;
}

impl<F: Fn(f64) -> C64 + Sync> Transmission for F {
    fn transmission(&self, omega: f64) -> C64 {
        self(omega)
    }
}

/// Lorentzian filter with half-width `gamma_f` (FWHM `2 gamma_f`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub gamma_f: f64,
    pub omega_c: f64,
}

impl FilterSpec {
    pub fn new(gamma_f: f64) -> Result<Self> {
        Self::centered(gamma_f, 0.0)
    }

    pub fn centered(gamma_f: f64, omega_c: f64) -> Result<Self> {
        require_positive("gamma_f", gamma_f)?;
        require_finite("omega_c", omega_c)?;
        Ok(Self { gamma_f, omega_c })
    }

    /// Impulse response `h(tau)`, zero for `tau < 0`.
    pub fn impulse(&self, tau: f64) -> C64 {
        if tau < 0.0 {
            return C64::new(0.0, 0.0);
        }
        -C64::from_polar(self.gamma_f * (-self.gamma_f * tau).exp(), -self.omega_c * tau)
    }

    fn rate(&self) -> C64 {
        C64::new(self.gamma_f, self.omega_c)
    }
}

impl Transmission for FilterSpec {
    fn transmission(&self, omega: f64) -> C64 {
        transmission(self, omega)
    }
}

/// `gamma / (i (omega - omega_c) - gamma)`.
pub fn transmission(spec: &FilterSpec, omega: f64) -> C64 {
    C64::new(spec.gamma_f, 0.0) / C64::new(-spec.gamma_f, omega - spec.omega_c)
}

/// Numerical route used to apply the filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterEngine {
    /// DFT when the grid is uniform and resolves the filter, otherwise exact
    /// time-domain convolution.
    #[default]
    Auto,
    /// Zero-padded DFT. Uniform grids only.
    Fourier,
    /// Exact convolution of the piecewise-linear interpolant.
    TimeDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    pub engine: FilterEngine,
    /// Multiplier of the default zero-padding length.
    pub pad_factor: f64,
    /// Emitter rate setting the minimum padding `4 / gamma`.
    pub emitter_gamma: f64,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            engine: FilterEngine::Auto,
            pad_factor: 1.0,
            emitter_gamma: 1.0,
        }
    }
}

/// A filter bound to a grid, ready to apply to sampled functions.
pub struct BoundFilter<'a> {
    spec: FilterSpec,
    grid: &'a TimeGrid,
    route: Route,
}

enum Route {
    Time(Vec<[C64; 3]>),
    #[cfg(feature = "std")]
    Fourier(fourier::Plan),
}

impl<'a> BoundFilter<'a> {
    pub fn new(spec: &FilterSpec, grid: &'a TimeGrid, opts: &FilterOptions) -> Result<Self> {
        let route = match opts.engine {
            FilterEngine::TimeDomain => Route::Time(time_coefficients(spec, grid)),
            FilterEngine::Fourier => fourier_route(spec, grid, opts)?,
            FilterEngine::Auto => match fourier_route(spec, grid, opts) {
                Ok(r) => r,
                Err(_) => Route::Time(time_coefficients(spec, grid)),
            },
        };
        Ok(Self {
            spec: *spec,
            grid,
            route,
        })
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn uses_fourier(&self) -> bool {
        !matches!(self.route, Route::Time(_))
    }

    /// Filters `x` in place. With `conjugate`, applies `conj(h)` instead.
    pub fn apply(&self, x: &mut [C64], conjugate: bool) {
        assert_eq!(x.len(), self.grid.len());
        if conjugate {
            x.iter_mut().for_each(|z| *z = z.conj());
        }
        match &self.route {
            Route::Time(c) => time_apply(c, x),
            #[cfg(feature = "std")]
            Route::Fourier(p) => p.apply(x),
        }
        if conjugate {
            x.iter_mut().for_each(|z| *z = z.conj());
        }
    }

    pub fn filtered(&self, x: &[C64], conjugate: bool) -> Vec<C64> {
        let mut y = x.to_vec();
        self.apply(&mut y, conjugate);
        y
    }

    /// Filters every row of `m` along its column index.
    pub fn apply_rows(&self, m: &mut CMatrix, conjugate: bool) {
        let n = m.cols();
        par::for_each_row(m.as_mut_slice(), n, |_, row| self.apply(row, conjugate));
    }

    /// Filters every column of `m` along its row index.
    pub fn apply_cols(&self, m: &mut CMatrix, conjugate: bool) {
        let mut t = m.transpose();
        self.apply_rows(&mut t, conjugate);
        *m = t.transpose();
    }
}

#[allow(unused_variables)]
fn fourier_route(spec: &FilterSpec, grid: &TimeGrid, opts: &FilterOptions) -> Result<Route> {
    #[cfg(feature = "std")]
    {
        let h = grid
            .dt()
            .ok_or_else(|| Error::Unsupported("DFT filtering needs a uniform grid".into()))?;
        let nyq = transmission(spec, core::f64::consts::PI / h).norm();
        if nyq > NYQUIST_TRANSMISSION_LIMIT {
            return Err(Error::GridTooCoarse(format!(
                "|T| = {nyq:.3} at the Nyquist frequency (limit {NYQUIST_TRANSMISSION_LIMIT})"
            )));
        }
        if !(opts.pad_factor > 0.0) || !opts.emitter_gamma.is_finite() || opts.emitter_gamma <= 0.0 {
            return Err(invalid("pad_factor", "padding factor and emitter rate must be > 0"));
        }
        let pad_time = opts.pad_factor * f64::max(10.0 / spec.gamma_f, 4.0 / opts.emitter_gamma);
        let pad = (pad_time / h).ceil() as usize;
        Ok(Route::Fourier(fourier::Plan::new(spec, grid.len(), h, pad)))
    }
    #[cfg(not(feature = "std"))]
    {
        Err(Error::Unsupported("DFT filtering requires the `std` feature".into()))
    }
}

/// Per-interval recursion `y[k+1] = E y[k] + a x[k] + b x[k+1]`.
fn time_coefficients(spec: &FilterSpec, grid: &TimeGrid) -> Vec<[C64; 3]> {
    let a = spec.rate();
    let g = spec.gamma_f;
    (0..grid.len() - 1)
        .map(|k| {
            let h = grid.step(k);
            let z = a * h;
            let e = (-z).exp();
            // i0 = int_0^h exp(-a v) dv, j = int_0^h v exp(-a v) dv
            let (i0, j) = if z.norm() < 1e-2 {
                let i0 = C64::new(h, 0.0) * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0);
                let j = C64::new(h * h, 0.0)
                    * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0 + z * z * z * z / 144.0);
                (i0, j)
            } else {
                ((1.0 - e) / a, (1.0 - e * (1.0 + z)) / (a * a))
            };
            let c0 = j / h;
            let c1 = i0 - c0;
            [e, -c0 * g, -c1 * g]
        })
        .collect()
}

fn time_apply(c: &[[C64; 3]], x: &mut [C64]) {
    let mut y = C64::new(0.0, 0.0);
    let mut prev = x[0];
    x[0] = y;
    for k in 0..c.len() {
        let cur = x[k + 1];
        y = c[k][0] * y + c[k][1] * prev + c[k][2] * cur;
        prev = cur;
        x[k + 1] = y;
    }
}

#[cfg(feature = "std")]
pub mod fourier {
    //! Zero-padded DFT filtering on uniform grids.

    use alloc::sync::Arc;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    use rustfft::{Fft, FftPlanner};

    use super::{FilterSpec, Transmission};
    use crate::C64;

    pub(crate) struct Plan {
        n: usize,
        len: usize,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        response: Vec<C64>,
    }

    /// Angular frequency of DFT bin `m` for `len` samples spaced by `h`.
    pub fn bin_frequency(m: usize, len: usize, h: f64) -> f64 {
        let k = if 2 * m >= len { m as f64 - len as f64 } else { m as f64 };
        2.0 * PI * k / (len as f64 * h)
    }

    impl Plan {
        pub(crate) fn new(spec: &FilterSpec, n: usize, h: f64, pad: usize) -> Self {
            Self::with_response(spec, n, h, pad)
        }

        fn with_response(t: &dyn Transmission, n: usize, h: f64, pad: usize) -> Self {
            let len = (n + pad).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(len);
            let inverse = planner.plan_fft_inverse(len);
            let scale = 1.0 / len as f64;
            let response = (0..len)
                .map(|m| t.transmission(bin_frequency(m, len, h)) * scale)
                .collect();
            Self {
                n,
                len,
                forward,
                inverse,
                response,
            }
        }

        pub(crate) fn apply(&self, x: &mut [C64]) {
            let mut buf = alloc::vec![C64::new(0.0, 0.0); self.len];
            buf[..self.n].copy_from_slice(x);
            // exp(+i w t) analysis, then exp(-i w t) synthesis
            self.inverse.process(&mut buf);
            for (b, r) in buf.iter_mut().zip(&self.response) {
                *b *= r;
            }
            self.forward.process(&mut buf);
            x.copy_from_slice(&buf[..self.n]);
        }
    }

    /// Filtered spectrum and full padded time series of `x`.
    ///
    /// Returns `(y, Y, dw)` with `y` of padded length and `Y[m]` the
    /// continuum-normalised spectrum at bin `m`, spaced by `dw`.
    pub fn padded_filter(
        t: &dyn Transmission,
        x: &[C64],
        h: f64,
        pad: usize,
    ) -> (Vec<C64>, Vec<C64>, f64) {
        let len = (x.len() + pad).next_power_of_two();
        let mut planner = FftPlanner::new();
        let mut buf = alloc::vec![C64::new(0.0, 0.0); len];
        buf[..x.len()].copy_from_slice(x);
        planner.plan_fft_inverse(len).process(&mut buf);
        let dw = 2.0 * PI / (len as f64 * h);
        let spectrum: Vec<C64> = buf
            .iter()
            .enumerate()
            .map(|(m, z)| z * (h / (2.0 * PI)) * t.transmission(bin_frequency(m, len, h)))
            .collect();
        let mut y = spectrum.clone();
        planner.plan_fft_forward(len).process(&mut y);
        y.iter_mut().for_each(|z| *z *= dw);
        (y, spectrum, dw)
    }
}

/// Filtered copies of the output amplitudes.
#[derive(Debug, Clone)]
pub struct FilteredWavefunctions {
    pub phi1g: Vec<C64>,
    pub phi1e: Vec<C64>,
    /// Both time arguments filtered.
    pub phi2: CMatrix,
    pub leaked: Vec<C64>,
}

pub fn filter_wavefunctions(
    sol: &AnsatzSolution,
    spec: &FilterSpec,
    opts: &FilterOptions,
) -> Result<FilteredWavefunctions> {
    let f = BoundFilter::new(spec, &sol.grid, opts)?;
    let mut phi2 = sol.phi2.clone();
    f.apply_rows(&mut phi2, false);
    f.apply_cols(&mut phi2, false);
    Ok(FilteredWavefunctions {
        phi1g: f.filtered(&sol.phi1g_final, false),
        phi1e: f.filtered(&sol.phi1e_final, false),
        phi2,
        leaked: f.filtered(&sol.leaked.samples, false),
    })
}

/// Cross kernels mixing one- and two-photon amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossKernels {
    /// `M1(t1, t2) = int conj(S(c, t1)) S(c, t2) dc`.
    pub m1: CMatrix,
    /// `M2(t1, t2) = int phi1(c) conj(S(c, t1)) dc E'(t2)`.
    pub m2: CMatrix,
}

/// Unfiltered cross kernels.
pub fn cross_kernels(sol: &AnsatzSolution) -> CrossKernels {
    let w = sol.grid.weights();
    let s = symmetric_two_photon(&sol.phi2);
    let m1 = weighted_gram(&s, w);
    let conj_phi1: Vec<C64> = sol.phi1g_final.iter().map(|z| z.conj()).collect();
    let mixed = weighted_matvec(&s, w, &conj_phi1);
    let e = &sol.leaked.samples;
    let n = sol.len();
    let m2 = CMatrix::from_fn(n, n, |i, j| mixed[i].conj() * e[j]);
    CrossKernels { m1, m2 }
}

/// Filters both external arguments, conjugating on the first.
pub fn filter_cross_kernels(
    k: &CrossKernels,
    grid: &TimeGrid,
    spec: &FilterSpec,
    opts: &FilterOptions,
) -> Result<CrossKernels> {
    let f = BoundFilter::new(spec, grid, opts)?;
    let run = |m: &CMatrix| {
        let mut m = m.clone();
        f.apply_cols(&mut m, true);
        f.apply_rows(&mut m, false);
        m
    };
    Ok(CrossKernels {
        m1: run(&k.m1),
        m2: run(&k.m2),
    })
}

/// Output amplitudes with every detected time argument filtered.
pub fn filtered_amplitudes(
    sol: &AnsatzSolution,
    spec: &FilterSpec,
    opts: &FilterOptions,
) -> Result<OutputAmplitudes> {
    let f = BoundFilter::new(spec, &sol.grid, opts)?;
    let w = sol.grid.weights();
    let base = output_amplitudes(sol);
    // S is symmetric: filtering its rows filters the second argument, and the
    // transpose carries the filter to the first (external) argument.
    let mut s_ext = base.two_photon.clone();
    f.apply_rows(&mut s_ext, false);
    let s_ext = s_ext.transpose();
    let overlap = weighted_gram(&s_ext, w);
    let conj_phi1: Vec<C64> = sol.phi1g_final.iter().map(|z| z.conj()).collect();
    let mixed = weighted_matvec(&s_ext, w, &conj_phi1);
    let mut two_photon = s_ext;
    f.apply_rows(&mut two_photon, false);
    Ok(OutputAmplitudes {
        leaked: f.filtered(&base.leaked, false),
        phi1: f.filtered(&base.phi1, false),
        phi1e: f.filtered(&base.phi1e, false),
        two_photon,
        overlap,
        mixed,
        ..base
    })
}

/// Filtered `G1`, `G2` and mean photon number.
pub fn filtered_correlations(
    sol: &AnsatzSolution,
    spec: &FilterSpec,
    opts: &FilterOptions,
) -> Result<CorrelationKernels> {
    Ok(filtered_amplitudes(sol, spec, opts)?.kernels(sol.grid.weights()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::solve;
    use crate::correlations::g2_integrated;
    use crate::model::{build_grid, EmitterParams, LeakageParams, PulseParams};

    #[test]
    fn transmission_values() {
        let s = FilterSpec::new(1.5).unwrap();
        assert!((transmission(&s, 0.0) + 1.0).norm() < 1e-15);
        assert!((transmission(&s, 1.5).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((transmission(&s, -1.5).norm_sqr() - 0.5).abs() < 1e-15);
        let far = transmission(&s, 1e6).norm();
        assert!((far * 1e6 / 1.5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn impulse_response_transforms_to_transmission() {
        // T(w) = int h(tau) exp(i w tau) dtau by fine quadrature
        let s = FilterSpec::centered(2.0, 0.5).unwrap();
        let h = 1e-4;
        for &w in &[-3.0, 0.0, 0.5, 4.0] {
            let mut acc = C64::new(0.0, 0.0);
            let steps = 200_000;
            for k in 0..=steps {
                let tau = k as f64 * h;
                let wt = if k == 0 || k == steps { 0.5 } else { 1.0 };
                acc += s.impulse(tau) * C64::from_polar(1.0, w * tau) * (h * wt);
            }
            assert!((acc - transmission(&s, w)).norm() < 1e-6);
        }
    }

    fn smooth(grid: &TimeGrid) -> Vec<C64> {
        grid.nodes()
            .iter()
            .map(|&t| C64::new((-(t - 3.0) * (t - 3.0)).exp(), 0.3 * (-(t - 3.5) * (t - 3.5) / 0.5).exp()))
            .collect()
    }

    #[test]
    fn engines_agree() {
        let g = TimeGrid::uniform(0.0, 20.0, 2048).unwrap();
        let s = FilterSpec::centered(1.66, 0.3).unwrap();
        let x = smooth(&g);
        let fo = BoundFilter::new(&s, &g, &FilterOptions { engine: FilterEngine::Fourier, ..Default::default() }).unwrap();
        let td = BoundFilter::new(&s, &g, &FilterOptions { engine: FilterEngine::TimeDomain, ..Default::default() }).unwrap();
        let a = fo.filtered(&x, false);
        let b = td.filtered(&x, false);
        let err = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        let a = fo.filtered(&x, true);
        let b = td.filtered(&x, true);
        let err = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn time_domain_is_exact_for_linear_input() {
        // x(t) = t on [0, 2]: y(t) = -gamma int_0^t (t - v) exp(-a v) dv
        let s = FilterSpec::centered(3.0, 1.0).unwrap();
        let g = TimeGrid::from_nodes(
            alloc::vec![0.0, 0.1, 0.35, 0.4, 1.0, 2.0],
            alloc::vec![0.0; 6],
        )
        .unwrap();
        let f = BoundFilter::new(&s, &g, &FilterOptions { engine: FilterEngine::TimeDomain, ..Default::default() }).unwrap();
        let x: Vec<C64> = g.nodes().iter().map(|&t| C64::new(t, 0.0)).collect();
        let y = f.filtered(&x, false);
        let a = C64::new(3.0, 1.0);
        for (k, &t) in g.nodes().iter().enumerate() {
            let e = (-a * t).exp();
            let exact = -3.0 * (t / a - (1.0 - e) / (a * a));
            assert!((y[k] - exact).norm() < 1e-13, "{k}");
        }
    }

    #[test]
    fn impulse_gives_causal_exponential() {
        let g = TimeGrid::uniform(0.0, 40.0, 4001).unwrap();
        let s = FilterSpec::new(0.8).unwrap();
        let f = BoundFilter::new(&s, &g, &FilterOptions { engine: FilterEngine::Fourier, ..Default::default() }).unwrap();
        let mut x = alloc::vec![C64::new(0.0, 0.0); g.len()];
        x[1000] = C64::new(1.0, 0.0);
        let y = f.filtered(&x, false);
        let h = g.dt().unwrap();
        // Away from the jump the samples follow h |impulse(tau)|.
        let scale = h * 0.8;
        for (k, yk) in y.iter().enumerate().take(3000).skip(1020) {
            let tau = (k - 1000) as f64 * h;
            let expect = h * s.impulse(tau).norm();
            assert!((yk.norm() - expect).abs() < 1e-2 * scale, "{k}");
        }
        let before: f64 = y[..980].iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(before < 2e-2 * scale);
    }

    #[test]
    fn parseval() {
        let h = 0.01;
        let x: Vec<C64> = (0..1500)
            .map(|k| {
                let t = k as f64 * h;
                C64::from_polar((-(t - 4.0) * (t - 4.0)).exp(), 0.7 * t)
            })
            .collect();
        let s = FilterSpec::new(1.66).unwrap();
        let (y, spec, dw) = fourier::padded_filter(&s, &x, h, 1200);
        let time: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
        let freq: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() * dw * 2.0 * core::f64::consts::PI;
        assert!((time - freq).abs() < 1e-10 * time);
    }

    #[test]
    fn coarse_grid_rejected_by_fourier() {
        let g = TimeGrid::uniform(0.0, 11.0, 1024).unwrap();
        let s = FilterSpec::new(1e3).unwrap();
        let r = BoundFilter::new(&s, &g, &FilterOptions { engine: FilterEngine::Fourier, ..Default::default() });
        assert!(matches!(r, Err(Error::GridTooCoarse(_))));
        let auto = BoundFilter::new(&s, &g, &FilterOptions::default()).unwrap();
        assert!(!auto.uses_fourier());
    }

    fn sample_solution() -> AnsatzSolution {
        let e = EmitterParams::resonant();
        let p = PulseParams::standard(&e, 0.2).unwrap();
        let g = build_grid(&e, &p, 160).unwrap();
        solve(&e, &LeakageParams::new(0.2, 0.7).unwrap(), &p, &g).unwrap()
    }

    #[test]
    fn cross_kernel_filtering_matches_substitution() {
        let sol = sample_solution();
        let spec = FilterSpec::new(1.0).unwrap();
        let opts = FilterOptions { engine: FilterEngine::TimeDomain, ..Default::default() };
        let direct = filter_cross_kernels(&cross_kernels(&sol), &sol.grid, &spec, &opts).unwrap();
        let amp = filtered_amplitudes(&sol, &spec, &opts).unwrap();
        assert!(direct.m1.max_abs_diff(&amp.overlap) < 1e-12);
        let n = sol.len();
        let m2 = CMatrix::from_fn(n, n, |i, j| amp.mixed[i].conj() * amp.leaked[j]);
        assert!(direct.m2.max_abs_diff(&m2) < 1e-12);
        let wf = filter_wavefunctions(&sol, &spec, &opts).unwrap();
        assert!(symmetric_two_photon(&wf.phi2).max_abs_diff(&amp.two_photon) < 1e-12);
        assert!(direct.m1.max_abs_diff(&direct.m1.adjoint()) < 1e-12);
    }

    #[test]
    fn lorentzians_do_not_compose_by_square_root() {
        let sol = sample_solution();
        let opts = FilterOptions { engine: FilterEngine::TimeDomain, ..Default::default() };
        let k = cross_kernels(&sol);
        let once = filter_cross_kernels(&k, &sol.grid, &FilterSpec::new(1.0).unwrap(), &opts).unwrap();
        // squared Lorentzian with the same FWHM as the single one
        let half = FilterSpec::new(1.0 / (2f64.sqrt() - 1.0).sqrt()).unwrap();
        let twice = filter_cross_kernels(
            &filter_cross_kernels(&k, &sol.grid, &half, &opts).unwrap(),
            &sol.grid,
            &half,
            &opts,
        )
        .unwrap();
        assert!(once.m1.max_abs_diff(&twice.m1) > 1e-3);
    }

    #[test]
    fn wide_filter_is_transparent() {
        let sol = sample_solution();
        let opts = FilterOptions::default();
        let k0 = crate::correlations::kernels(&sol);
        let k1 = filtered_correlations(&sol, &FilterSpec::new(1e3).unwrap(), &opts).unwrap();
        assert!((k1.nbar / k0.nbar - 1.0).abs() < 1e-2);
        let (a, b) = (g2_integrated(&k0).unwrap(), g2_integrated(&k1).unwrap());
        assert!((a / b - 1.0).abs() < 1e-2);
        let zero = CrossKernels { m1: CMatrix::zeros(sol.len(), sol.len()), m2: CMatrix::zeros(sol.len(), sol.len()) };
        let z = filter_cross_kernels(&zero, &sol.grid, &FilterSpec::new(1.0).unwrap(), &opts).unwrap();
        assert_eq!(z, zero);
    }
}
