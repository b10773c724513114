// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use sps_purity_core::ansatz::{solve, solve_with_drive};
use sps_purity_core::filter::FilterSpec;
use sps_purity_core::model::{build_grid, make_grid, rabi_envelope, EmitterParams, GridKind, LeakageParams, PulseParams};
use sps_purity_core::pipeline::{evaluate, PointConfig};

fn point(sigma: f64, x: f64, theta: f64, n: usize) -> PointConfig {
    PointConfig::standard(sigma, x, theta, n).unwrap()
}

#[test]
fn phase_sign_symmetry_on_resonance() {
    for &th in &[PI / 4.0, 3.0 * PI / 4.0] {
        let a = evaluate(&point(0.1, 0.1, th, 256)).unwrap().hom;
        let b = evaluate(&point(0.1, 0.1, -th, 256)).unwrap().hom;
        assert!((a.g2 - b.g2).abs() < 1e-10);
        assert!((a.visibility - b.visibility).abs() < 1e-10);
    }
}

#[test]
fn detuning_breaks_phase_symmetry() {
    let mut cfg = point(0.1, 0.1, PI / 2.0, 256);
    cfg.emitter = EmitterParams::new(1.0, 0.0, 0.5).unwrap();
    let a = evaluate(&cfg).unwrap().hom;
    cfg.leak = LeakageParams::new(0.1, -PI / 2.0).unwrap();
    let b = evaluate(&cfg).unwrap().hom;
    assert!((a.g2 - b.g2).abs() > 1e-6);
}

#[test]
fn decay_rate_sets_the_time_unit() {
    let base = evaluate(&point(0.2, 0.05, 1.0, 256)).unwrap().hom;
    let e = EmitterParams::new(2.5, 0.0, 0.0).unwrap();
    let cfg = PointConfig {
        emitter: e,
        pulse: PulseParams::standard(&e, 0.2 / 2.5).unwrap(),
        ..point(0.2, 0.05, 1.0, 256)
    };
    let scaled = evaluate(&cfg).unwrap().hom;
    assert!((base.g2 - scaled.g2).abs() < 1e-10 * base.g2.max(1.0));
    assert!((base.visibility - scaled.visibility).abs() < 1e-10);
    assert!((base.nbar - scaled.nbar).abs() < 1e-10);
}

#[test]
fn emitter_history_is_causal() {
    let e = EmitterParams::resonant();
    let p = PulseParams::standard(&e, 0.3).unwrap();
    let g = build_grid(&e, &p, 256).unwrap();
    let cut = g.nodes()[40];
    let full = solve(&e, &LeakageParams::none(), &p, &g).unwrap();
    let drive = |t: f64| rabi_envelope(&p, t) * (1.0 + 4.0 * (t - cut).max(0.0).powi(2));
    let trunc = solve_with_drive(&e, &LeakageParams::none(), &drive, &g).unwrap();
    for k in 0..=40 {
        assert_eq!(full.ce[k], trunc.ce[k]);
        assert_eq!(full.excited_population[k], trunc.excited_population[k]);
    }
    assert!((full.ce[60] - trunc.ce[60]).norm() > 1e-3);
}

#[test]
fn two_photon_probability_grows_linearly_with_short_pulses() {
    let e = EmitterParams::resonant();
    let p2 = |s: f64| {
        let p = PulseParams::standard(&e, s).unwrap();
        let g = make_grid(GridKind::Auto, &e, &p, 512).unwrap();
        solve(&e, &LeakageParams::none(), &p, &g).unwrap().two_photon_probability()
    };
    let slope = (p2(0.004) / p2(0.001)).ln() / 4f64.ln();
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
}

#[test]
fn refined_and_uniform_grids_agree() {
    let mut a = point(0.1, 0.1, 2.0, 1024);
    a.grid_kind = GridKind::Uniform;
    let mut b = a;
    b.grid_kind = GridKind::Refined;
    let (ra, rb) = (evaluate(&a).unwrap().hom, evaluate(&b).unwrap().hom);
    assert!((ra.g2 / rb.g2 - 1.0).abs() < 1e-3);
    assert!((ra.visibility - rb.visibility).abs() < 1e-4);
}

#[test]
fn narrow_filter_removes_photons() {
    for &(s, x, th) in &[(0.02, 0.02, 0.0), (0.1, 0.1, PI), (0.5, 0.0, 0.0)] {
        let open = evaluate(&point(s, x, th, 256)).unwrap().hom;
        let f = evaluate(&point(s, x, th, 256).with_filter(Some(FilterSpec::new(1.66).unwrap()))).unwrap().hom;
        assert!(f.nbar < open.nbar);
    }
}

#[test]
fn leakage_adds_coherent_photons() {
    let base = evaluate(&point(0.05, 0.0, 0.0, 256)).unwrap().hom;
    let leaky = evaluate(&point(0.05, 0.1, PI / 2.0, 256)).unwrap().hom;
    assert!(leaky.g2 > base.g2);
    assert!(leaky.visibility < base.visibility);
}
