// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Ansatz-versus-master-equation comparison with a cavity filter.

use std::io::Write;

use sps_purity_core::hom::{hom_report, HomReport};
use sps_purity_core::model::make_grid;
use sps_purity_core::pipeline::{evaluate, PointConfig, PointReport};
use sps_purity_core::qrt::{qrt_g1_g2, QrtParams};

use crate::fmt_f64;

pub const ORACLE_HEADER: [&str; 14] = [
    "sigma_gamma",
    "x",
    "theta",
    "gamma_f",
    "kappa",
    "n",
    "g2_ansatz",
    "g2_qrt",
    "visibility_ansatz",
    "visibility_qrt",
    "rel_g2",
    "rel_visibility",
    "nbar_qrt",
    "errors",
];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub sigma: f64,
    pub x: f64,
    pub theta: f64,
    pub gamma_f: f64,
    pub kappa: f64,
    pub n: usize,
    pub ansatz: Option<HomReport>,
    pub qrt: Option<HomReport>,
    pub error: String,
}

impl OracleRow {
    /// `(ansatz - qrt)/qrt` for g2 and visibility.
    pub fn relative(&self) -> Option<(f64, f64)> {
        let (a, q) = (self.ansatz?, self.qrt?);
        Some(((a.g2 - q.g2) / q.g2, (a.visibility - q.visibility) / q.visibility))
    }
}

/// Master-equation metrics for `cfg` with a cavity of decay `kappa`.
pub fn qrt_report(cfg: &PointConfig, kappa: f64, cutoff: usize) -> sps_purity_core::Result<HomReport> {
    let params = QrtParams::new(cfg.emitter, cfg.leak, cfg.pulse, kappa)?.with_cutoff(cutoff)?;
    let grid = make_grid(cfg.grid_kind, &cfg.emitter, &cfg.pulse, cfg.n)?;
    hom_report(&qrt_g1_g2(&params, &grid)?)
}

/// Compares a filtered point against the cavity model with
/// `kappa = kappa_factor * gamma_f`. `ansatz` is recomputed when absent.
pub fn compare(cfg: &PointConfig, ansatz: Option<&PointReport>, kappa_factor: f64, cutoff: usize) -> OracleRow {
    let gamma_f = cfg.filter.map_or(f64::INFINITY, |f| f.gamma_f);
    let kappa = kappa_factor * gamma_f;
    let mut errors = Vec::new();
    let ansatz = match ansatz {
        Some(r) => Some(r.hom),
        None => evaluate(cfg).map(|r| r.hom).map_err(|e| errors.push(format!("ansatz: {e}"))).ok(),
    };
    let qrt = qrt_report(cfg, kappa, cutoff).map_err(|e| errors.push(format!("qrt: {e}"))).ok();
    OracleRow {
        sigma: cfg.pulse.sigma,
        x: cfg.leak.magnitude,
        theta: cfg.leak.phase,
        gamma_f,
        kappa,
        n: cfg.n,
        ansatz,
        qrt,
        error: errors.join("; "),
    }
}

pub fn write_csv<W: Write>(rows: &[OracleRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ORACLE_HEADER)?;
    let nan = f64::NAN;
    for r in rows {
        let (rg, rv) = r.relative().unwrap_or((nan, nan));
        let a = r.ansatz.map_or((nan, nan), |h| (h.g2, h.visibility));
        let q = r.qrt.map_or((nan, nan, nan), |h| (h.g2, h.visibility, h.nbar));
        let mut rec: Vec<String> = [r.sigma, r.x, r.theta, r.gamma_f, r.kappa].map(fmt_f64).into();
        rec.push(r.n.to_string());
        rec.extend([a.0, q.0, a.1, q.1, rg, rv, q.2].map(fmt_f64));
        rec.push(r.error.clone());
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sps_purity_core::filter::FilterSpec;

    #[test]
    fn agrees_at_quadrature_phase() {
        let cfg = PointConfig::standard(0.1, 0.1, core::f64::consts::FRAC_PI_2, 256)
            .unwrap()
            .with_filter(Some(FilterSpec::new(1.66).unwrap()));
        let row = compare(&cfg, None, 2.0, 2);
        assert!(row.error.is_empty(), "{}", row.error);
        let (rg, rv) = row.relative().unwrap();
        assert!(rg.abs() < 0.03 && rv.abs() < 0.01, "{rg} {rv}");
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }
}
