// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Grid sweeps: solve, correlate, filter, score and write ordered CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use sps_purity_core::filter::FilterSpec;
use sps_purity_core::model::{EmitterParams, LeakageParams, PulseParams, MIN_GRID_POINTS};
use sps_purity_core::pipeline::{evaluate_solution, solve_point, PointConfig, PointReport};

use crate::cache::SolutionCache;
use crate::config::SweepConfig;
use crate::oracle::{self, OracleRow};
use crate::{fmt_f64, plot, Status, ValidationError};

pub const CSV_HEADER: [&str; 14] = [
    "sigma_gamma",
    "x",
    "theta",
    "gamma_f",
    "delta",
    "n",
    "g2",
    "visibility",
    "f_ratio",
    "nbar",
    "norm_error",
    "method",
    "flags",
    "errors",
];

pub const MINIMA_HEADER: [&str; 11] = [
    "x",
    "theta",
    "gamma_f",
    "sigma_min",
    "g2_min",
    "visibility_at_min",
    "f_ratio_at_min",
    "nbar_at_min",
    "sigma_vmax",
    "visibility_max",
    "interior",
];

/// Expanded and validated sweep grid.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub sigmas: Vec<f64>,
    pub xs: Vec<f64>,
    pub thetas: Vec<f64>,
    pub filters: Vec<Option<f64>>,
    /// One solver configuration per `(sigma, x, theta)`, sigma outermost.
    pub points: Vec<PointConfig>,
}

impl SweepPlan {
    pub fn new(cfg: &SweepConfig) -> Result<Self, ValidationError> {
        let g = &cfg.grid;
        let sigmas = g.sigma_gamma.expand("sigma_gamma")?;
        let xs = g.x.expand("x")?;
        let thetas = g.theta.expand("theta")?;
        if g.gamma_f.is_empty() {
            return Err(ValidationError("gamma_f: empty list".into()));
        }
        let filters = g.gamma_f.iter().map(|f| f.value()).collect::<Result<Vec<_>, _>>()?;
        if g.n < MIN_GRID_POINTS {
            return Err(ValidationError(format!("n: need at least {MIN_GRID_POINTS}, got {}", g.n)));
        }
        let area = g.area.value()?;
        let grid_kind = cfg.grid_kind()?;
        let engine = cfg.engine()?;
        let emitter = EmitterParams::new(1.0, 0.0, g.delta)?;
        let mut points = Vec::with_capacity(sigmas.len() * xs.len() * thetas.len());
        for &sigma in &sigmas {
            let pulse = PulseParams::with_area(&emitter, sigma, area)?;
            for &x in &xs {
                for &theta in &thetas {
                    points.push(PointConfig {
                        emitter,
                        leak: LeakageParams::new(x, theta)?,
                        pulse,
                        n: g.n,
                        grid_kind,
                        filter: None,
                        engine,
                    });
                }
            }
        }
        for f in filters.iter().flatten() {
            FilterSpec::new(*f)?;
        }
        Ok(Self {
            sigmas,
            xs,
            thetas,
            filters,
            points,
        })
    }

    /// Number of CSV rows.
    pub fn size(&self) -> usize {
        self.points.len() * self.filters.len()
    }
}

/// One CSV row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub sigma: f64,
    pub x: f64,
    pub theta: f64,
    pub gamma_f: Option<f64>,
    pub delta: f64,
    pub n: usize,
    pub outcome: Result<PointReport, String>,
}

impl SweepRow {
    pub fn report(&self) -> Option<&PointReport> {
        self.outcome.as_ref().ok()
    }

    fn record(&self) -> Vec<String> {
        let gf = self.gamma_f.map_or_else(|| "inf".to_string(), fmt_f64);
        let mut r = vec![
            fmt_f64(self.sigma),
            fmt_f64(self.x),
            fmt_f64(self.theta),
            gf,
            fmt_f64(self.delta),
            self.n.to_string(),
        ];
        match &self.outcome {
            Ok(p) => {
                r.extend([p.hom.g2, p.hom.visibility, p.hom.f_ratio, p.hom.nbar, p.norm_error].map(fmt_f64));
                r.extend([p.method.to_string(), p.flags_string(), String::new()]);
            }
            Err(e) => {
                r.extend(std::iter::repeat_n("nan".to_string(), 5));
                r.extend(["failed".to_string(), String::new(), e.clone()]);
            }
        }
        r
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub cache_hits: usize,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

fn solve_cached(cfg: &PointConfig, cache: Option<&SolutionCache>) -> (Result<sps_purity_core::ansatz::AnsatzSolution, String>, bool) {
    if let Some(sol) = cache.and_then(|c| c.load(cfg)) {
        return (Ok(sol), true);
    }
    let sol = solve_point(cfg).map_err(|e| e.to_string());
    if let (Some(c), Ok(s)) = (cache, &sol) {
        if let Err(e) = c.store(cfg, s) {
            eprintln!("warning: cannot write cache entry in {}: {e}", c.dir().display());
        }
    }
    (sol, false)
}

/// Runs every point; row order follows the grid regardless of scheduling.
pub fn execute(plan: &SweepPlan, cache: Option<&SolutionCache>) -> SweepOutput {
    let per_point: Vec<(Vec<SweepRow>, bool)> = plan
        .points
        .par_iter()
        .map(|cfg| {
            let (sol, hit) = solve_cached(cfg, cache);
            let rows = plan
                .filters
                .iter()
                .map(|&gf| {
                    let point = cfg.with_filter(gf.map(|g| FilterSpec::new(g).expect("validated")));
                    let outcome = match &sol {
                        Ok(s) => evaluate_solution(&point, s).map_err(|e| e.to_string()),
                        Err(e) => Err(e.clone()),
                    };
                    SweepRow {
                        sigma: cfg.pulse.sigma,
                        x: cfg.leak.magnitude,
                        theta: cfg.leak.phase,
                        gamma_f: gf,
                        delta: cfg.emitter.delta,
                        n: cfg.n,
                        outcome,
                    }
                })
                .collect();
            (rows, hit)
        })
        .collect();
    let cache_hits = per_point.iter().filter(|p| p.1).count();
    SweepOutput {
        rows: per_point.into_iter().flat_map(|p| p.0).collect(),
        cache_hits,
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Extremes along sigma for one `(x, theta, gamma_f)` curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimumRow {
    pub x: f64,
    pub theta: f64,
    pub gamma_f: Option<f64>,
    pub sigma_min: f64,
    pub g2_min: f64,
    pub visibility_at_min: f64,
    pub f_ratio_at_min: f64,
    pub nbar_at_min: f64,
    pub sigma_vmax: f64,
    pub visibility_max: f64,
    /// Minimum away from both ends of the sigma list.
    pub interior: bool,
}

/// One [`MinimumRow`] per curve with at least one successful point.
pub fn minima(plan: &SweepPlan, rows: &[SweepRow]) -> Vec<MinimumRow> {
    let (nx, nt, nf) = (plan.xs.len(), plan.thetas.len(), plan.filters.len());
    let ns = plan.sigmas.len();
    let mut out = Vec::new();
    for ix in 0..nx {
        for it in 0..nt {
            for jf in 0..nf {
                let curve: Vec<(usize, &SweepRow)> = (0..ns)
                    .map(|is| (is, &rows[((is * nx + ix) * nt + it) * nf + jf]))
                    .filter(|(_, r)| r.report().is_some_and(|p| p.hom.g2.is_finite()))
                    .collect();
                let g2 = |r: &SweepRow| r.report().unwrap().hom.g2;
                let vis = |r: &SweepRow| r.report().unwrap().hom.visibility;
                let Some(&(imin, rmin)) = curve.iter().min_by(|a, b| g2(a.1).total_cmp(&g2(b.1))) else {
                    continue;
                };
                let &(_, rv) = curve.iter().max_by(|a, b| vis(a.1).total_cmp(&vis(b.1))).unwrap();
                let p = rmin.report().unwrap();
                out.push(MinimumRow {
                    x: rmin.x,
                    theta: rmin.theta,
                    gamma_f: plan.filters[jf],
                    sigma_min: rmin.sigma,
                    g2_min: p.hom.g2,
                    visibility_at_min: p.hom.visibility,
                    f_ratio_at_min: p.hom.f_ratio,
                    nbar_at_min: p.hom.nbar,
                    sigma_vmax: rv.sigma,
                    visibility_max: vis(rv),
                    interior: imin > 0 && imin + 1 < ns,
                });
            }
        }
    }
    out
}

pub fn write_minima_csv<W: Write>(rows: &[MinimumRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MINIMA_HEADER)?;
    for m in rows {
        let mut r = vec![fmt_f64(m.x), fmt_f64(m.theta), m.gamma_f.map_or_else(|| "inf".to_string(), fmt_f64)];
        r.extend(
            [m.sigma_min, m.g2_min, m.visibility_at_min, m.f_ratio_at_min, m.nbar_at_min, m.sigma_vmax, m.visibility_max]
                .map(fmt_f64),
        );
        r.push(m.interior.to_string());
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `dir/stem_suffix.ext` next to `csv`.
pub fn sibling(csv: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    csv.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

/// Artifacts written by a sweep.
#[derive(Debug, Clone, Default)]
pub struct SweepSummary {
    pub rows: usize,
    pub failures: usize,
    pub cache_hits: usize,
    pub files: Vec<PathBuf>,
}

impl SweepSummary {
    pub fn status(&self) -> Status {
        if self.failures > 0 {
            Status::PartialFailure
        } else {
            Status::Success
        }
    }
}

fn create(path: &Path) -> anyhow::Result<std::io::BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}

/// Validates, runs and writes all artifacts of `cfg`.
///
/// Errors are [`ValidationError`] for bad configuration and IO errors
/// otherwise; per-point failures land in the `errors` column.
pub fn try_run_sweep(cfg: &SweepConfig) -> anyhow::Result<SweepSummary> {
    let plan = SweepPlan::new(cfg)?;
    for id in &cfg.output.plots {
        plot::check_sweep_figure(id)?;
    }
    if cfg.oracle.enabled && !(cfg.oracle.kappa_factor.is_finite() && cfg.oracle.kappa_factor > 0.0) {
        return Err(ValidationError("oracle.kappa_factor must be > 0".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let cache = match &cfg.output.cache_dir {
        Some(dir) => Some(SolutionCache::new(dir).with_context(|| format!("cache dir {}", dir.display()))?),
        None => None,
    };
    eprintln!(
        "sweep: {} rows ({} sigma, {} x, {} theta, {} filters), n = {}, workers: {}",
        plan.size(),
        plan.sigmas.len(),
        plan.xs.len(),
        plan.thetas.len(),
        plan.filters.len(),
        cfg.grid.n,
        pool.current_num_threads()
    );
    let output = pool.install(|| execute(&plan, cache.as_ref()));

    let csv_path = &cfg.output.csv;
    let mut summary = SweepSummary {
        rows: output.rows.len(),
        failures: output.failures(),
        cache_hits: output.cache_hits,
        files: vec![],
    };
    write_csv(&output.rows, create(csv_path)?)?;
    summary.files.push(csv_path.clone());

    if cfg.output.minima {
        let path = sibling(csv_path, "minima", "csv");
        write_minima_csv(&minima(&plan, &output.rows), create(&path)?)?;
        summary.files.push(path);
    }
    if cfg.oracle.enabled {
        let path = sibling(csv_path, "oracle", "csv");
        let rows: Vec<OracleRow> = pool.install(|| {
            output
                .rows
                .par_iter()
                .enumerate()
                .filter_map(|(i, r)| {
                    let gf = r.gamma_f?;
                    let base = plan.points[i / plan.filters.len()];
                    let point = base.with_filter(Some(FilterSpec::new(gf).ok()?));
                    Some(oracle::compare(&point, r.report(), cfg.oracle.kappa_factor, cfg.oracle.cavity_cutoff))
                })
                .collect()
        });
        if rows.is_empty() {
            eprintln!("warning: oracle enabled but the sweep has no filtered points");
        }
        summary.failures += rows.iter().filter(|r| !r.error.is_empty()).count();
        oracle::write_csv(&rows, create(&path)?)?;
        summary.files.push(path);
    }
    for id in &cfg.output.plots {
        let source = if plot::uses_minima(id) {
            sibling(csv_path, "minima", "csv")
        } else {
            csv_path.clone()
        };
        let path = sibling(csv_path, id, "gp");
        plot::emit_plot_script(&source, id, &path)?;
        summary.files.push(path);
    }
    eprintln!(
        "sweep: wrote {} rows, {} failed, {} cache hits",
        summary.rows, summary.failures, summary.cache_hits
    );
    Ok(summary)
}

/// Runs a sweep and reports problems on stderr.
pub fn run_sweep(cfg: &SweepConfig) -> Status {
    match try_run_sweep(cfg) {
        Ok(s) => s.status(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::Invalid
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> SweepConfig {
        SweepConfig::from_toml(&format!(
            "[grid]\nsigma_gamma = [0.05, 0.2, 0.8]\nx = [0.1]\ntheta = [\"pi/2\"]\ngamma_f = [\"inf\", 1.66]\nn = 96\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn plan_order_and_size() {
        let plan = SweepPlan::new(&config("")).unwrap();
        assert_eq!(plan.size(), 6);
        assert_eq!(plan.points[1].pulse.sigma, 0.2);
    }

    #[test]
    fn rows_follow_grid_order() {
        let plan = SweepPlan::new(&config("")).unwrap();
        let out = execute(&plan, None);
        assert_eq!(out.failures(), 0);
        let keys: Vec<(f64, Option<f64>)> = out.rows.iter().map(|r| (r.sigma, r.gamma_f)).collect();
        assert_eq!(keys[0], (0.05, None));
        assert_eq!(keys[1], (0.05, Some(1.66)));
        assert_eq!(keys[5], (0.8, Some(1.66)));
        let m = minima(&plan, &out.rows);
        assert_eq!(m.len(), 2);
        let mut buf = Vec::new();
        write_csv(&out.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sigma_gamma,x,theta,gamma_f,delta,n,g2,"));
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().nth(1).unwrap().contains(",inf,"));
    }

    #[test]
    fn bad_configs_rejected() {
        let c = SweepConfig::from_toml("[grid]\nsigma_gamma = []\nx=[0]\ntheta=[0]\n").unwrap();
        assert!(SweepPlan::new(&c).is_err());
        let c = SweepConfig::from_toml("[grid]\nsigma_gamma = [-1]\nx=[0]\ntheta=[0]\n").unwrap();
        assert!(SweepPlan::new(&c).is_err());
        let c = SweepConfig::from_toml("[grid]\nsigma_gamma = [1]\nx=[-0.1]\ntheta=[0]\n").unwrap();
        assert!(SweepPlan::new(&c).is_err());
        let c = SweepConfig::from_toml("[grid]\nsigma_gamma = [1]\nx=[0]\ntheta=[0]\nn = 8\n").unwrap();
        assert!(SweepPlan::new(&c).is_err());
        assert_eq!(run_sweep(&c), Status::Invalid);
    }

    #[test]
    fn failing_point_is_recorded() {
        let row = SweepRow {
            sigma: 1.0,
            x: 0.0,
            theta: 0.0,
            gamma_f: None,
            delta: 0.0,
            n: 64,
            outcome: Err("boom, twice".into()),
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("nan,nan,nan,nan,nan,failed,,\"boom, twice\""));
    }

    #[test]
    fn siblings() {
        assert_eq!(sibling(Path::new("out/run.csv"), "minima", "csv"), PathBuf::from("out/run_minima.csv"));
    }
}
