// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sps_purity::config::{parse_angle, Overrides, SweepConfig};
use sps_purity::fitio::fit_csv;
use sps_purity::intensity::IntensityGrid;
use sps_purity::{intensity, oracle, plot, sweep, Status, ValidationError};
use sps_purity_core::filter::FilterSpec;
use sps_purity_core::fit::{FitPins, FitSeeds};
use sps_purity_core::model::GridKind;
use sps_purity_core::pipeline::PointConfig;

#[derive(Parser)]
#[command(name = "sps-purity", version, about = "Single-photon purity and HOM visibility under laser leakage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep described by a TOML file.
    Sweep(SweepArgs),
    /// Fit leakage parameters to a CW intensity-ratio CSV.
    Fit(FitArgs),
    /// Compare the filtered ansatz with the cavity master equation.
    Oracle(OracleArgs),
    /// Write a gnuplot script for a figure from a CSV.
    Plot(PlotArgs),
    /// Tabulate the CW intensity ratio against detuning.
    Intensity(IntensityArgs),
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides the cache environment variable and the config file.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    n: Option<usize>,
    /// Worker threads; 0 means all logical cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, overrides_with = "no_oracle")]
    oracle: bool,
    #[arg(long)]
    no_oracle: bool,
    /// Comma-separated figure ids.
    #[arg(long, value_delimiter = ',')]
    plots: Option<Vec<String>>,
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.0)
}

fn assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v = if k.trim() == "theta" { angle(v)? } else { v.trim().parse().map_err(|_| format!("bad number `{v}`"))? };
    Ok((k.trim().to_string(), v))
}

#[derive(Args)]
struct FitArgs {
    /// CSV with delta_over_gamma, ratio and optional sigma, drive_scale.
    data: PathBuf,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fix a parameter, e.g. `--pin gamma_d=0`.
    #[arg(long = "pin", value_parser = assignment)]
    pins: Vec<(String, f64)>,
    /// Extra starting value, e.g. `--seed theta=pi/4`.
    #[arg(long = "seed", value_parser = assignment)]
    seeds: Vec<(String, f64)>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = angle, required = true)]
    theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.66")]
    gamma_f: Vec<f64>,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    kappa_factor: f64,
    #[arg(long, default_value_t = 2)]
    cutoff: usize,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    csv: PathBuf,
    /// Figure id: fig2 ... fig8.
    figure: String,
    /// Script path; defaults to `<csv stem>_<figure>.gp`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntensityArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5")]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = angle, default_value = "0,pi/2,pi")]
    theta: Vec<f64>,
    /// I/I_sat values.
    #[arg(long, value_delimiter = ',', default_value = "0.1,1")]
    drive_ratio: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    gamma_d: f64,
    #[arg(long, default_value_t = 1.0)]
    efficiency: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    delta_max: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run_sweep_cmd(a: SweepArgs) -> anyhow::Result<Status> {
    let mut cfg = SweepConfig::load(&a.config)?;
    cfg.apply(&Overrides {
        csv: a.csv,
        cache_dir: a.cache_dir,
        no_cache: a.no_cache,
        n: a.n,
        workers: a.workers,
        oracle: if a.oracle { Some(true) } else if a.no_oracle { Some(false) } else { None },
        plots: a.plots,
    });
    Ok(sweep::try_run_sweep(&cfg)?.status())
}

fn fill(name: &str, v: f64, x: &mut [Option<f64>; 5]) -> Result<(), ValidationError> {
    let i = sps_purity_core::fit::PARAM_NAMES
        .iter()
        .position(|n| *n == name)
        .ok_or_else(|| ValidationError(format!("unknown fit parameter `{name}`")))?;
    x[i] = Some(v);
    Ok(())
}

fn run_fit(a: FitArgs) -> anyhow::Result<Status> {
    let mut p = [None; 5];
    for (k, v) in &a.pins {
        fill(k, *v, &mut p)?;
    }
    let mut s = [None; 5];
    for (k, v) in &a.seeds {
        fill(k, *v, &mut s)?;
    }
    let pins = FitPins { x: p[0], theta: p[1], a: p[2], drive: p[3], gamma_d: p[4] };
    let seeds = FitSeeds { x: s[0], theta: s[1], a: s[2], drive: s[3], gamma_d: s[4] };
    let file = std::fs::File::open(&a.data).map_err(|e| ValidationError(format!("cannot open {}: {e}", a.data.display())))?;
    let (report, json) = fit_csv(file, &pins, &seeds)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(if report.converged { Status::Success } else { Status::PartialFailure })
}

fn run_oracle(a: OracleArgs) -> anyhow::Result<Status> {
    let mut points = Vec::new();
    for &sigma in &a.sigma {
        for &x in &a.x {
            for &theta in &a.theta {
                for &g in &a.gamma_f {
                    let mut cfg = PointConfig::standard(sigma, x, theta, a.n).map_err(ValidationError::from)?;
                    cfg.grid_kind = GridKind::Auto;
                    points.push(cfg.with_filter(Some(FilterSpec::new(g).map_err(ValidationError::from)?)));
                }
            }
        }
    }
    eprintln!("oracle: {} points, n = {}", points.len(), a.n);
    let rows: Vec<_> = {
        use rayon::prelude::*;
        points.par_iter().map(|c| oracle::compare(c, None, a.kappa_factor, a.cutoff)).collect()
    };
    oracle::write_csv(&rows, output(a.out.as_deref())?)?;
    let failed = rows.iter().any(|r| !r.error.is_empty());
    Ok(if failed { Status::PartialFailure } else { Status::Success })
}

fn run_plot(a: PlotArgs) -> anyhow::Result<Status> {
    let out = a.out.unwrap_or_else(|| sweep::sibling(&a.csv, &a.figure, "gp"));
    plot::emit_plot_script(&a.csv, &a.figure, &out)?;
    eprintln!("wrote {}", out.display());
    Ok(Status::Success)
}

fn run_intensity(a: IntensityArgs) -> anyhow::Result<Status> {
    if a.points < 2 {
        return Err(ValidationError("points: need at least 2".into()).into());
    }
    let deltas = (0..a.points)
        .map(|k| -a.delta_max + 2.0 * a.delta_max * k as f64 / (a.points - 1) as f64)
        .collect();
    let grid = IntensityGrid {
        xs: a.x,
        thetas: a.theta,
        drive_ratios: a.drive_ratio,
        gamma_d: a.gamma_d,
        efficiency: a.efficiency,
        deltas,
    };
    intensity::write_csv(&grid.rows()?, output(a.out.as_deref())?)?;
    Ok(Status::Success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => run_sweep_cmd(a),
        Command::Fit(a) => run_fit(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Plot(a) => run_plot(a),
        Command::Intensity(a) => run_intensity(a),
    };
    match result {
        Ok(s) => s.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::Invalid.into()
        }
    }
}
