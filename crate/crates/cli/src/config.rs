// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML sweep configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sps_purity_core::filter::FilterEngine;
use sps_purity_core::model::GridKind;

use crate::ValidationError;

/// A number, or an angle expression such as `"pi/2"`, `"-3pi/4"`, `"0.5"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Int(i64),
    Expr(String),
}

impl Num {
    pub fn value(&self) -> Result<f64, ValidationError> {
        match self {
            Num::Float(v) => Ok(*v),
            Num::Int(v) => Ok(*v as f64),
            Num::Expr(s) => parse_angle(s),
        }
    }
}

/// Parses `[-][a]pi[/b]` or a plain float.
pub fn parse_angle(s: &str) -> Result<f64, ValidationError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let bad = || ValidationError(format!("cannot parse angle `{s}`"));
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.as_str()),
    };
    let pos = body.find("pi").ok_or_else(bad)?;
    let coef = body[..pos].trim_end_matches('*');
    let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
    let rest = &body[pos + 2..];
    let div = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?
    };
    Ok(sign * coef * PI / div)
}

/// An explicit list or a generated range.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Values {
    List(Vec<Num>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    #[serde(default)]
    pub logspace: Option<(f64, f64, usize)>,
    #[serde(default)]
    pub linspace: Option<(f64, f64, usize)>,
}

impl Values {
    pub fn expand(&self, name: &str) -> Result<Vec<f64>, ValidationError> {
        let out = match self {
            Values::List(v) => v.iter().map(Num::value).collect::<Result<Vec<_>, _>>()?,
            Values::Range(r) => match (r.logspace, r.linspace) {
                (Some((a, b, n)), None) => {
                    if !(a > 0.0 && b > 0.0) {
                        return Err(ValidationError(format!("{name}: logspace bounds must be > 0")));
                    }
                    spaced(a.log10(), b.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
                }
                (None, Some((a, b, n))) => spaced(a, b, n),
                _ => return Err(ValidationError(format!("{name}: give exactly one of logspace or linspace"))),
            },
        };
        if out.is_empty() {
            return Err(ValidationError(format!("{name}: empty list")));
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(ValidationError(format!("{name}: non-finite value")));
        }
        Ok(out)
    }
}

fn spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// A filter width, or `"unfiltered"` / `"inf"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum FilterValue {
    Width(f64),
    Label(String),
}

impl FilterValue {
    pub fn value(&self) -> Result<Option<f64>, ValidationError> {
        match self {
            FilterValue::Width(w) if w.is_finite() && *w > 0.0 => Ok(Some(*w)),
            FilterValue::Width(w) if *w == f64::INFINITY => Ok(None),
            FilterValue::Width(w) => Err(ValidationError(format!("gamma_f: must be > 0, got {w}"))),
            FilterValue::Label(s) => match s.trim().to_lowercase().as_str() {
                "unfiltered" | "inf" | "none" => Ok(None),
                other => other
                    .parse::<f64>()
                    .ok()
                    .filter(|w| *w > 0.0)
                    .map(Some)
                    .ok_or_else(|| ValidationError(format!("gamma_f: cannot parse `{s}`"))),
            },
        }
    }
}

fn default_gamma_f() -> Vec<FilterValue> {
    vec![FilterValue::Label("unfiltered".into())]
}

fn default_n() -> usize {
    512
}

fn default_area() -> Num {
    Num::Expr("pi".into())
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub sigma_gamma: Values,
    pub x: Values,
    pub theta: Values,
    #[serde(default = "default_gamma_f")]
    pub gamma_f: Vec<FilterValue>,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_area")]
    pub area: Num,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_csv")]
    pub csv: PathBuf,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Figure ids whose plot scripts are written next to the CSV.
    #[serde(default)]
    pub plots: Vec<String>,
    #[serde(default = "yes")]
    pub minima: bool,
}

fn default_csv() -> PathBuf {
    PathBuf::from("sweep.csv")
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            csv: default_csv(),
            cache_dir: None,
            plots: vec![],
            minima: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default)]
    pub enabled: bool,
    /// Cavity decay rate in units of the filter half width.
    #[serde(default = "two")]
    pub kappa_factor: f64,
    #[serde(default = "two_usize")]
    pub cavity_cutoff: usize,
}

fn two() -> f64 {
    2.0
}

fn two_usize() -> usize {
    2
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            enabled: false,
            kappa_factor: 2.0,
            cavity_cutoff: 2,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Worker threads; 0 or absent means all logical cores.
    #[serde(default)]
    pub workers: Option<usize>,
    /// `auto`, `uniform` or `refined`.
    #[serde(default)]
    pub grid_kind: Option<String>,
    /// `auto`, `fourier` or `time`.
    #[serde(default)]
    pub engine: Option<String>,
}

/// Whole sweep document.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub run: RunSection,
}

/// Flag values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub csv: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub no_cache: bool,
    pub n: Option<usize>,
    pub workers: Option<usize>,
    pub oracle: Option<bool>,
    pub plots: Option<Vec<String>>,
}

pub const CACHE_ENV: &str = "SPS_PURITY_CACHE";

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, ValidationError> {
        toml::from_str(text).map_err(|e| ValidationError(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ValidationError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ValidationError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Flags over environment over document.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.csv {
            self.output.csv = p.clone();
        }
        if let Ok(dir) = std::env::var(CACHE_ENV) {
            if !dir.is_empty() {
                self.output.cache_dir = Some(PathBuf::from(dir));
            }
        }
        if let Some(p) = &o.cache_dir {
            self.output.cache_dir = Some(p.clone());
        }
        if o.no_cache {
            self.output.cache_dir = None;
        }
        if let Some(n) = o.n {
            self.grid.n = n;
        }
        if let Some(w) = o.workers {
            self.run.workers = Some(w);
        }
        if let Some(b) = o.oracle {
            self.oracle.enabled = b;
        }
        if let Some(p) = &o.plots {
            self.output.plots = p.clone();
        }
    }

    pub fn grid_kind(&self) -> Result<GridKind, ValidationError> {
        match self.run.grid_kind.as_deref().unwrap_or("auto") {
            "auto" => Ok(GridKind::Auto),
            "uniform" => Ok(GridKind::Uniform),
            "refined" => Ok(GridKind::Refined),
            other => Err(ValidationError(format!("run.grid_kind: unknown `{other}`"))),
        }
    }

    pub fn engine(&self) -> Result<FilterEngine, ValidationError> {
        match self.run.engine.as_deref().unwrap_or("auto") {
            "auto" => Ok(FilterEngine::Auto),
            "fourier" => Ok(FilterEngine::Fourier),
            "time" => Ok(FilterEngine::TimeDomain),
            other => Err(ValidationError(format!("run.engine: unknown `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("tau").is_err());
    }

    #[test]
    fn parses_document() {
        let c = SweepConfig::from_toml(
            r#"
[grid]
sigma_gamma = { logspace = [1e-3, 1.0, 4] }
x = [0.02, 0.1]
theta = [0, "pi/2", "pi"]
gamma_f = ["unfiltered", 1.66]
n = 256
"#,
        )
        .unwrap();
        assert_eq!(c.grid.sigma_gamma.expand("s").unwrap().len(), 4);
        assert_eq!(c.grid.theta.expand("t").unwrap()[2], PI);
        assert_eq!(c.grid.gamma_f[1].value().unwrap(), Some(1.66));
        assert_eq!(c.grid.gamma_f[0].value().unwrap(), None);
        assert!(c.output.minima);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(SweepConfig::from_toml("[grid]\nsigma = [1]\nx=[0]\ntheta=[0]\n").is_err());
    }

    #[test]
    fn empty_list_rejected() {
        let c = SweepConfig::from_toml("[grid]\nsigma_gamma = []\nx=[0]\ntheta=[0]\n").unwrap();
        assert!(c.grid.sigma_gamma.expand("sigma_gamma").is_err());
    }
}
