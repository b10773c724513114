// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Standalone gnuplot scripts for the figure layouts.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::ValidationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Sweep,
    Minima,
    Intensity,
}

/// Layout of one figure.
#[derive(Debug, Clone, Copy)]
pub struct Figure {
    pub id: &'static str,
    pub title: &'static str,
    pub source: Source,
    /// One panel per distinct value of this column, times one per `y`.
    pub panel_by: &'static [&'static str],
    /// One curve per distinct value combination.
    pub curve_by: &'static [&'static str],
    pub x: &'static str,
    pub y: &'static [&'static str],
    pub logx: bool,
    pub logy: bool,
    /// Extra gnuplot expression drawn on the first panel.
    pub guide: Option<(&'static str, &'static str)>,
}

pub const FIGURES: [Figure; 7] = [
    Figure {
        id: "fig2",
        title: "intensity ratio vs detuning",
        source: Source::Intensity,
        panel_by: &["drive_ratio", "x"],
        curve_by: &["theta"],
        x: "delta_over_gamma",
        y: &["ratio"],
        logx: false,
        logy: false,
        guide: None,
    },
    Figure {
        id: "fig3",
        title: "g2 vs pulse width",
        source: Source::Sweep,
        panel_by: &["x"],
        curve_by: &["theta", "gamma_f"],
        x: "sigma_gamma",
        y: &["g2"],
        logx: true,
        logy: true,
        guide: None,
    },
    Figure {
        id: "fig4",
        title: "minimum g2 and optimal pulse width vs leakage",
        source: Source::Minima,
        panel_by: &[],
        curve_by: &["theta", "gamma_f"],
        x: "x",
        y: &["g2_min", "sigma_min"],
        logx: true,
        logy: true,
        guide: Some(("x", "f(x) = |x|")),
    },
    Figure {
        id: "fig5",
        title: "g2 and photon number vs filter width",
        source: Source::Sweep,
        panel_by: &[],
        curve_by: &["x", "theta", "sigma_gamma"],
        x: "gamma_f",
        y: &["g2", "nbar"],
        logx: true,
        logy: true,
        guide: None,
    },
    Figure {
        id: "fig6",
        title: "HOM visibility vs pulse width",
        source: Source::Sweep,
        panel_by: &["x"],
        curve_by: &["theta", "gamma_f"],
        x: "sigma_gamma",
        y: &["visibility"],
        logx: true,
        logy: false,
        guide: None,
    },
    Figure {
        id: "fig7",
        title: "HOM visibility vs g2",
        source: Source::Sweep,
        panel_by: &["x"],
        curve_by: &["theta", "gamma_f"],
        x: "g2",
        y: &["visibility"],
        logx: true,
        logy: false,
        guide: None,
    },
    Figure {
        id: "fig8",
        title: "F = (1 - V)/g2 vs pulse width",
        source: Source::Sweep,
        panel_by: &["x"],
        curve_by: &["theta", "gamma_f"],
        x: "sigma_gamma",
        y: &["f_ratio"],
        logx: true,
        logy: false,
        guide: None,
    },
];

pub fn known_ids() -> Vec<&'static str> {
    FIGURES.iter().map(|f| f.id).collect()
}

pub fn figure(id: &str) -> Result<&'static Figure, ValidationError> {
    FIGURES.iter().find(|f| f.id == id).ok_or_else(|| {
        ValidationError(format!("unknown figure `{id}`; known ids: {}", known_ids().join(", ")))
    })
}

/// Figure drawn from the minima table rather than the main sweep CSV.
pub fn uses_minima(id: &str) -> bool {
    figure(id).is_ok_and(|f| f.source == Source::Minima)
}

/// Accepts ids that a sweep can produce.
pub fn check_sweep_figure(id: &str) -> Result<(), ValidationError> {
    match figure(id)?.source {
        Source::Intensity => Err(ValidationError(format!("{id} is drawn from `intensity` output, not a sweep"))),
        _ => Ok(()),
    }
}

fn label_value(name: &str, raw: &str) -> String {
    let Ok(v) = raw.parse::<f64>() else {
        return raw.to_string();
    };
    if name == "theta" {
        let q = v / PI * 4.0;
        if (q - q.round()).abs() < 1e-9 {
            return match q.round() as i64 {
                0 => "0".into(),
                4 => "pi".into(),
                -4 => "-pi".into(),
                2 => "pi/2".into(),
                -2 => "-pi/2".into(),
                1 => "pi/4".into(),
                -1 => "-pi/4".into(),
                k if k % 2 == 0 => format!("{}pi/2", k / 2),
                k => format!("{k}pi/4"),
            };
        }
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "0" && v != 0.0 { format!("{v:.3e}") } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Writes the gnuplot script for `id` reading `csv`.
pub fn emit_plot_script(csv_path: &Path, id: &str, out: &Path) -> anyhow::Result<()> {
    let text = plot_script(csv_path, id)?;
    std::fs::write(out, text)?;
    Ok(())
}

/// Script text for `id`; the CSV must exist and carry the needed columns.
pub fn plot_script(csv_path: &Path, id: &str) -> anyhow::Result<String> {
    let fig = figure(id)?;
    let mut rdr = csv::Reader::from_path(csv_path)
        .map_err(|e| ValidationError(format!("cannot read {}: {e}", csv_path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let needed: Vec<&str> = fig.panel_by.iter().chain(fig.curve_by).chain([&fig.x]).chain(fig.y).copied().collect();
    let missing: Vec<&str> = needed.iter().copied().filter(|c| col(c).is_none()).collect();
    if !missing.is_empty() {
        return Err(ValidationError(format!(
            "{}: missing column(s) {} needed by {id}",
            csv_path.display(),
            missing.join(", ")
        ))
        .into());
    }
    let idx = |names: &[&str]| names.iter().map(|c| col(c).unwrap()).collect::<Vec<_>>();
    let (pi, ci) = (idx(fig.panel_by), idx(fig.curve_by));
    let xi = col(fig.x).unwrap();
    let mut panels: Vec<Vec<String>> = vec![];
    let mut curves: Vec<Vec<String>> = vec![];
    let mut seen_p = BTreeSet::new();
    let mut seen_c = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let key = |ix: &[usize]| ix.iter().map(|&i| rec[i].to_string()).collect::<Vec<_>>();
        let (p, c) = (key(&pi), key(&ci));
        if seen_p.insert(p.clone()) {
            panels.push(p);
        }
        if seen_c.insert(c.clone()) {
            curves.push(c);
        }
    }
    if panels.is_empty() {
        return Err(ValidationError(format!("{}: no data rows", csv_path.display())).into());
    }

    let file = escape(&csv_path.display().to_string());
    let n_panels = panels.len() * fig.y.len();
    let cols = n_panels.min(2);
    let rows = n_panels.div_ceil(cols);
    let mut s = String::new();
    writeln!(s, "# {id}: {}", fig.title)?;
    writeln!(s, "# data: {}", csv_path.display())?;
    writeln!(s, "set datafile separator \",\"")?;
    writeln!(s, "set terminal pngcairo size {},{} enhanced", 520 * cols, 400 * rows)?;
    writeln!(s, "set output \"{}\"", escape(&crate::sweep::sibling(csv_path, id, "png").display().to_string()))?;
    writeln!(s, "set key outside right top box")?;
    writeln!(s, "set grid")?;
    if fig.logx {
        writeln!(s, "set logscale x")?;
    }
    writeln!(s, "set multiplot layout {rows},{cols} title \"{}\"", escape(fig.title))?;
    let mut panel_no = 0;
    for p in &panels {
        for y in fig.y {
            let yi = col(y).unwrap();
            let letter = (b'a' + (panel_no % 26) as u8) as char;
            let what: Vec<String> =
                fig.panel_by.iter().zip(p).map(|(n, v)| format!("{n} = {}", label_value(n, v))).collect();
            let title = if what.is_empty() { format!("({letter}) {y}") } else { format!("({letter}) {}", what.join(", ")) };
            writeln!(s, "set title \"{}\"", escape(&title))?;
            writeln!(s, "set xlabel \"{}\"", fig.x)?;
            writeln!(s, "set ylabel \"{y}\"")?;
            if fig.logy && *y != "visibility" {
                writeln!(s, "set logscale y")?;
            } else {
                writeln!(s, "unset logscale y")?;
            }
            let mut terms = Vec::new();
            for c in &curves {
                let mut cond: Vec<String> = pi
                    .iter()
                    .zip(p)
                    .chain(ci.iter().zip(c))
                    .map(|(i, v)| format!("strcol({}) eq \"{}\"", i + 1, escape(v)))
                    .collect();
                cond.push(format!("strcol({}) ne \"inf\"", xi + 1));
                let cond = cond.join(" && ");
                let label: Vec<String> =
                    fig.curve_by.iter().zip(c).map(|(n, v)| format!("{n}={}", label_value(n, v))).collect();
                terms.push(format!(
                    "\"{file}\" using (({cond}) ? column({}) : 1/0):(({cond}) ? column({}) : 1/0) with linespoints title \"{}\"",
                    xi + 1,
                    yi + 1,
                    escape(&label.join(", "))
                ));
            }
            if let (0, Some((expr, name))) = (panel_no, fig.guide) {
                terms.push(format!("{expr} with lines dashtype 4 lc rgb \"black\" title \"{}\"", escape(name)));
            }
            writeln!(s, "plot {}", terms.join(", \\\n     "))?;
            panel_no += 1;
        }
    }
    writeln!(s, "unset multiplot")?;
    Ok(s)
}
