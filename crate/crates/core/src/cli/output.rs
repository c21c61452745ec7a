//! Result files: CSV table, failure list, JSON manifest and plot script.

use super::config::{RunConfig, SweepKind};
use crate::analysis::gtensor::rotation_partner;
use crate::analysis::{GFactorPoint, InterfaceRow, InterfaceSummary, LinearFit, StarkFit};
use crate::eigensolver::SolverReport;
use crate::error::{Error, Result};
use crate::hamiltonian::Calibration;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Achieved binding set against the crystal's reference value. On small boxes
/// the two differ by roughly the confinement shift of the conduction edge.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceBinding {
    pub reference: f64,
    pub achieved: f64,
    pub delta: f64,
    pub confinement_delta: f64,
}

impl ReferenceBinding {
    pub fn new(reference: f64, cal: &Calibration) -> Self {
        ReferenceBinding {
            reference,
            achieved: cal.binding_energy,
            delta: cal.binding_energy - reference,
            confinement_delta: cal.confinement_delta(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointStats {
    pub e_field: [f64; 3],
    pub iterations: usize,
    pub restarts: usize,
    pub matvecs: usize,
    pub converged: bool,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PointStats {
    pub fn from_report(e_field: [f64; 3], r: &SolverReport) -> Self {
        PointStats {
            e_field,
            iterations: r.iterations,
            restarts: r.restarts,
            matvecs: r.matvecs,
            converged: r.converged,
            max_residual: r.max_residual,
            error: None,
        }
    }

    pub fn failed(e_field: [f64; 3], err: &Error) -> Self {
        PointStats { e_field, iterations: 0, restarts: 0, matvecs: 0, converged: false, max_residual: f64::NAN, error: Some(err.to_string()) }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitValue {
    Stark(StarkFit),
    Linear(LinearFit),
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub b_direction: [f64; 3],
    /// Field magnitude for anisotropy fits, V/μm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    pub result: std::result::Result<FitValue, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub sweep: SweepKind,
    pub status: String,
    pub u0: Option<f64>,
    pub calibration: Option<Calibration>,
    pub reference: Option<ReferenceBinding>,
    pub fits: Vec<FitRecord>,
    pub interface: Vec<InterfaceSummary>,
    pub failures: usize,
    pub points: Vec<PointStats>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(cfg: &RunConfig) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: cfg.hash(),
            seed: cfg.seed(),
            sweep: cfg.sweep.kind,
            status: "running".into(),
            u0: None,
            calibration: None,
            reference: None,
            fits: Vec::new(),
            interface: Vec::new(),
            failures: 0,
            points: Vec::new(),
            config: cfg.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Two table rows per interface row: B along the field axis, then across it.
pub fn interface_points(rows: &[InterfaceRow], normal_axis: usize, b_magnitude: f64, valleys: usize) -> Vec<GFactorPoint> {
    let mut pull = [0.0; 3];
    pull[normal_axis] = -1.0;
    let across = rotation_partner(pull);
    let mut out = Vec::with_capacity(2 * rows.len());
    for r in rows {
        let e_field = pull.map(|c| c * r.e);
        for (dir, g, theta) in [(pull, r.g_par, 0.0), (across, r.g_perp, std::f64::consts::FRAC_PI_2)] {
            out.push(GFactorPoint {
                e_field,
                b_field: dir.map(|c| c * b_magnitude),
                theta,
                g,
                populations: if r.populations.is_empty() { vec![f64::NAN; valleys] } else { r.populations.clone() },
                leakage: r.leakage,
                energy: r.energy,
                residual: r.residual,
                error: r.error.clone(),
            });
        }
    }
    out
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Results table; `depths` adds a trailing depth column (interface runs).
pub fn points_csv(points: &[GFactorPoint], depths: Option<&[f64]>) -> String {
    let valleys = points.iter().map(|p| p.populations.len()).max().unwrap_or(0);
    let mut s = String::from("E_x,E_y,E_z,B_x,B_y,B_z,theta,g");
    for v in 1..=valleys {
        let _ = write!(s, ",pop_{v}");
    }
    s.push_str(",leakage,energy,residual");
    if depths.is_some() {
        s.push_str(",depth");
    }
    s.push('\n');
    for (i, p) in points.iter().enumerate() {
        let mut cols: Vec<String> = p.e_field.iter().chain(&p.b_field).map(|&x| num(x)).collect();
        cols.push(num(p.theta));
        cols.push(num(p.g));
        for v in 0..valleys {
            cols.push(num(p.populations.get(v).copied().unwrap_or(f64::NAN)));
        }
        cols.extend([num(p.leakage), num(p.energy), num(p.residual)]);
        if let Some(d) = depths {
            cols.push(num(d[i]));
        }
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

pub fn write_points_csv(path: &Path, points: &[GFactorPoint], depths: Option<&[f64]>) -> Result<()> {
    std::fs::write(path, points_csv(points, depths))?;
    Ok(())
}

/// One line per failed point; the file is removed when nothing failed.
pub fn write_failures(path: &Path, points: &[GFactorPoint]) -> Result<()> {
    let failed: Vec<&GFactorPoint> = points.iter().filter(|p| !p.ok()).collect();
    if failed.is_empty() {
        if path.exists() {
            std::fs::remove_file(path)?;
        }
        return Ok(());
    }
    let mut s = String::from("E_x,E_y,E_z,B_x,B_y,B_z,error\n");
    for p in failed {
        let msg = p.error.clone().unwrap_or_default().replace('"', "'");
        let nums: Vec<String> = p.e_field.iter().chain(&p.b_field).map(|&x| num(x)).collect();
        let _ = writeln!(s, "{},\"{msg}\"", nums.join(","));
    }
    std::fs::write(path, s)?;
    Ok(())
}

const PLOT_HEADER: &str = r#"#!/usr/bin/env python3
# Reads results.csv from this directory; writes figure.png.
import csv, math, os
from collections import defaultdict
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "results.csv")) as f:
    rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(f)]
rows = [r for r in rows if not math.isnan(r["g"])]

def emag(r):
    return math.sqrt(r["E_x"] ** 2 + r["E_y"] ** 2 + r["E_z"] ** 2)

def bdir(r):
    return tuple(round(r[k], 6) for k in ("B_x", "B_y", "B_z"))

fig, ax = plt.subplots(figsize=(5, 4))
"#;

const PLOT_STARK: &str = r#"series = defaultdict(list)
for r in rows:
    series[bdir(r)].append((emag(r), r["g"]))
for b, pts in sorted(series.items()):
    pts.sort()
    g0 = pts[0][1]
    ax.plot([e for e, _ in pts], [g / g0 - 1 for _, g in pts], "o-", label="B " + str(b))
ax.set_xlabel("E (V/um)")
ax.set_ylabel("g/g0 - 1")
"#;

const PLOT_ANISOTROPY: &str = r#"series = defaultdict(list)
for r in rows:
    series[round(emag(r), 6)].append((math.sin(r["theta"]) ** 2, r["g"], r["theta"]))
for e, pts in sorted(series.items()):
    pts.sort(key=lambda p: p[2])
    g0 = pts[0][1]
    ax.plot([s for s, _, _ in pts], [g / g0 - 1 for _, g, _ in pts], "o-", label="E = %g V/um" % e)
ax.set_xlabel("sin^2 theta")
ax.set_ylabel("dg/g")
"#;

const PLOT_INTERFACE: &str = r#"series = defaultdict(list)
for r in rows:
    series[(round(r["depth"], 4), r["theta"] == 0.0)].append((emag(r), r["g"]))
for (d, par), pts in sorted(series.items()):
    pts.sort()
    ax.plot([e for e, _ in pts], [g for _, g in pts], "o-" if par else "s--", label="%g nm, %s" % (d, "par" if par else "perp"))
ax.set_xlabel("E (V/um)")
ax.set_ylabel("g")
"#;

const PLOT_FOOTER: &str = r#"ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(here, "figure.png"), dpi=150)
"#;

pub fn plot_script(kind: SweepKind) -> String {
    let body = match kind {
        SweepKind::BulkStark => PLOT_STARK,
        SweepKind::Anisotropy => PLOT_ANISOTROPY,
        SweepKind::Interface => PLOT_INTERFACE,
    };
    format!("{PLOT_HEADER}{body}{PLOT_FOOTER}")
}

pub fn write_plot_script(path: &Path, kind: SweepKind) -> Result<()> {
    std::fs::write(path, plot_script(kind))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(g: f64) -> GFactorPoint {
        GFactorPoint {
            e_field: [0.0, 5.0, 0.0],
            b_field: [0.0, 1.0, 0.0],
            theta: 0.0,
            g,
            populations: vec![0.1; 6],
            leakage: 0.4,
            energy: 1.38,
            residual: 1e-9,
            error: None,
        }
    }

    #[test]
    fn csv_header_and_row() {
        let s = points_csv(&[point(1.9977)], None);
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "E_x,E_y,E_z,B_x,B_y,B_z,theta,g,pop_1,pop_2,pop_3,pop_4,pop_5,pop_6,leakage,energy,residual"
        );
        assert_eq!(lines.next().unwrap(), "0.0,5.0,0.0,0.0,1.0,0.0,0.0,1.9977,0.1,0.1,0.1,0.1,0.1,0.1,0.4,1.38,1e-9");
    }

    #[test]
    fn failures_listed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("failures.csv");
        let mut bad = point(f64::NAN);
        bad.error = Some("eigensolver did not converge".into());
        write_failures(&path, &[point(2.0), bad]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        write_failures(&path, &[point(2.0)]).unwrap();
        assert!(!path.exists());
    }
}
