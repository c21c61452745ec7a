//! Run configuration: TOML schema, defaults, resolution and validation.

use crate::analysis::{InterfaceOptions, PipelineOptions, StarkModel, ValleyOptions};
use crate::crystal::{CrystalSpec, TbParams};
use crate::eigensolver::{FoldedOptions, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::hamiltonian::{bulk, CalibrationOptions};
use crate::lattice::DeviceGeometry;
use crate::spin::LMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Colon-separated directories searched for relative parameter-table paths.
pub const TABLE_PATH_ENV: &str = "DONOR_GFACTOR_TABLES";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub crystal: CrystalBlock,
    #[serde(default)]
    pub geometry: GeometryBlock,
    #[serde(default)]
    pub calibration: CalibrationBlock,
    pub sweep: SweepBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalBlock {
    /// `Si` or `Ge`: lattice constant, valleys, dielectric constant, target.
    pub species: String,
    /// Tight-binding parameter table; the built-in table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Overrides the table's so_lambda_p, eV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub so_lambda_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryBlock {
    /// Box size in conventional cells (even for donor-centred boxes).
    pub cells: [u32; 3],
    /// Interface normal axis for interface sweeps (0, 1, 2); the + face.
    pub interface_axis: usize,
}

impl Default for GeometryBlock {
    fn default() -> Self {
        GeometryBlock { cells: [4, 4, 4], interface_axis: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationBlock {
    /// Fixed central-cell potential, eV; calibrated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    /// Binding-energy target, eV; the species value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub interval: [f64; 2],
    pub tol: f64,
    /// σ below the bulk conduction edge for the donor-free box solve, eV.
    pub sigma_offset: f64,
    pub max_steps: usize,
}

impl Default for CalibrationBlock {
    fn default() -> Self {
        let c = CalibrationOptions::default();
        CalibrationBlock {
            u0: None,
            target: None,
            interval: [c.interval.0, c.interval.1],
            tol: c.tol,
            sigma_offset: c.sigma_offset,
            max_steps: c.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    BulkStark,
    Anisotropy,
    Interface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(rename = "type")]
    pub kind: SweepKind,
    #[serde(default = "default_axis")]
    pub e_axis: [f64; 3],
    /// Field magnitudes, V/μm. Empty: zero plus a geometric grid up to `e_max`.
    #[serde(default)]
    pub e_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    #[serde(default = "default_points")]
    pub e_points: usize,
    /// B directions for Stark sweeps; B along and across the field when empty.
    #[serde(default)]
    pub b_orientations: Vec<[f64; 3]>,
    /// Angles from the field axis for anisotropy scans, radians.
    #[serde(default)]
    pub theta_grid: Vec<f64>,
    /// Donor depths for interface sweeps, nm.
    #[serde(default)]
    pub depth_grid: Vec<f64>,
    /// Stark fit model; by default quadratic when the donor site symmetry
    /// maps the field axis onto its reverse, linear+quadratic otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<StarkModel>,
    /// |B|, T.
    #[serde(default = "default_b")]
    pub b_magnitude: f64,
    #[serde(default = "default_low_field")]
    pub low_field_max: f64,
    #[serde(default = "default_plateau")]
    pub plateau_points: usize,
    #[serde(default = "default_depth_threshold")]
    pub depth_threshold: f64,
    #[serde(default = "default_spike")]
    pub spike_threshold: f64,
}

fn default_axis() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}
fn default_points() -> usize {
    13
}
fn default_b() -> f64 {
    1.0
}
fn default_low_field() -> f64 {
    InterfaceOptions::default().low_field_max
}
fn default_plateau() -> usize {
    InterfaceOptions::default().plateau_points
}
fn default_depth_threshold() -> f64 {
    InterfaceOptions::default().depth_threshold
}
fn default_spike() -> f64 {
    InterfaceOptions::default().spike_threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    /// σ = E_ref − f·(E_ref − E_v) for every donor solve.
    pub sigma_fraction: f64,
    pub tol: f64,
    pub block_size: usize,
    pub max_iterations: usize,
    pub max_basis: usize,
    pub seed: u64,
    pub l_mode: LMode,
    /// Valley window width, 2π/a.
    pub valley_window: f64,
    pub valley_min_fft: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let p = PipelineOptions::default();
        SolverBlock {
            sigma_fraction: p.sigma_fraction,
            tol: p.solver.tol,
            block_size: p.solver.block_size,
            max_iterations: p.solver.max_iterations,
            max_basis: p.solver.max_basis,
            seed: DEFAULT_SEED,
            l_mode: p.l_mode,
            valley_window: p.valley.window,
            valley_min_fft: p.valley.min_fft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: PathBuf::from("results") }
    }
}

/// One validation finding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
    pub remedy: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} (fix: {})", self.path, self.message, self.remedy)
    }
}

fn diag(path: &str, message: impl Into<String>, remedy: impl Into<String>) -> Diagnostic {
    Diagnostic { path: path.into(), message: message.into(), remedy: remedy.into() }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let path = match e.span() {
                Some(span) => {
                    let before = &text[..span.start.min(text.len())];
                    let line = before.matches('\n').count() + 1;
                    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                    format!("line {line}, column {col}")
                }
                None => "config".into(),
            };
            Error::Config { path, msg: e.message().trim().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Fills every defaulted field so the result round-trips unchanged.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if c.sweep.e_grid.is_empty() {
            if let Some(max) = c.sweep.e_max {
                c.sweep.e_grid = default_e_grid(max, c.sweep.e_points);
            }
        }
        if c.sweep.b_orientations.is_empty() && c.sweep.kind == SweepKind::BulkStark {
            let e = unit(c.sweep.e_axis);
            c.sweep.b_orientations = vec![e, crate::analysis::gtensor::rotation_partner(e)];
        }
        if c.sweep.model.is_none() {
            c.sweep.model = Some(StarkModel::for_axis(c.sweep.e_axis));
        }
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&self) -> u64 {
        self.solver.seed
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        let s = &self.solver;
        PipelineOptions {
            sigma_fraction: s.sigma_fraction,
            solver: FoldedOptions {
                tol: s.tol,
                block_size: s.block_size,
                max_iterations: s.max_iterations,
                max_basis: s.max_basis,
                seed: s.seed,
                n_states: 2,
                ..FoldedOptions::default()
            },
            l_mode: s.l_mode,
            valley: ValleyOptions { window: s.valley_window, min_fft: s.valley_min_fft, k_fraction: None },
            b_magnitude: self.sweep.b_magnitude,
        }
    }

    pub fn calibration_options(&self) -> CalibrationOptions {
        let c = &self.calibration;
        CalibrationOptions {
            interval: (c.interval[0], c.interval[1]),
            tol: c.tol,
            sigma_offset: c.sigma_offset,
            max_steps: c.max_steps,
            solver: self.pipeline_options().solver,
        }
    }

    pub fn interface_options(&self) -> InterfaceOptions {
        InterfaceOptions {
            cells: self.geometry.cells,
            normal_axis: self.geometry.interface_axis,
            low_field_max: self.sweep.low_field_max,
            plateau_points: self.sweep.plateau_points,
            depth_threshold: self.sweep.depth_threshold,
            spike_threshold: self.sweep.spike_threshold,
        }
    }

    /// Donor-centred box for calibration and bulk sweeps.
    pub fn geometry(&self, crystal: &CrystalSpec) -> Result<DeviceGeometry> {
        DeviceGeometry::centered_box(self.geometry.cells, crystal.lattice_constant)
    }
}

/// Zero plus `points − 1` geometrically spaced values ending at `max`, the
/// smallest at max/64.
pub fn default_e_grid(max: f64, points: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    let n = points.saturating_sub(1);
    if n == 0 {
        return g;
    }
    if n == 1 {
        g.push(max);
        return g;
    }
    let ratio = 64f64.powf(1.0 / (n - 1) as f64);
    for k in 0..n {
        g.push(max / ratio.powi((n - 1 - k) as i32));
    }
    g
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n == 0.0 {
        v
    } else {
        v.map(|c| c / n)
    }
}

/// Finds a parameter table: as given, next to the config, then in each
/// directory of [`TABLE_PATH_ENV`].
pub fn find_table(table: &Path, config_dir: Option<&Path>) -> Option<PathBuf> {
    if table.is_absolute() {
        return table.exists().then(|| table.to_path_buf());
    }
    let mut dirs: Vec<PathBuf> = Vec::new();
    if let Some(d) = config_dir {
        dirs.push(d.to_path_buf());
    }
    dirs.push(PathBuf::from("."));
    if let Ok(paths) = std::env::var(TABLE_PATH_ENV) {
        dirs.extend(std::env::split_paths(&paths));
    }
    dirs.into_iter().map(|d| d.join(table)).find(|p| p.exists())
}

/// Species preset with the configured table and spin-orbit override.
pub fn resolve_crystal(config: &RunConfig, config_dir: Option<&Path>) -> std::result::Result<CrystalSpec, Vec<Diagnostic>> {
    let mut crystal = CrystalSpec::preset(&config.crystal.species).ok_or_else(|| {
        vec![diag("crystal.species", format!("unknown species `{}`", config.crystal.species), "use `Si` or `Ge`")]
    })?;
    if let Some(table) = &config.crystal.table {
        let path = find_table(table, config_dir).ok_or_else(|| {
            vec![diag(
                "crystal.table",
                format!("parameter table `{}` not found", table.display()),
                format!("give an existing path or add its directory to {TABLE_PATH_ENV}"),
            )]
        })?;
        let params = TbParams::from_file(&path).map_err(|e| {
            let (path, remedy) = match &e {
                Error::MissingChannel(c) => (format!("crystal.table.{c}"), format!("add a `{c} <value>` row")),
                _ => ("crystal.table".to_string(), "fix the table syntax".to_string()),
            };
            vec![diag(&path, e.to_string(), remedy)]
        })?;
        crystal = crystal.with_params(params);
    }
    if let Some(l) = config.crystal.so_lambda_p {
        crystal = crystal.with_spin_orbit(l);
    }
    if let Err(e) = crystal.validate() {
        return Err(vec![diag("crystal", e.to_string(), "check the species parameters")]);
    }
    Ok(crystal)
}

/// Schema and physics checks; empty when the config is runnable.
pub fn validate(config: &RunConfig, config_dir: Option<&Path>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let crystal = match resolve_crystal(config, config_dir) {
        Ok(c) => Some(c),
        Err(d) => {
            out.extend(d);
            None
        }
    };
    let s = &config.solver;
    if !(s.sigma_fraction > 0.0 && s.sigma_fraction < 0.5) {
        out.push(diag(
            "solver.sigma_fraction",
            format!("{} places σ outside the gap below the donor level", s.sigma_fraction),
            "use a value in (0, 0.5), e.g. 0.4",
        ));
    }
    if !(s.tol > 0.0) {
        out.push(diag("solver.tol", "tolerance must be positive", "e.g. 1e-8"));
    }
    if s.block_size < 2 {
        out.push(diag("solver.block_size", "block must hold a Kramers pair", "use 2 or more"));
    }
    if s.max_basis < 2 + 2 * s.block_size {
        out.push(diag("solver.max_basis", "basis too small for the block size", "use at least 2 + 2·block_size"));
    }
    if !(s.valley_window > 0.0) {
        out.push(diag("solver.valley_window", "window must be positive", "e.g. 0.15"));
    }
    let c = &config.calibration;
    if !(c.interval[0] < c.interval[1]) {
        out.push(diag("calibration.interval", "interval must be increasing", "e.g. [-5.0, 5.0]"));
    }
    if !(c.tol > 0.0) {
        out.push(diag("calibration.tol", "tolerance must be positive", "e.g. 1e-5"));
    }
    if let Some(t) = c.target {
        if !(t < 0.0) {
            out.push(diag("calibration.target", "binding energy must be negative", "e.g. -0.0456"));
        }
    }
    let sw = &config.sweep;
    let axis_norm = sw.e_axis.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(axis_norm > 0.0) {
        out.push(diag("sweep.e_axis", "field axis is zero", "e.g. [0, 1, 0]"));
    }
    if sw.e_grid.is_empty() && sw.e_max.is_none() {
        out.push(diag("sweep.e_grid", "no field values", "give `e_grid` or `e_max`"));
    }
    if sw.e_grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        out.push(diag("sweep.e_grid", "field magnitudes must be finite and non-negative", "list magnitudes in V/μm"));
    }
    let mut sorted = sw.e_grid.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        out.push(diag("sweep.e_grid", "repeated field value", "list each field once"));
    }
    if !(sw.b_magnitude > 0.0) {
        out.push(diag("sweep.b_magnitude", "|B| must be positive", "e.g. 1.0"));
    }
    for (i, b) in sw.b_orientations.iter().enumerate() {
        if b.iter().all(|c| *c == 0.0) {
            out.push(diag(&format!("sweep.b_orientations[{i}]"), "zero B direction", "give a nonzero vector"));
        }
    }
    match sw.kind {
        SweepKind::BulkStark => {
            let n = config.resolved().sweep.e_grid.len();
            let model = sw.model.unwrap_or_else(|| StarkModel::for_axis(sw.e_axis));
            if n < model.min_points() {
                out.push(diag(
                    "sweep.e_grid",
                    format!("{n} field points; the {model:?} fit needs {}", model.min_points()),
                    "add field points",
                ));
            }
        }
        SweepKind::Anisotropy => {
            if sw.theta_grid.len() < 2 {
                out.push(diag("sweep.theta_grid", "anisotropy scan needs at least two angles", "e.g. [0, 0.39, 0.79, 1.18, 1.57]"));
            }
        }
        SweepKind::Interface => {
            if sw.depth_grid.is_empty() {
                out.push(diag("sweep.depth_grid", "interface sweep needs donor depths", "list depths in nm"));
            }
            if config.geometry.interface_axis > 2 {
                out.push(diag("geometry.interface_axis", "axis must be 0, 1 or 2", "use 2 for a (001) interface"));
            }
        }
    }
    let Some(crystal) = crystal else { return out };
    let a = crystal.lattice_constant;
    let geometries: Vec<(String, Result<DeviceGeometry>)> = match sw.kind {
        SweepKind::Interface if config.geometry.interface_axis <= 2 => sw
            .depth_grid
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                (format!("sweep.depth_grid[{i}]"), DeviceGeometry::with_interface(config.geometry.cells, a, config.geometry.interface_axis, d))
            })
            .collect(),
        SweepKind::Interface => Vec::new(),
        _ => vec![("geometry.cells".into(), config.geometry(&crystal))],
    };
    let gap = bulk::conduction_minimum(&crystal).energy - bulk::valence_maximum(&crystal);
    let e_max = config.resolved().sweep.e_grid.iter().cloned().fold(0.0, f64::max);
    for (path, g) in geometries {
        let g = match g.and_then(|g| g.validate().map(|_| g)) {
            Ok(g) => g,
            Err(e) => {
                let remedy = match e {
                    Error::DonorOutsideBox => "move the donor inside the box or enlarge it",
                    _ => "adjust the cell counts or depth",
                };
                out.push(diag(&path, e.to_string(), remedy));
                continue;
            }
        };
        if g.box_extent.iter().any(|&x| x < a - 1e-9) {
            out.push(diag(&path, "box smaller than one lattice constant", "use at least one cell per axis"));
        }
        // largest potential drop between the donor and a box corner
        let reach = (0..3).map(|k| g.donor_position[k].max(g.box_extent[k] - g.donor_position[k]).powi(2)).sum::<f64>().sqrt();
        let drop = e_max * 1e-3 * reach;
        if drop >= gap {
            out.push(diag(
                "sweep.e_grid",
                format!("{e_max} V/μm drops {drop:.3} eV across the box, beyond the {gap:.3} eV gap (breakdown)"),
                "lower the maximum field or shrink the box",
            ));
        }
    }
    out
}
