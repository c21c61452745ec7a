//! Sweep drivers: one eigensolve per field point, every B orientation from
//! the same Kramers pair (the Zeeman block is first order in B).

use super::fit::{fit_stark, linear_fit, LinearFit, StarkFit, StarkModel};
use super::gtensor::{rotated_direction, rotation_partner};
use super::valley::{ValleyOptions, ValleyPopulations, ValleyProjector};
use crate::crystal::CrystalSpec;
use crate::eigensolver::{solve_folded, FoldedOptions, SolverReport, Spinor};
use crate::error::{Error, Result};
use crate::hamiltonian::{add_donor_potential, add_efield, assemble_host, bulk, field_shift, FieldConfig};
use crate::lattice::{build_lattice, AtomLattice, DeviceGeometry};
use crate::sparse::SparseOperator;
use crate::spin::{g_factor, zeeman_block, LMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// σ = E_ref − f·(E_ref − E_v), with E_ref the last ground energy (or the
    /// bulk conduction edge before the first solve) and E_v the valence edge
    /// raised by the largest field shift in the box.
    pub sigma_fraction: f64,
    pub solver: FoldedOptions,
    pub l_mode: LMode,
    pub valley: ValleyOptions,
    /// |B|, T.
    pub b_magnitude: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            sigma_fraction: 0.4,
            solver: FoldedOptions { n_states: 2, block_size: 2, max_basis: 64, tol: 1e-8, ..FoldedOptions::default() },
            l_mode: LMode::default(),
            valley: ValleyOptions::default(),
            b_magnitude: 1.0,
        }
    }
}

/// Lattice, host operator with the donor potential, and everything needed to
/// turn a field point into g-factors.
pub struct DonorPipeline {
    pub lattice: AtomLattice,
    pub crystal: CrystalSpec,
    pub u0: f64,
    pub options: PipelineOptions,
    host: SparseOperator,
    projector: ValleyProjector,
    valence_edge: f64,
    conduction_edge: f64,
}

/// Converged ground Kramers pair at one field point.
#[derive(Debug, Clone)]
pub struct PointState {
    pub e_field: [f64; 3],
    pub pair: [Spinor; 2],
    pub populations: ValleyPopulations,
    pub report: SolverReport,
}

impl PointState {
    pub fn energy(&self) -> f64 {
        self.pair[0].energy
    }

    pub fn residual(&self) -> f64 {
        self.pair[0].residual_norm.max(self.pair[1].residual_norm)
    }
}

impl DonorPipeline {
    pub fn new(lattice: AtomLattice, crystal: CrystalSpec, u0: f64, options: PipelineOptions) -> Result<Self> {
        if !(options.sigma_fraction > 0.0 && options.sigma_fraction < 0.5) {
            return Err(Error::InvalidSolverInput("sigma_fraction must lie in (0, 0.5)".into()));
        }
        if !(options.b_magnitude > 0.0) {
            return Err(Error::ZeroField);
        }
        let mut host = assemble_host(&lattice, &crystal)?;
        add_donor_potential(&mut host, &lattice, &crystal, u0);
        let projector = ValleyProjector::new(&lattice, &crystal, &options.valley)?;
        let valence_edge = bulk::valence_maximum(&crystal);
        let conduction_edge = bulk::conduction_minimum(&crystal).energy;
        Ok(DonorPipeline { lattice, crystal, u0, options, host, projector, valence_edge, conduction_edge })
    }

    pub fn from_geometry(geometry: &DeviceGeometry, crystal: CrystalSpec, u0: f64, options: PipelineOptions) -> Result<Self> {
        let lattice = build_lattice(geometry, &crystal)?;
        Self::new(lattice, crystal, u0, options)
    }

    /// Host Hamiltonian with the donor potential, zero field.
    pub fn operator(&self) -> &SparseOperator {
        &self.host
    }

    /// σ used for the solve at `e_field` after `previous`.
    pub fn sigma_for(&self, e_field: [f64; 3], previous: Option<&PointState>) -> Result<f64> {
        self.sigma(e_field, previous.map(|p| p.energy()))
    }

    fn sigma(&self, e_field: [f64; 3], reference: Option<f64>) -> Result<f64> {
        let tilt = (0..self.lattice.atom_count())
            .map(|i| field_shift(e_field, self.lattice.displacement(i)))
            .fold(0.0f64, f64::max);
        let ev = self.valence_edge + tilt;
        let eref = reference.unwrap_or(self.conduction_edge);
        if eref <= ev {
            return Err(Error::InvalidSolverInput(format!(
                "field {e_field:?} V/μm closes the gap: reference level {eref:.4} eV lies below the tilted valence edge {ev:.4} eV"
            )));
        }
        Ok(eref - self.options.sigma_fraction * (eref - ev))
    }

    /// Ground Kramers pair at `e_field`, warm-started from `previous`.
    pub fn solve(&self, e_field: [f64; 3], previous: Option<&PointState>) -> Result<PointState> {
        self.solve_with(e_field, previous, None)
    }

    /// [`solve`](Self::solve), continuing from a solver checkpoint.
    pub fn solve_with(&self, e_field: [f64; 3], previous: Option<&PointState>, resume: Option<&std::path::Path>) -> Result<PointState> {
        let mut h = self.host.clone();
        add_efield(&mut h, &self.lattice, &FieldConfig::new(e_field, [0.0; 3]));
        let sigma = self.sigma(e_field, previous.map(|p| p.energy()))?;
        let warm = previous.map(|p| p.pair.iter().map(|s| s.amplitudes.clone()).collect()).unwrap_or_default();
        let mut opts = FoldedOptions { sigma, n_states: 2, warm_start: warm, ..self.options.solver.clone() };
        if let Some(path) = resume {
            opts.resume = Some(path.to_path_buf());
        }
        let sol = solve_folded(&h, &opts)?;
        let report = sol.report.clone();
        let mut states = sol.converged()?;
        if states.len() < 2 {
            return Err(Error::NotConverged("fewer than two states returned".into()));
        }
        states.truncate(2);
        // average over the pair: a single member of a Kramers doublet need not
        // carry the spatial symmetry of the doublet
        let p0 = self.projector.project(&states[0].amplitudes);
        let p1 = self.projector.project(&states[1].amplitudes);
        let populations = ValleyPopulations {
            populations: p0.populations.iter().zip(&p1.populations).map(|(a, b)| 0.5 * (a + b)).collect(),
            leakage: 0.5 * (p0.leakage + p1.leakage),
            axes: p0.axes,
        };
        let [a, b]: [Spinor; 2] = states.try_into().expect("two states");
        Ok(PointState { e_field, pair: [a, b], populations, report })
    }

    /// g for B along `b_dir` (scaled to the configured |B|).
    pub fn g_factor(&self, state: &PointState, b_dir: [f64; 3]) -> Result<f64> {
        let n = (b_dir[0] * b_dir[0] + b_dir[1] * b_dir[1] + b_dir[2] * b_dir[2]).sqrt();
        if n == 0.0 {
            return Err(Error::ZeroField);
        }
        let b = b_dir.map(|c| c / n * self.options.b_magnitude);
        let field = FieldConfig::new(state.e_field, b);
        let block = zeeman_block([&state.pair[0], &state.pair[1]], &self.lattice, &field, self.options.l_mode, Some(&self.host))?;
        g_factor(&block)
    }

    pub fn point(&self, state: &PointState, b_dir: [f64; 3], axis: [f64; 3]) -> GFactorPoint {
        let n = (b_dir[0] * b_dir[0] + b_dir[1] * b_dir[1] + b_dir[2] * b_dir[2]).sqrt();
        let b_field = b_dir.map(|c| c / n * self.options.b_magnitude);
        let (g, error) = match self.g_factor(state, b_dir) {
            Ok(g) => (g, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        GFactorPoint {
            e_field: state.e_field,
            b_field,
            theta: angle(axis, b_dir),
            g,
            populations: state.populations.populations.clone(),
            leakage: state.populations.leakage,
            energy: state.energy(),
            residual: state.residual(),
            error,
        }
    }

    pub fn failed_point(&self, e_field: [f64; 3], b_dir: [f64; 3], axis: [f64; 3], err: &Error) -> GFactorPoint {
        let n = (b_dir[0] * b_dir[0] + b_dir[1] * b_dir[1] + b_dir[2] * b_dir[2]).sqrt();
        GFactorPoint {
            e_field,
            b_field: b_dir.map(|c| c / n * self.options.b_magnitude),
            theta: angle(axis, b_dir),
            g: f64::NAN,
            populations: vec![f64::NAN; self.crystal.valley_axes.len()],
            leakage: f64::NAN,
            energy: f64::NAN,
            residual: f64::NAN,
            error: Some(err.to_string()),
        }
    }
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

/// Angle between two directions, radians.
fn angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let (a, b) = (unit(a), unit(b));
    let c: f64 = (0..3).map(|k| a[k] * b[k]).sum();
    c.clamp(-1.0, 1.0).acos()
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GFactorPoint {
    /// V/μm
    pub e_field: [f64; 3],
    /// T
    pub b_field: [f64; 3],
    /// Angle between B and the sweep's field axis, radians.
    pub theta: f64,
    pub g: f64,
    pub populations: Vec<f64>,
    pub leakage: f64,
    /// Ground level, eV.
    pub energy: f64,
    pub residual: f64,
    /// Set when this point failed; the numeric fields are NaN then.
    pub error: Option<String>,
}

impl GFactorPoint {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn e_magnitude(&self) -> f64 {
        self.e_field.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// For each |E| along `e_axis` (in order) and each B direction: g and the
/// valley populations. Failed points are recorded and the sweep goes on; the
/// next point then starts cold.
pub fn stark_sweep(pipeline: &DonorPipeline, e_axis: [f64; 3], magnitudes: &[f64], b_dirs: &[[f64; 3]]) -> Vec<GFactorPoint> {
    let axis = unit(e_axis);
    let mut out = Vec::with_capacity(magnitudes.len() * b_dirs.len());
    let mut previous: Option<PointState> = None;
    for &m in magnitudes {
        let e = axis.map(|c| c * m);
        match pipeline.solve(e, previous.as_ref()) {
            Ok(state) => {
                out.extend(b_dirs.iter().map(|&b| pipeline.point(&state, b, axis)));
                previous = Some(state);
            }
            Err(err) => {
                out.extend(b_dirs.iter().map(|&b| pipeline.failed_point(e, b, axis, &err)));
                previous = None;
            }
        }
    }
    out
}

/// Fit of one B orientation's g(E) series from a Stark sweep.
pub fn fit_orientation(points: &[GFactorPoint], b_dir: [f64; 3], model: StarkModel) -> Result<StarkFit> {
    let b = unit(b_dir);
    let series: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.ok() && angle(p.b_field, b) < 1e-9)
        .map(|p| (p.e_magnitude(), p.g))
        .collect();
    fit_stark(&series, model)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnisotropyScan {
    pub points: Vec<GFactorPoint>,
    /// Δg/g = g(θ)/g(0) − 1 against sin²θ.
    pub fit: LinearFit,
    /// max |Δg/g| over the scan.
    pub spread: f64,
}

/// g as B turns from the field axis towards its rotation partner, at one field.
pub fn anisotropy_scan(pipeline: &DonorPipeline, e_axis: [f64; 3], magnitude: f64, thetas: &[f64]) -> Result<AnisotropyScan> {
    if thetas.len() < 2 {
        return Err(Error::InvalidSolverInput("anisotropy scan needs at least two angles".into()));
    }
    let axis = unit(e_axis);
    let state = pipeline.solve(axis.map(|c| c * magnitude), None)?;
    anisotropy_from_state(pipeline, &state, axis, thetas)
}

/// [`anisotropy_scan`] on an already solved point.
pub fn anisotropy_from_state(pipeline: &DonorPipeline, state: &PointState, e_axis: [f64; 3], thetas: &[f64]) -> Result<AnisotropyScan> {
    let axis = unit(e_axis);
    let mut points = Vec::with_capacity(thetas.len());
    for &t in thetas {
        let mut p = pipeline.point(state, rotated_direction(axis, t), axis);
        p.theta = t;
        points.push(p);
    }
    if let Some(p) = points.iter().find(|p| !p.ok()) {
        return Err(Error::NotConverged(p.error.clone().unwrap_or_default()));
    }
    let g0 = pipeline.g_factor(state, axis)?;
    let x: Vec<f64> = thetas.iter().map(|t| t.sin().powi(2)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.g / g0 - 1.0).collect();
    let fit = linear_fit(&x, &y)?;
    let spread = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(AnisotropyScan { points, fit, spread })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    Abrupt,
    Gradual,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceOptions {
    /// Box size in conventional cells.
    pub cells: [u32; 3],
    /// Axis of the interface normal; the interface is the + face.
    pub normal_axis: usize,
    /// Upper end of the low-field window for the linear+quadratic fit, V/μm.
    pub low_field_max: f64,
    /// Number of highest-field points averaged into the plateau.
    pub plateau_points: usize,
    /// Donors deeper than this are classified abrupt, nm.
    pub depth_threshold: f64,
    /// max |dg/dE| over its median at or above this marks an abrupt step.
    pub spike_threshold: f64,
}

impl Default for InterfaceOptions {
    fn default() -> Self {
        InterfaceOptions {
            cells: [2, 2, 12],
            normal_axis: 2,
            low_field_max: 10.0,
            plateau_points: 3,
            depth_threshold: 10.0,
            spike_threshold: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceRow {
    /// nm
    pub depth: f64,
    /// |E|, V/μm
    pub e: f64,
    /// B along the field axis.
    pub g_par: f64,
    /// B across the field axis.
    pub g_perp: f64,
    pub energy: f64,
    pub residual: f64,
    pub populations: Vec<f64>,
    pub leakage: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceSummary {
    pub depth: f64,
    /// Mean g_par − g_perp over the highest-field points.
    pub plateau: Option<f64>,
    /// Spread of g_par − g_perp over those points.
    pub plateau_spread: Option<f64>,
    /// Linear+quadratic fit of g_par over the low-field window.
    pub low_field_fit: Option<StarkFit>,
    /// |η₁E| > |η₂E²| at the top of the low-field window.
    pub linear_dominates: Option<bool>,
    pub spike_ratio: Option<f64>,
    pub kind: TransitionKind,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// max |dg/dE| over its median for a g(E) series sorted by E.
pub fn spike_ratio(series: &[(f64, f64)]) -> Option<f64> {
    if series.len() < 3 {
        return None;
    }
    let slopes: Vec<f64> = series.windows(2).map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs()).collect();
    let max = slopes.iter().cloned().fold(0.0, f64::max);
    let med = median(slopes);
    if med == 0.0 {
        return Some(if max == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Some(max / med)
}

pub fn classify(depth: f64, spike: Option<f64>, opts: &InterfaceOptions) -> TransitionKind {
    if depth > opts.depth_threshold || spike.is_some_and(|s| s >= opts.spike_threshold) {
        TransitionKind::Abrupt
    } else {
        TransitionKind::Gradual
    }
}

/// Reduces one depth's rows to plateau, low-field fit and transition kind.
pub fn summarize_interface(depth: f64, rows: &[InterfaceRow], opts: &InterfaceOptions) -> InterfaceSummary {
    let good: Vec<&InterfaceRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let diffs: Vec<f64> = good.iter().map(|r| r.g_par - r.g_perp).collect();
    let (plateau, plateau_spread) = if opts.plateau_points > 0 && diffs.len() >= opts.plateau_points {
        let tail = &diffs[diffs.len() - opts.plateau_points..];
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let spread = tail.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        (Some(mean), Some(spread))
    } else {
        (None, None)
    };
    let window: Vec<(f64, f64)> = good.iter().filter(|r| r.e <= opts.low_field_max).map(|r| (r.e, r.g_par)).collect();
    let low_field_fit = fit_stark(&window, StarkModel::LinearQuadratic).ok();
    let linear_dominates = low_field_fit.map(|f| {
        let e = window.iter().fold(0.0f64, |m, p| m.max(p.0));
        (f.eta1 * e).abs() > (f.eta2 * e * e).abs()
    });
    let series: Vec<(f64, f64)> = good.iter().map(|r| (r.e, r.g_par)).collect();
    let spike = spike_ratio(&series);
    InterfaceSummary { depth, plateau, plateau_spread, low_field_fit, linear_dominates, spike_ratio: spike, kind: classify(depth, spike, opts) }
}

/// For each donor depth: a box with the interface on the + face of the normal
/// axis, and a sweep of fields pulling the electron towards it.
pub fn interface_sweep(
    crystal: &CrystalSpec,
    u0: f64,
    pipeline: &PipelineOptions,
    depths: &[f64],
    magnitudes: &[f64],
    opts: &InterfaceOptions,
) -> Result<(Vec<InterfaceRow>, Vec<InterfaceSummary>)> {
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut pull = [0.0; 3];
    pull[opts.normal_axis] = -1.0;
    let across = rotation_partner(pull);
    for &depth in depths {
        let geometry = DeviceGeometry::with_interface(opts.cells, crystal.lattice_constant, opts.normal_axis, depth)?;
        let actual = geometry.interface.map(|i| i.depth).unwrap_or(depth);
        let p = DonorPipeline::from_geometry(&geometry, crystal.clone(), u0, pipeline.clone())?;
        let mut here = Vec::with_capacity(magnitudes.len());
        let mut previous: Option<PointState> = None;
        for &m in magnitudes {
            let e = pull.map(|c| c * m);
            let row = match p.solve(e, previous.as_ref()) {
                Ok(state) => {
                    let r = match (p.g_factor(&state, pull), p.g_factor(&state, across)) {
                        (Ok(gp), Ok(gq)) => InterfaceRow {
                            depth: actual,
                            e: m,
                            g_par: gp,
                            g_perp: gq,
                            energy: state.energy(),
                            residual: state.residual(),
                            populations: state.populations.populations.clone(),
                            leakage: state.populations.leakage,
                            error: None,
                        },
                        (Err(err), _) | (_, Err(err)) => failed_row(actual, m, crystal.valley_axes.len(), &err),
                    };
                    previous = Some(state);
                    r
                }
                Err(err) => {
                    previous = None;
                    failed_row(actual, m, crystal.valley_axes.len(), &err)
                }
            };
            here.push(row);
        }
        summaries.push(summarize_interface(actual, &here, opts));
        rows.extend(here);
    }
    Ok((rows, summaries))
}

fn failed_row(depth: f64, e: f64, valleys: usize, err: &Error) -> InterfaceRow {
    InterfaceRow {
        depth,
        e,
        g_par: f64::NAN,
        g_perp: f64::NAN,
        energy: f64::NAN,
        residual: f64::NAN,
        populations: vec![f64::NAN; valleys],
        leakage: f64::NAN,
        error: Some(err.to_string()),
    }
}
