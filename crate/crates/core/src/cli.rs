//! Command-line front end: `run` and `validate`.

pub mod config;
pub mod output;

use crate::analysis::sweep::{anisotropy_from_state, fit_orientation};
use crate::analysis::{interface_sweep, DonorPipeline, GFactorPoint, PointState, StarkModel};
use crate::eigensolver::{checkpoint_header, with_workers};
use crate::error::{Error, Result};
use crate::hamiltonian::calibrate_central_cell;
use crate::lattice::build_lattice;
use clap::{Parser, Subcommand};
pub use config::{validate, Diagnostic, RunConfig, SweepKind, TABLE_PATH_ENV};
use output::{Manifest, PointStats, ReferenceBinding};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "donor-gfactor", version, about = "Donor g-factor Stark sweeps in an sp3d5s* tight-binding box")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrate, sweep, fit, and write results.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Validate and print the resolved plan without solving.
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        workers: Option<usize>,
        /// Solver checkpoint to resume the matching eigensolve from.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Check a config and report every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` and executes; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Validate { config } => match load_checked(&config) {
            Ok(_) => {
                println!("{}: ok", config.display());
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Run { config, dry_run, workers, resume } => {
            let cfg = match load_checked(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if dry_run {
                return match plan(&cfg, config.parent()) {
                    Ok(text) => {
                        print!("{text}");
                        EXIT_OK
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        EXIT_CONFIG
                    }
                };
            }
            let run = RunRequest { config: cfg, config_dir: config.parent().map(Path::to_path_buf), resume };
            match with_workers(workers, || execute(&run)) {
                Ok(status) => status,
                Err(e) => {
                    eprintln!("error: {e}");
                    match e {
                        Error::Config { .. } | Error::InvalidGeometry(_) | Error::InvalidCrystal(_) => EXIT_CONFIG,
                        _ => EXIT_SOLVER,
                    }
                }
            }
        }
    }
}

fn load_checked(path: &Path) -> std::result::Result<RunConfig, i32> {
    let cfg = match RunConfig::load(path) {
        Ok(c) => c.resolved(),
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    let diags = validate(&cfg, path.parent());
    if diags.is_empty() {
        Ok(cfg)
    } else {
        for d in &diags {
            eprintln!("{}: {d}", path.display());
        }
        Err(EXIT_CONFIG)
    }
}

/// Human-readable plan of a resolved config; touches no solver.
pub fn plan(cfg: &RunConfig, config_dir: Option<&Path>) -> Result<String> {
    let crystal = config::resolve_crystal(cfg, config_dir).map_err(|d| Error::Config { path: d[0].path.clone(), msg: d[0].message.clone() })?;
    let mut s = String::new();
    s.push_str(&format!("# config hash {}\n", cfg.hash()));
    let sw = &cfg.sweep;
    match sw.kind {
        SweepKind::Interface => {
            for &d in &sw.depth_grid {
                let g = crate::lattice::DeviceGeometry::with_interface(cfg.geometry.cells, crystal.lattice_constant, cfg.geometry.interface_axis, d)?;
                let lat = build_lattice(&g, &crystal)?;
                s.push_str(&format!("# depth {d} nm: {} atoms, {} field points\n", lat.atom_count(), sw.e_grid.len()));
            }
        }
        _ => {
            let lat = build_lattice(&cfg.geometry(&crystal)?, &crystal)?;
            s.push_str(&format!("# {} atoms, {} basis states\n", lat.atom_count(), lat.atom_count() * 20));
            match cfg.calibration.u0 {
                Some(u0) => s.push_str(&format!("# fixed u0 = {u0} eV\n")),
                None => s.push_str(&format!(
                    "# calibrate u0 in {:?} eV to binding {} eV\n",
                    cfg.calibration.interval,
                    cfg.calibration.target.unwrap_or(crystal.target_binding_energy)
                )),
            }
            let per = if sw.kind == SweepKind::BulkStark { sw.b_orientations.len() } else { sw.theta_grid.len() };
            s.push_str(&format!("# {} field points x {} B directions\n", sw.e_grid.len(), per));
        }
    }
    s.push_str(&cfg.to_toml());
    Ok(s)
}

pub struct RunRequest {
    pub config: RunConfig,
    pub config_dir: Option<PathBuf>,
    pub resume: Option<PathBuf>,
}

/// Runs calibrate → sweep → fit and writes every artifact. Returns the exit
/// status (ok, partial, or solver failure).
pub fn execute(run: &RunRequest) -> Result<i32> {
    let cfg = &run.config;
    let crystal = config::resolve_crystal(cfg, run.config_dir.as_deref())
        .map_err(|d| Error::Config { path: d[0].path.clone(), msg: d[0].message.clone() })?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.resolved.toml"), cfg.to_toml())?;
    let mut manifest = Manifest::new(cfg);

    let mut pipeline_opts = cfg.pipeline_options();
    pipeline_opts.solver.checkpoint = Some(dir.join("solver.ckpt"));
    let resume = match &run.resume {
        Some(p) => Some((p.clone(), checkpoint_header(p)?)),
        None => None,
    };

    let u0 = match cfg.calibration.u0 {
        Some(u0) => u0,
        None => calibrate(cfg, &crystal, &mut manifest)?,
    };
    manifest.u0 = Some(u0);

    let status = match cfg.sweep.kind {
        SweepKind::BulkStark | SweepKind::Anisotropy => {
            let lattice = build_lattice(&cfg.geometry(&crystal)?, &crystal)?;
            let pipeline = DonorPipeline::new(lattice, crystal.clone(), u0, pipeline_opts)?;
            let (points, stats) = field_sweep(cfg, &pipeline, resume.as_ref(), &mut manifest);
            manifest.points = stats;
            output::write_points_csv(&dir.join("results.csv"), &points, None)?;
            output::write_failures(&dir.join("failures.csv"), &points)?;
            let failed = points.iter().filter(|p| !p.ok()).count();
            manifest.failures = failed;
            if cfg.sweep.kind == SweepKind::BulkStark {
                for b in &cfg.sweep.b_orientations {
                    manifest.fits.push(output::FitRecord {
                        b_direction: *b,
                        field: None,
                        result: fit_orientation(&points, *b, cfg.sweep.model.unwrap_or_else(|| StarkModel::for_axis(cfg.sweep.e_axis))).map(output::FitValue::Stark).map_err(|e| e.to_string()),
                    });
                }
            }
            status_of(failed, points.len())
        }
        SweepKind::Interface => {
            let (rows, summaries) = interface_sweep(&crystal, u0, &pipeline_opts, &cfg.sweep.depth_grid, &cfg.sweep.e_grid, &cfg.interface_options())?;
            let points = output::interface_points(&rows, cfg.geometry.interface_axis, cfg.sweep.b_magnitude, crystal.valley_axes.len());
            let depths: Vec<f64> = rows.iter().flat_map(|r| [r.depth, r.depth]).collect();
            output::write_points_csv(&dir.join("results.csv"), &points, Some(&depths))?;
            output::write_failures(&dir.join("failures.csv"), &points)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            manifest.failures = failed;
            manifest.interface = summaries;
            status_of(failed, rows.len())
        }
    };
    manifest.status = match status {
        EXIT_OK => "ok",
        EXIT_PARTIAL => "partial",
        _ => "failed",
    }
    .into();
    output::write_plot_script(&dir.join("plot.py"), cfg.sweep.kind)?;
    manifest.write(&dir.join("manifest.json"))?;
    Ok(status)
}

fn status_of(failed: usize, total: usize) -> i32 {
    if failed == 0 {
        EXIT_OK
    } else if failed < total {
        EXIT_PARTIAL
    } else {
        EXIT_SOLVER
    }
}

fn calibrate(cfg: &RunConfig, crystal: &crate::CrystalSpec, manifest: &mut Manifest) -> Result<f64> {
    let lattice = build_lattice(&cfg.geometry(crystal)?, crystal)?;
    let target = cfg.calibration.target.unwrap_or(crystal.target_binding_energy);
    let cal = calibrate_central_cell(&lattice, crystal, target, &cfg.calibration_options())?;
    let u0 = cal.u0;
    manifest.reference = Some(ReferenceBinding::new(crystal.target_binding_energy, &cal));
    manifest.calibration = Some(cal);
    Ok(u0)
}

/// Stark or anisotropy sweep over the configured field grid.
fn field_sweep(
    cfg: &RunConfig,
    pipeline: &DonorPipeline,
    resume: Option<&(PathBuf, (usize, f64))>,
    manifest: &mut Manifest,
) -> (Vec<GFactorPoint>, Vec<PointStats>) {
    let sw = &cfg.sweep;
    let n = (sw.e_axis[0].powi(2) + sw.e_axis[1].powi(2) + sw.e_axis[2].powi(2)).sqrt();
    let axis = sw.e_axis.map(|c| c / n);
    let mut points = Vec::new();
    let mut stats = Vec::new();
    let mut previous: Option<PointState> = None;
    for &m in &sw.e_grid {
        let e = axis.map(|c| c * m);
        // a checkpoint applies to the solve with the same dimension and σ
        let from = resume.and_then(|(path, (dim, sigma))| {
            let here = pipeline.sigma_for(e, previous.as_ref()).ok()?;
            (*dim == pipeline.operator().dim() && *sigma == here).then_some(path.as_path())
        });
        let solved = pipeline.solve_with(e, previous.as_ref(), from);
        match solved {
            Ok(state) => {
                stats.push(PointStats::from_report(e, &state.report));
                match sw.kind {
                    SweepKind::BulkStark => points.extend(sw.b_orientations.iter().map(|&b| pipeline.point(&state, b, axis))),
                    _ => match anisotropy_from_state(pipeline, &state, axis, &sw.theta_grid) {
                        Ok(scan) => {
                            manifest.fits.push(output::FitRecord { b_direction: axis, field: Some(m), result: Ok(output::FitValue::Linear(scan.fit)) });
                            points.extend(scan.points);
                        }
                        Err(err) => {
                            manifest.fits.push(output::FitRecord { b_direction: axis, field: Some(m), result: Err(err.to_string()) });
                            points.extend(sw.theta_grid.iter().map(|&t| pipeline.point(&state, crate::analysis::gtensor::rotated_direction(axis, t), axis)));
                        }
                    },
                }
                previous = Some(state);
            }
            Err(err) => {
                stats.push(PointStats::failed(e, &err));
                let dirs: Vec<[f64; 3]> = match sw.kind {
                    SweepKind::BulkStark => sw.b_orientations.clone(),
                    _ => sw.theta_grid.iter().map(|&t| crate::analysis::gtensor::rotated_direction(axis, t)).collect(),
                };
                points.extend(dirs.into_iter().map(|b| pipeline.failed_point(e, b, axis, &err)));
                previous = None;
            }
        }
    }
    (points, stats)
}
