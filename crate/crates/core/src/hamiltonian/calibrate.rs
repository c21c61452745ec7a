//! Central-cell calibration: the donor-site potential `u0` is tuned until the
//! ground donor level sits at the target binding energy below the conduction
//! edge of the same box.

use super::{add_donor_potential, add_efield, assemble_host, bulk, FieldConfig};
use crate::crystal::CrystalSpec;
use crate::eigensolver::{solve_folded, FoldedOptions, Spinor};
use crate::error::{Error, Result};
use crate::lattice::AtomLattice;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Search interval for u0, eV.
    pub interval: (f64, f64),
    /// Tolerance on the binding energy, eV.
    pub tol: f64,
    /// σ sits this far below the conduction edge, eV.
    pub sigma_offset: f64,
    pub max_steps: usize,
    pub solver: FoldedOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            interval: (-5.0, 0.0),
            tol: 1e-5,
            sigma_offset: 0.3,
            max_steps: 80,
            solver: FoldedOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub u0: f64,
    pub target: f64,
    /// Ground level minus box conduction edge, eV.
    pub binding_energy: f64,
    pub ground_energy: f64,
    /// Conduction edge of the donor-free box, eV.
    pub cb_edge: f64,
    /// Bulk conduction minimum, eV.
    pub bulk_cb_edge: f64,
    /// (u0, ground energy) for every evaluation, in evaluation order.
    pub trace: Vec<(f64, f64)>,
}

impl Calibration {
    /// Box conduction edge minus bulk edge.
    pub fn confinement_delta(&self) -> f64 {
        self.cb_edge - self.bulk_cb_edge
    }

    /// Deeper u0 never raises the ground level (up to `slack`).
    pub fn is_monotone(&self, slack: f64) -> bool {
        let mut t = self.trace.clone();
        t.sort_by(|a, b| a.0.total_cmp(&b.0));
        t.windows(2).all(|w| w[1].1 >= w[0].1 - slack)
    }
}

/// Lowest conduction level of the donor-free box.
pub fn conduction_edge(lattice: &AtomLattice, crystal: &CrystalSpec, opts: &CalibrationOptions) -> Result<f64> {
    let bulk_cb = bulk::conduction_minimum(crystal).energy;
    let sigma = bulk_cb - opts.sigma_offset;
    let h = assemble_host(lattice, crystal)?;
    let solver = FoldedOptions { sigma, n_states: 2, ..opts.solver.clone() };
    let states = solve_folded(&h, &solver)?.converged()?;
    let e = states[0].energy;
    if e < sigma {
        return Err(Error::NotConverged(format!(
            "lowest state near the conduction edge lies at {e:.4} eV, below σ = {sigma:.4} eV (in-gap state in the host box)"
        )));
    }
    Ok(e)
}

/// States of the donor Hamiltonian nearest `solver.sigma`, energy-sorted.
pub fn ground_energy(
    lattice: &AtomLattice,
    crystal: &CrystalSpec,
    u0: f64,
    field: &FieldConfig,
    solver: &FoldedOptions,
) -> Result<Vec<Spinor>> {
    let mut h = assemble_host(lattice, crystal)?;
    add_donor_potential(&mut h, lattice, crystal, u0);
    add_efield(&mut h, lattice, field);
    solve_folded(&h, solver)?.converged()
}

/// Finds u0 in `opts.interval` with binding energy within `opts.tol` of
/// `target`, by bisection safeguarded regula falsi (Illinois variant).
pub fn calibrate_central_cell(
    lattice: &AtomLattice,
    crystal: &CrystalSpec,
    target: f64,
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    if !(target < 0.0) {
        return Err(Error::InvalidSolverInput("binding-energy target must be negative".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidSolverInput("calibration tolerance must be positive".into()));
    }
    let bulk_cb_edge = bulk::conduction_minimum(crystal).energy;
    let cb_edge = conduction_edge(lattice, crystal, opts)?;
    let sigma = cb_edge - opts.sigma_offset;
    let mut host = assemble_host(lattice, crystal)?;
    // u0 enters only the donor diagonal; remember the Coulomb-only operator
    add_donor_potential(&mut host, lattice, crystal, 0.0);
    let donor_rows = lattice.donor * 20..(lattice.donor + 1) * 20;

    let mut trace = Vec::new();
    let mut warm: Vec<Vec<num_complex::Complex64>> = Vec::new();
    let mut eval = |u0: f64, trace: &mut Vec<(f64, f64)>| -> Result<f64> {
        let mut h = host.clone();
        for r in donor_rows.clone() {
            h.shift_diagonal(r, u0);
        }
        let solver = FoldedOptions { sigma, warm_start: warm.clone(), ..opts.solver.clone() };
        let states = solve_folded(&h, &solver)?.converged()?;
        let e0 = states[0].energy;
        warm = states.into_iter().map(|s| s.amplitudes).collect();
        trace.push((u0, e0));
        Ok(e0 - cb_edge - target)
    };

    let (mut a, mut b) = opts.interval;
    let mut fa = eval(a, &mut trace)?;
    let mut fb = eval(b, &mut trace)?;
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::BracketFailure { target, lo: fa + target, hi: fb + target });
    }
    let finish = |u0: f64, f: f64, trace: Vec<(f64, f64)>| Calibration {
        u0,
        target,
        binding_energy: f + target,
        ground_energy: f + target + cb_edge,
        cb_edge,
        bulk_cb_edge,
        trace,
    };
    if fa.abs() <= opts.tol {
        return Ok(finish(a, fa, trace));
    }
    if fb.abs() <= opts.tol {
        return Ok(finish(b, fb, trace));
    }
    // f(a) < 0 < f(b); f increases with u0
    let mut side = 0i32;
    for step in 0..opts.max_steps {
        let mut c = (a * fb - b * fa) / (fb - fa);
        // every third step is plain bisection so the bracket always shrinks
        if step % 3 == 2 || !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = eval(c, &mut trace)?;
        if fc.abs() <= opts.tol {
            return Ok(finish(c, fc, trace));
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NotConverged(format!(
        "central-cell search did not reach {:.1e} eV in {} steps (bracket [{a}, {b}] eV)",
        opts.tol, opts.max_steps
    )))
}
