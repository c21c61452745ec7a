//! Valley populations by Gaussian-windowed projection in k-space.
//!
//! Each of the 20 spin-orbital channels is placed on the a/4 site grid and
//! Fourier transformed; |F(k)|² is weighted by a Gaussian around every image
//! of each valley centre and summed over channels. Overlapping windows share
//! their weight, so the populations never add up to more than one.

use crate::constants::STATES_PER_ATOM;
use crate::crystal::CrystalSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::bulk;
use crate::lattice::AtomLattice;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Leakage above this flags the state as not donor-like.
pub const MAX_LEAKAGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValleyOptions {
    /// Gaussian window width, units of 2π/a.
    pub window: f64,
    /// Valley position along its axis, units of 2π/a; `None` takes the bulk
    /// conduction minimum of the crystal.
    pub k_fraction: Option<f64>,
    /// Minimum FFT length per axis; the site grid is zero-padded up to it.
    pub min_fft: usize,
}

impl Default for ValleyOptions {
    fn default() -> Self {
        ValleyOptions { window: 0.15, k_fraction: None, min_fft: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValleyPopulations {
    /// One entry per valley axis, in crystal order.
    pub populations: Vec<f64>,
    /// 1 − Σ populations.
    pub leakage: f64,
    pub axes: Vec<[f64; 3]>,
}

impl ValleyPopulations {
    pub fn total(&self) -> f64 {
        self.populations.iter().sum()
    }
}

pub struct ValleyProjector {
    dims: [usize; 3],
    /// Linear FFT-grid index of every atom.
    sites: Vec<usize>,
    /// Window weight per valley per FFT-grid point.
    weights: Vec<Vec<f64>>,
    axes: Vec<[f64; 3]>,
    plans: [Arc<dyn Fft<f64>>; 3],
}

/// Distance from `d` to the nearest reciprocal lattice vector (bcc in units
/// of 2π/a: all-even or all-odd integer triples).
fn reduce_bcc(d: [f64; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for offset in [0.0, 1.0] {
        let mut s = 0.0;
        for k in 0..3 {
            let g = ((d[k] - offset) / 2.0).round() * 2.0 + offset;
            s += (d[k] - g).powi(2);
        }
        best = best.min(s);
    }
    best
}

impl ValleyProjector {
    pub fn new(lattice: &AtomLattice, crystal: &CrystalSpec, opts: &ValleyOptions) -> Result<Self> {
        if !(opts.window > 0.0) {
            return Err(Error::InvalidSolverInput("valley window must be positive".into()));
        }
        let kf = match opts.k_fraction {
            Some(k) => k,
            None => bulk::conduction_minimum(crystal).k_fraction,
        };
        let mut extent = [0usize; 3];
        for g in &lattice.grid {
            for k in 0..3 {
                extent[k] = extent[k].max(g[k] as usize + 1);
            }
        }
        let dims = extent.map(|n| n.max(opts.min_fft));
        let sites = lattice
            .grid
            .iter()
            .map(|g| g[0] as usize + dims[0] * (g[1] as usize + dims[1] * g[2] as usize))
            .collect();
        let axes = crystal.valley_axes.clone();
        let centers: Vec<[f64; 3]> = axes.iter().map(|a| a.map(|c| c * kf)).collect();
        let total = dims[0] * dims[1] * dims[2];
        let mut weights = vec![vec![0.0; total]; axes.len()];
        let inv = 1.0 / (2.0 * opts.window * opts.window);
        let mut g = vec![0.0; axes.len()];
        for idx in 0..total {
            let i = [idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])];
            let kappa = [0, 1, 2].map(|k| 4.0 * i[k] as f64 / dims[k] as f64);
            let mut sum = 0.0;
            for (v, c) in centers.iter().enumerate() {
                g[v] = (-reduce_bcc([kappa[0] - c[0], kappa[1] - c[1], kappa[2] - c[2]]) * inv).exp();
                sum += g[v];
            }
            let norm = sum.max(1.0);
            for v in 0..axes.len() {
                weights[v][idx] = g[v] / norm;
            }
        }
        let mut planner = FftPlanner::new();
        let plans = dims.map(|n| planner.plan_fft_forward(n));
        Ok(ValleyProjector { dims, sites, weights, axes, plans })
    }

    pub fn fft_dims(&self) -> [usize; 3] {
        self.dims
    }

    fn fft3(&self, data: &mut [Complex64]) {
        let [nx, ny, nz] = self.dims;
        for row in data.chunks_mut(nx) {
            self.plans[0].process(row);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); ny.max(nz)];
        for z in 0..nz {
            for x in 0..nx {
                for y in 0..ny {
                    buf[y] = data[x + nx * (y + ny * z)];
                }
                self.plans[1].process(&mut buf[..ny]);
                for y in 0..ny {
                    data[x + nx * (y + ny * z)] = buf[y];
                }
            }
        }
        for y in 0..ny {
            for x in 0..nx {
                for z in 0..nz {
                    buf[z] = data[x + nx * (y + ny * z)];
                }
                self.plans[2].process(&mut buf[..nz]);
                for z in 0..nz {
                    data[x + nx * (y + ny * z)] = buf[z];
                }
            }
        }
    }

    /// Populations and leakage of a normalized state; no donor-likeness check.
    pub fn project(&self, psi: &[Complex64]) -> ValleyPopulations {
        assert_eq!(psi.len(), self.sites.len() * STATES_PER_ATOM, "state does not match the lattice");
        let total = self.dims.iter().product::<usize>();
        let mut pops = vec![0.0; self.axes.len()];
        let mut grid = vec![Complex64::new(0.0, 0.0); total];
        for ch in 0..STATES_PER_ATOM {
            grid.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for (atom, &site) in self.sites.iter().enumerate() {
                grid[site] = psi[atom * STATES_PER_ATOM + ch];
            }
            self.fft3(&mut grid);
            for (v, w) in self.weights.iter().enumerate() {
                pops[v] += grid.iter().zip(w).map(|(f, w)| w * f.norm_sqr()).sum::<f64>();
            }
        }
        pops.iter_mut().for_each(|p| *p /= total as f64);
        let leakage = 1.0 - pops.iter().sum::<f64>();
        ValleyPopulations { populations: pops, leakage, axes: self.axes.clone() }
    }

    /// [`project`](Self::project), rejecting states with leakage above [`MAX_LEAKAGE`].
    pub fn populations(&self, psi: &[Complex64]) -> Result<ValleyPopulations> {
        let p = self.project(psi);
        if p.leakage > MAX_LEAKAGE {
            return Err(Error::NotDonorLike(p.leakage));
        }
        Ok(p)
    }
}

pub fn valley_populations(
    psi: &[Complex64],
    lattice: &AtomLattice,
    crystal: &CrystalSpec,
    opts: &ValleyOptions,
) -> Result<ValleyPopulations> {
    ValleyProjector::new(lattice, crystal, opts)?.populations(psi)
}
