//! Bulk Bloch Hamiltonian of the two-atom primitive cell. Used for band
//! edges, valley positions and the Γ spin-orbit splitting.

use super::{onsite_block, AssemblyTables};
use crate::crystal::{CrystalSpec, ValleyFamily};
use crate::lattice::BOND_VECTORS;
use crate::linalg::DenseHermitian;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Occupied valence states per primitive cell, spin included.
const VALENCE_STATES: usize = 8;

/// 40×40 Bloch matrix at wavevector `k` (1/nm). A sits at the origin, B at a/4·(1,1,1).
pub fn bloch_hamiltonian(crystal: &CrystalSpec, k: [f64; 3]) -> DenseHermitian {
    let tables = AssemblyTables::new(crystal);
    let onsite = onsite_block(&crystal.params, 0.0, 0, 0b1111);
    let q = crystal.lattice_constant / 4.0;
    let mut coupling = [[Complex64::new(0.0, 0.0); 10]; 10];
    for (n, v) in BOND_VECTORS.iter().enumerate() {
        let phase = k[0] * v[0] as f64 * q + k[1] * v[1] as f64 * q + k[2] * v[2] as f64 * q;
        let ph = Complex64::from_polar(1.0, phase);
        for a in 0..10 {
            for b in 0..10 {
                coupling[a][b] += tables.hop[n][a][b] * ph;
            }
        }
    }
    DenseHermitian::from_fn(40, |i, j| {
        let (ai, ri) = (i / 20, i % 20);
        let (aj, rj) = (j / 20, j % 20);
        if ai == aj {
            onsite[ri][rj]
        } else if ri / 10 != rj / 10 {
            Complex64::new(0.0, 0.0)
        } else if ai == 0 {
            coupling[ri % 10][rj % 10]
        } else {
            coupling[rj % 10][ri % 10].conj()
        }
    })
}

pub fn band_energies(crystal: &CrystalSpec, k: [f64; 3]) -> Vec<f64> {
    bloch_hamiltonian(crystal, k).eigenvalues()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdge {
    pub energy: f64,
    /// Valley position along its axis in units of 2π/a.
    pub k_fraction: f64,
}

impl BandEdge {
    /// Valley wavevector along `axis` (unit vector), 1/nm.
    pub fn k_vector(&self, axis: [f64; 3], lattice_constant: f64) -> [f64; 3] {
        let k = self.k_fraction * 2.0 * PI / lattice_constant;
        [axis[0] * k, axis[1] * k, axis[2] * k]
    }
}

/// Lowest conduction energy along the valley axis, between Γ and the zone
/// boundary (X for ⟨100⟩, L for ⟨111⟩).
pub fn conduction_minimum(crystal: &CrystalSpec) -> BandEdge {
    let axis = crystal.valley_axes[0];
    let boundary = match crystal.valley_family {
        ValleyFamily::SixValley100 => 1.0,
        ValleyFamily::FourValley111 => 3f64.sqrt() / 2.0,
    };
    let scale = 2.0 * PI / crystal.lattice_constant;
    let cb = |t: f64| band_energies(crystal, [axis[0] * t * scale, axis[1] * t * scale, axis[2] * t * scale])[VALENCE_STATES];

    let samples = 60;
    let (mut best, mut best_e) = (0, f64::INFINITY);
    for i in 0..=samples {
        let e = cb(boundary * i as f64 / samples as f64);
        if e < best_e {
            best = i;
            best_e = e;
        }
    }
    let step = boundary / samples as f64;
    let mut lo = (best as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best + 1) as f64 * step).min(boundary);
    // golden-section refinement
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (cb(x1), cb(x2));
    while hi - lo > 1e-7 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cb(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cb(x2);
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut e = cb(t);
    for cand in [0.0, boundary] {
        let ec = cb(cand);
        if ec < e {
            t = cand;
            e = ec;
        }
    }
    BandEdge { energy: e, k_fraction: t }
}

/// Top of the valence band at Γ.
pub fn valence_maximum(crystal: &CrystalSpec) -> f64 {
    band_energies(crystal, [0.0; 3])[VALENCE_STATES - 1]
}

/// Energy between the Γ valence top (four-fold) and the split-off pair.
pub fn gamma_spin_orbit_splitting(crystal: &CrystalSpec) -> f64 {
    let e = band_energies(crystal, [0.0; 3]);
    e[VALENCE_STATES - 1] - e[VALENCE_STATES - 5]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silicon_band_edges() {
        let si = CrystalSpec::silicon();
        let cb = conduction_minimum(&si);
        let vb = valence_maximum(&si);
        assert!((cb.energy - vb - 1.13).abs() < 0.03, "gap {}", cb.energy - vb);
        assert!((cb.k_fraction - 0.81).abs() < 0.03, "valley at {}", cb.k_fraction);
    }

    #[test]
    fn germanium_is_indirect_at_l() {
        let ge = CrystalSpec::germanium();
        let cb = conduction_minimum(&ge);
        assert!((cb.k_fraction - 3f64.sqrt() / 2.0).abs() < 1e-6);
        let gamma_cb = band_energies(&ge, [0.0; 3])[VALENCE_STATES];
        assert!(cb.energy < gamma_cb);
    }

    #[test]
    fn valence_spin_orbit_splittings() {
        let si = gamma_spin_orbit_splitting(&CrystalSpec::silicon());
        let ge = gamma_spin_orbit_splitting(&CrystalSpec::germanium());
        assert!((si - 0.044).abs() < 1e-3, "Si split-off {si}");
        assert!((ge - 0.29).abs() < 1e-3, "Ge split-off {ge}");
        assert!(gamma_spin_orbit_splitting(&CrystalSpec::silicon().with_spin_orbit(0.0)).abs() < 1e-10);
    }

    #[test]
    fn kramers_degeneracy_in_bulk() {
        let si = CrystalSpec::silicon();
        let e = band_energies(&si, [1.3, 0.4, -2.2]);
        for p in e.chunks(2) {
            assert!((p[0] - p[1]).abs() < 1e-10);
        }
    }
}
