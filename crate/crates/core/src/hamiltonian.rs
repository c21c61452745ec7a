//! Donor Hamiltonian: sp3d5s* host with on-site p spin-orbit and dangling-bond
//! passivation, screened Coulomb donor with a central-cell site potential, and
//! a uniform electric field.
//!
//! Basis index of (atom, spin, orbital) is `20·atom + 10·spin + orbital`.

pub mod bulk;
mod calibrate;

pub use calibrate::{calibrate_central_cell, conduction_edge, ground_energy, CalibrationOptions, Calibration};

use crate::constants::{COULOMB_EV_NM, EFIELD_EV_PER_NM_PER_V_PER_UM, ORBITALS, STATES_PER_ATOM};
use crate::crystal::{CrystalSpec, TbParams};
use crate::error::Result;
use crate::lattice::{AtomLattice, BOND_VECTORS, NO_NEIGHBOR};
use crate::orbitals::{sp3_hybrid, PX};
use crate::slater_koster::hopping_block;
use crate::sparse::SparseOperator;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::orbitals::spin_orbit_block;

type Block20 = [[Complex64; STATES_PER_ATOM]; STATES_PER_ATOM];
type Block10 = [[f64; ORBITALS]; ORBITALS];

/// Atoms assembled per parallel batch.
const ASSEMBLY_BATCH: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Electric field, V/μm.
    pub e_field: [f64; 3],
    /// Magnetic field, T. Enters only the Zeeman block, never the Hamiltonian.
    pub b_field: [f64; 3],
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { e_field: [0.0; 3], b_field: [0.0, 0.0, 1.0] }
    }
}

impl FieldConfig {
    pub fn new(e_field: [f64; 3], b_field: [f64; 3]) -> Self {
        FieldConfig { e_field, b_field }
    }

    /// Angle between E and B; zero when either vanishes.
    pub fn theta(&self) -> f64 {
        let e = norm3(self.e_field);
        let b = norm3(self.b_field);
        if e == 0.0 || b == 0.0 {
            return 0.0;
        }
        let c = dot3(self.e_field, self.b_field) / (e * b);
        c.clamp(-1.0, 1.0).acos()
    }
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// On-site block of an atom: orbital energies, λ L·S on p, and V_pass·|h⟩⟨h|
/// for every bond slot absent from `present_mask`.
fn onsite_block(p: &TbParams, passivation: f64, sublattice: u8, present_mask: u8) -> Block20 {
    let z = Complex64::new(0.0, 0.0);
    let mut m = [[z; STATES_PER_ATOM]; STATES_PER_ATOM];
    let e = p.onsite_energies();
    for s in 0..2 {
        for a in 0..ORBITALS {
            m[10 * s + a][10 * s + a] = Complex64::new(e[a], 0.0);
        }
    }
    let so = spin_orbit_block(p.so_lambda_p);
    for i in 0..6 {
        for j in 0..6 {
            let (si, pi) = (i / 3, i % 3);
            let (sj, pj) = (j / 3, j % 3);
            m[10 * si + PX + pi][10 * sj + PX + pj] += so[i][j];
        }
    }
    let inv = 1.0 / 3f64.sqrt();
    for k in 0..4 {
        if present_mask & (1 << k) != 0 {
            continue;
        }
        let v = AtomLattice::bond_vector(sublattice, k);
        let h = sp3_hybrid([v[0] as f64 * inv, v[1] as f64 * inv, v[2] as f64 * inv]);
        for s in 0..2 {
            for a in 0..ORBITALS {
                for b in 0..ORBITALS {
                    m[10 * s + a][10 * s + b].re += passivation * h[a] * h[b];
                }
            }
        }
    }
    m
}

struct AssemblyTables {
    /// Indexed by `16·sublattice + present_mask`.
    onsite: Vec<Block20>,
    /// Hopping from an A atom along `BOND_VECTORS[k]`; B rows use the transpose.
    hop: [Block10; 4],
}

impl AssemblyTables {
    fn new(crystal: &CrystalSpec) -> Self {
        let p = &crystal.params;
        let onsite = (0..32u8).map(|c| onsite_block(p, crystal.passivation_shift, c / 16, c % 16)).collect();
        let hop = BOND_VECTORS.map(|v| hopping_block(p, [v[0] as f64, v[1] as f64, v[2] as f64]));
        AssemblyTables { onsite, hop }
    }

    fn hop_entry(&self, sublattice: u8, k: usize, a: usize, b: usize) -> f64 {
        if sublattice == 0 {
            self.hop[k][a][b]
        } else {
            self.hop[k][b][a]
        }
    }

    /// Emits the 20 rows of `atom` in column order as (local row, column, value).
    fn atom_rows(&self, lattice: &AtomLattice, atom: usize, mut emit: impl FnMut(usize, u32, Complex64)) {
        let sub = lattice.sublattice[atom];
        let bonds = lattice.bonds[atom];
        let mask = (0..4).filter(|&k| bonds[k] != NO_NEIGHBOR).fold(0u8, |m, k| m | (1 << k));
        let onsite = &self.onsite[16 * sub as usize + mask as usize];
        // (neighbour atom, slot) in ascending atom order, self marked by slot 4
        let mut blocks: Vec<(u32, usize)> = (0..4).filter(|&k| bonds[k] != NO_NEIGHBOR).map(|k| (bonds[k], k)).collect();
        blocks.push((atom as u32, 4));
        blocks.sort_unstable();
        for s in 0..2 {
            for a in 0..ORBITALS {
                let row = 10 * s + a;
                for &(j, k) in &blocks {
                    let base = j * STATES_PER_ATOM as u32;
                    if k == 4 {
                        for c in 0..STATES_PER_ATOM {
                            let v = onsite[row][c];
                            if c == row || v != Complex64::new(0.0, 0.0) {
                                emit(row, base + c as u32, v);
                            }
                        }
                    } else {
                        for b in 0..ORBITALS {
                            let v = self.hop_entry(sub, k, a, b);
                            if v != 0.0 {
                                emit(row, base + (10 * s + b) as u32, Complex64::new(v, 0.0));
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Host tight-binding operator over the whole box: on-site blocks (with
/// spin-orbit and passivation) plus spin-diagonal Slater-Koster hopping.
pub fn assemble_host(lattice: &AtomLattice, crystal: &CrystalSpec) -> Result<SparseOperator> {
    crystal.validate()?;
    let tables = AssemblyTables::new(crystal);
    let atoms = lattice.atom_count();
    let dim = atoms * STATES_PER_ATOM;

    let counts: Vec<[u32; STATES_PER_ATOM]> = (0..atoms)
        .into_par_iter()
        .map(|i| {
            let mut c = [0u32; STATES_PER_ATOM];
            tables.atom_rows(lattice, i, |r, _, _| c[r] += 1);
            c
        })
        .collect();
    let mut row_offsets = Vec::with_capacity(dim + 1);
    row_offsets.push(0usize);
    for c in &counts {
        for &n in c {
            row_offsets.push(row_offsets.last().unwrap() + n as usize);
        }
    }
    drop(counts);
    let nnz = row_offsets[dim];
    let mut columns = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);

    let ids: Vec<usize> = (0..atoms).collect();
    for batch in ids.chunks(ASSEMBLY_BATCH) {
        let parts: Vec<(Vec<u32>, Vec<Complex64>)> = batch
            .par_iter()
            .map(|&i| {
                let mut cols = Vec::with_capacity(STATES_PER_ATOM * 60);
                let mut vals = Vec::with_capacity(STATES_PER_ATOM * 60);
                tables.atom_rows(lattice, i, |_, c, v| {
                    cols.push(c);
                    vals.push(v);
                });
                (cols, vals)
            })
            .collect();
        for (c, v) in parts {
            columns.extend_from_slice(&c);
            values.extend_from_slice(&v);
        }
    }
    SparseOperator::from_csr(dim, row_offsets, columns, values, true)
}

/// Screened Coulomb energy of the donor electron at distance `r` nm.
pub fn coulomb_shift(r: f64, dielectric_constant: f64) -> f64 {
    -COULOMB_EV_NM / (dielectric_constant * r)
}

fn shift_atom(h: &mut SparseOperator, atom: usize, delta: f64) {
    if delta == 0.0 {
        return;
    }
    for r in atom * STATES_PER_ATOM..(atom + 1) * STATES_PER_ATOM {
        h.shift_diagonal(r, delta);
    }
}

/// Adds the screened Coulomb potential on every atom except the donor, whose
/// 20 diagonals receive `u0` instead.
pub fn add_donor_potential(h: &mut SparseOperator, lattice: &AtomLattice, crystal: &CrystalSpec, u0: f64) {
    for i in 0..lattice.atom_count() {
        let delta = if i == lattice.donor {
            u0
        } else {
            coulomb_shift(norm3(lattice.displacement(i)), crystal.dielectric_constant)
        };
        shift_atom(h, i, delta);
    }
}

/// Potential energy of the electron at displacement `r` nm from the donor in
/// field `e_field` V/μm, eV.
pub fn field_shift(e_field: [f64; 3], r: [f64; 3]) -> f64 {
    dot3(e_field, r) * EFIELD_EV_PER_NM_PER_V_PER_UM
}

/// Adds e·E·(r − r_donor) to every diagonal entry.
pub fn add_efield(h: &mut SparseOperator, lattice: &AtomLattice, field: &FieldConfig) {
    if field.e_field == [0.0; 3] {
        return;
    }
    for i in 0..lattice.atom_count() {
        shift_atom(h, i, field_shift(field.e_field, lattice.displacement(i)));
    }
}

/// Host + donor potential + electric field.
pub fn donor_hamiltonian(lattice: &AtomLattice, crystal: &CrystalSpec, u0: f64, field: &FieldConfig) -> Result<SparseOperator> {
    let mut h = assemble_host(lattice, crystal)?;
    add_donor_potential(&mut h, lattice, crystal, u0);
    add_efield(&mut h, lattice, field);
    Ok(h)
}
