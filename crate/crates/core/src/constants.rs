//! Physical constants (CODATA 2018) in the units used throughout the crate:
//! lengths in nm, energies in eV, fields in V/μm and T.

/// Bohr magneton, eV/T.
pub const BOHR_MAGNETON: f64 = 5.788_381_801_2e-5;

/// e²/(4πε₀), eV·nm.
pub const COULOMB_EV_NM: f64 = 1.439_964_548;

/// ħ²/(2m₀), eV·nm².
pub const HBAR2_OVER_2M0: f64 = 0.038_099_821_2;

/// Energy of an electron displaced 1 nm along a 1 V/μm field, eV.
pub const EFIELD_EV_PER_NM_PER_V_PER_UM: f64 = 1.0e-3;

/// Orbitals per atom, without spin.
pub const ORBITALS: usize = 10;

/// Spin-orbitals per atom.
pub const STATES_PER_ATOM: usize = 2 * ORBITALS;
