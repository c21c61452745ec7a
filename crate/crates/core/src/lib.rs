//! Atomistic tight-binding simulator for the electric-field (Stark) response
//! of donor g-factors in multi-valley semiconductors.
//!
//! The pipeline is
//!
//! 1. [`lattice`]: finite diamond-lattice box with a substitutional donor,
//! 2. [`hamiltonian`]: sp3d5s* host with on-site p spin-orbit, screened
//!    Coulomb donor with a central-cell site potential and a uniform field,
//!    assembled as one sparse Hermitian operator over 20 spin-orbitals per atom,
//! 3. [`eigensolver`]: folded-spectrum block Lanczos for the donor levels,
//!    with a dense solver as small-scale oracle,
//! 4. [`spin`]: first-order Zeeman block on the ground Kramers pair and the
//!    g-factor,
//! 5. [`analysis`]: Stark sweeps, fits, valley populations and the closed-form
//!    valley-repopulation model,
//! 6. [`cli`]: configuration, orchestration and result files.

pub mod analysis;
pub mod cli;
pub mod constants;
pub mod crystal;
pub mod eigensolver;
pub mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod linalg;
pub mod orbitals;
pub mod slater_koster;
pub mod sparse;
pub mod spin;

pub use crystal::{CrystalSpec, TbParams, ValleyFamily};
pub use eigensolver::{solve_dense, solve_folded, FoldedOptions, Spinor};
pub use error::{Error, Result};
pub use hamiltonian::FieldConfig;
pub use lattice::{build_lattice, surface_atoms, AtomLattice, DeviceGeometry};
pub use sparse::SparseOperator;

pub use num_complex::Complex64;
