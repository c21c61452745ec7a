//! First-order Zeeman splitting of the donor ground Kramers pair.
//!
//! `H_Z = μ_B (L + 2S)·B` is projected onto the pair and
//! `g = (λ₊ − λ₋)/(μ_B |B|)` is read off the 2×2 eigenvalues, which makes g
//! independent of the basis chosen inside the pair.

use crate::constants::{BOHR_MAGNETON, HBAR2_OVER_2M0, ORBITALS, STATES_PER_ATOM};
use crate::eigensolver::Spinor;
use crate::error::{Error, Result};
use crate::hamiltonian::{norm3, FieldConfig};
use crate::lattice::AtomLattice;
use crate::linalg::{self, eig2};
use crate::orbitals::l_dot;
use crate::sparse::SparseOperator;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest pair splitting at B = 0 still accepted as a Kramers doublet, eV.
pub const KRAMERS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LMode {
    /// Atomic angular momentum of the p and d orbitals only.
    Onsite,
    /// Atomic part plus the inter-site orbital motion `(r − r_d) × p`.
    #[default]
    OnsiteEnvelope,
}

/// Applies `L·axis` (units of ħ) to `psi`. The envelope part needs the
/// Hamiltonian, from which the velocity `i[H, r]/ħ` is built.
pub fn angular_momentum_apply(
    psi: &[Complex64],
    lattice: &AtomLattice,
    axis: [f64; 3],
    mode: LMode,
    h: Option<&SparseOperator>,
) -> Vec<Complex64> {
    let mut out = onsite_l(psi, axis);
    if mode == LMode::OnsiteEnvelope {
        let h = h.expect("envelope angular momentum needs the Hamiltonian");
        let env = envelope_l(psi, lattice, axis, h);
        linalg::axpy(Complex64::new(1.0, 0.0), &env, &mut out);
    }
    out
}

fn onsite_l(psi: &[Complex64], axis: [f64; 3]) -> Vec<Complex64> {
    let l = l_dot(axis);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    out.par_chunks_mut(ORBITALS).zip(psi.par_chunks(ORBITALS)).for_each(|(o, x)| {
        for a in 0..ORBITALS {
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..ORBITALS {
                s += l[a][b] * x[b];
            }
            o[a] = s;
        }
    });
    out
}

/// `K_c x = i[H, r_c] x`, eV·nm. Only inter-site entries contribute.
fn commutator_r(h: &SparseOperator, positions: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    (0..h.dim())
        .into_par_iter()
        .map(|r| {
            let ri = positions[r / STATES_PER_ATOM];
            let (cols, vals) = h.row(r);
            let mut s = Complex64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                let d = positions[c as usize / STATES_PER_ATOM] - ri;
                if d != 0.0 {
                    s += v * x[c as usize] * d;
                }
            }
            i * s
        })
        .collect()
}

fn scale_by_coordinate(x: &[Complex64], coord: &[f64]) -> Vec<Complex64> {
    x.par_iter().enumerate().map(|(r, v)| v * coord[r / STATES_PER_ATOM]).collect()
}

/// `(m0/ħ²) Σ ε_abc n_a ½(r_b K_c + K_c r_b)`, with r measured from the donor.
fn envelope_l(psi: &[Complex64], lattice: &AtomLattice, axis: [f64; 3], h: &SparseOperator) -> Vec<Complex64> {
    let coords: Vec<Vec<f64>> = (0..3)
        .map(|k| (0..lattice.atom_count()).map(|i| lattice.displacement(i)[k]).collect())
        .collect();
    let m0_over_hbar2 = 1.0 / (2.0 * HBAR2_OVER_2M0);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        if axis[a] == 0.0 {
            continue;
        }
        // ε_abc r_b K_c − ε_acb r_c K_b, each symmetrised
        for (u, v, sign) in [(b, c, 1.0), (c, b, -1.0)] {
            let kv = commutator_r(h, &coords[v], psi);
            let term1 = scale_by_coordinate(&kv, &coords[u]);
            let term2 = commutator_r(h, &coords[v], &scale_by_coordinate(psi, &coords[u]));
            let w = Complex64::new(0.5 * sign * axis[a] * m0_over_hbar2, 0.0);
            linalg::axpy(w, &term1, &mut out);
            linalg::axpy(w, &term2, &mut out);
        }
    }
    out
}

/// `σ·n` on the spin index (= 2S·n in units of ħ).
pub fn pauli_apply(psi: &[Complex64], n: [f64; 3]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    let up_dn = Complex64::new(n[0], -n[1]);
    let dn_up = Complex64::new(n[0], n[1]);
    out.par_chunks_mut(STATES_PER_ATOM).zip(psi.par_chunks(STATES_PER_ATOM)).for_each(|(o, x)| {
        for a in 0..ORBITALS {
            let (u, d) = (x[a], x[ORBITALS + a]);
            o[a] = n[2] * u + up_dn * d;
            o[ORBITALS + a] = dn_up * u - n[2] * d;
        }
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanBlock {
    /// eV at field `b_field`.
    pub matrix: [[Complex64; 2]; 2],
    pub b_field: [f64; 3],
}

impl ZeemanBlock {
    pub fn eigenvalues(&self) -> [f64; 2] {
        eig2(self.matrix).0
    }

    pub fn g_factor(&self) -> Result<f64> {
        g_factor(self)
    }
}

/// `μ_B ⟨ψ_i|(L + 2S)·B|ψ_j⟩` over the pair.
pub fn zeeman_block(
    pair: [&Spinor; 2],
    lattice: &AtomLattice,
    field: &FieldConfig,
    mode: LMode,
    h: Option<&SparseOperator>,
) -> Result<ZeemanBlock> {
    let split = (pair[0].energy - pair[1].energy).abs();
    if split > KRAMERS_TOL {
        return Err(Error::NotKramersPair { split });
    }
    let b = field.b_field;
    let z = Complex64::new(0.0, 0.0);
    let mut m = [[z; 2]; 2];
    if b == [0.0; 3] {
        return Ok(ZeemanBlock { matrix: m, b_field: b });
    }
    let images: Vec<Vec<Complex64>> = pair
        .iter()
        .map(|s| {
            let mut v = angular_momentum_apply(&s.amplitudes, lattice, b, mode, h);
            linalg::axpy(Complex64::new(1.0, 0.0), &pauli_apply(&s.amplitudes, b), &mut v);
            v
        })
        .collect();
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = linalg::dot(&pair[i].amplitudes, &images[j]) * BOHR_MAGNETON;
        }
    }
    // the operator is Hermitian; remove round-off asymmetry
    let off = 0.5 * (m[0][1] + m[1][0].conj());
    m[0][1] = off;
    m[1][0] = off.conj();
    m[0][0].im = 0.0;
    m[1][1].im = 0.0;
    Ok(ZeemanBlock { matrix: m, b_field: b })
}

/// `(λ₊ − λ₋)/(μ_B |B|)`.
pub fn g_factor(block: &ZeemanBlock) -> Result<f64> {
    let b = norm3(block.b_field);
    if b == 0.0 {
        return Err(Error::ZeroField);
    }
    let [lo, hi] = block.eigenvalues();
    Ok((hi - lo) / (BOHR_MAGNETON * b))
}

/// Rotates the pair into the eigenbasis of its Zeeman block (lower level
/// first), fixing the gauge inside the degenerate subspace.
pub fn fix_gauge(pair: [&Spinor; 2], block: &ZeemanBlock) -> [Spinor; 2] {
    let (_, vecs) = eig2(block.matrix);
    let n = pair[0].amplitudes.len();
    let make = |c: [Complex64; 2]| {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        linalg::axpy(c[0], &pair[0].amplitudes, &mut v);
        linalg::axpy(c[1], &pair[1].amplitudes, &mut v);
        Spinor { amplitudes: v, energy: pair[0].energy, residual_norm: pair[0].residual_norm.max(pair[1].residual_norm) }
    };
    [make(vecs[0]), make(vecs[1])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::CrystalSpec;
    use crate::hamiltonian::assemble_host;
    use crate::lattice::{build_lattice, DeviceGeometry};
    use crate::orbitals::{PX, PY, S};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> (AtomLattice, SparseOperator) {
        let crystal = CrystalSpec::silicon();
        let g = DeviceGeometry::centered_cube(2, crystal.lattice_constant);
        let lat = build_lattice(&g, &crystal).unwrap();
        let h = assemble_host(&lat, &crystal).unwrap();
        (lat, h)
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let nv = linalg::norm(&v);
        linalg::scale(Complex64::new(1.0 / nv, 0.0), &mut v);
        v
    }

    fn spinor(amplitudes: Vec<Complex64>) -> Spinor {
        Spinor { amplitudes, energy: 0.0, residual_norm: 0.0 }
    }

    #[test]
    fn s_orbital_has_no_onsite_moment() {
        let (lat, _) = small();
        let mut psi = vec![Complex64::new(0.0, 0.0); 20 * lat.atom_count()];
        psi[20 * 3 + S] = Complex64::new(1.0, 0.0);
        let out = angular_momentum_apply(&psi, &lat, [0.3, -0.4, 0.5], LMode::Onsite, None);
        assert!(out.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn p_plus_is_lz_eigenstate() {
        let (lat, _) = small();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = vec![Complex64::new(0.0, 0.0); 20 * lat.atom_count()];
        psi[20 * 5 + 10 + PX] = Complex64::new(r, 0.0);
        psi[20 * 5 + 10 + PY] = Complex64::new(0.0, r);
        let out = angular_momentum_apply(&psi, &lat, [0.0, 0.0, 1.0], LMode::Onsite, None);
        for (o, p) in out.iter().zip(&psi) {
            assert!((o - p).norm() < 1e-15);
        }
    }

    #[test]
    fn angular_momentum_is_hermitian() {
        let (lat, h) = small();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = h.dim();
        for mode in [LMode::Onsite, LMode::OnsiteEnvelope] {
            let phi = random_state(&mut rng, n);
            let psi = random_state(&mut rng, n);
            let axis = [0.2, -0.7, 0.4];
            let lpsi = angular_momentum_apply(&psi, &lat, axis, mode, Some(&h));
            let lphi = angular_momentum_apply(&phi, &lat, axis, mode, Some(&h));
            let a = linalg::dot(&phi, &lpsi);
            let b = linalg::dot(&psi, &lphi).conj();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "{mode:?}: {a} vs {b}");
        }
    }

    #[test]
    fn pure_spin_pair_has_g_two() {
        let (lat, h) = small();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // real orbital ⊗ {↑, ↓}
        let n = h.dim();
        let orb: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut up = vec![Complex64::new(0.0, 0.0); n];
        let mut dn = vec![Complex64::new(0.0, 0.0); n];
        for atom in 0..lat.atom_count() {
            for a in 0..10 {
                let x = orb[10 * atom + a];
                up[20 * atom + a] = Complex64::new(x, 0.0);
                dn[20 * atom + 10 + a] = Complex64::new(x, 0.0);
            }
        }
        let nu = linalg::norm(&up);
        linalg::scale(Complex64::new(1.0 / nu, 0.0), &mut up);
        linalg::scale(Complex64::new(1.0 / nu, 0.0), &mut dn);
        let (s0, s1) = (spinor(up), spinor(dn));
        for b in [[0.0, 1.0, 0.0], [0.3, 0.5, -0.8]] {
            let blk = zeeman_block([&s0, &s1], &lat, &FieldConfig::new([0.0; 3], b), LMode::OnsiteEnvelope, Some(&h)).unwrap();
            assert!((blk.g_factor().unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_block_and_errors() {
        let (lat, _) = small();
        let n = 20 * lat.atom_count();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = spinor(random_state(&mut rng, n));
        let b = spinor(random_state(&mut rng, n));
        let blk = zeeman_block([&a, &b], &lat, &FieldConfig::new([0.0; 3], [0.0; 3]), LMode::Onsite, None).unwrap();
        assert!(blk.matrix.iter().flatten().all(|v| v.norm() == 0.0));
        assert!(matches!(blk.g_factor(), Err(Error::ZeroField)));
        let mut c = b.clone();
        c.energy = 1e-3;
        assert!(matches!(
            zeeman_block([&a, &c], &lat, &FieldConfig::default(), LMode::Onsite, None),
            Err(Error::NotKramersPair { .. })
        ));
    }

    #[test]
    fn g_from_diagonal_block() {
        let b = 1.0;
        let z = Complex64::new(0.0, 0.0);
        let m = BOHR_MAGNETON * b;
        let blk = ZeemanBlock { matrix: [[Complex64::new(m, 0.0), z], [z, Complex64::new(-m, 0.0)]], b_field: [0.0, 0.0, b] };
        assert!((g_factor(&blk).unwrap() - 2.0).abs() < 1e-14);
        let zero = ZeemanBlock { matrix: [[z; 2]; 2], b_field: [0.0, 0.0, 1.0] };
        assert_eq!(g_factor(&zero).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn g_is_basis_independent(
            d in prop::array::uniform2(-1e-4f64..1e-4),
            off in prop::array::uniform2(-1e-4f64..1e-4),
            angle in 0.0f64..6.3, phase in 0.0f64..6.3,
        ) {
            let m = [[Complex64::new(d[0], 0.0), Complex64::new(off[0], off[1])],
                     [Complex64::new(off[0], -off[1]), Complex64::new(d[1], 0.0)]];
            let blk = ZeemanBlock { matrix: m, b_field: [0.0, 1.0, 0.0] };
            // U = [[c, -s e^{-iφ}], [s e^{iφ}, c]]
            let (c, s) = (angle.cos(), angle.sin());
            let e = Complex64::from_polar(1.0, phase);
            let u = [[Complex64::new(c, 0.0), -s * e.conj()], [s * e, Complex64::new(c, 0.0)]];
            let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 { for j in 0..2 { for k in 0..2 { for l in 0..2 {
                r[i][j] += u[k][i].conj() * m[k][l] * u[l][j];
            }}}}
            let rot = ZeemanBlock { matrix: r, b_field: [0.0, 1.0, 0.0] };
            prop_assert!((g_factor(&blk).unwrap() - g_factor(&rot).unwrap()).abs() < 1e-9);
        }
    }
}
