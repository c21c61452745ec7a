//! The sp3d5s* orbital basis and its on-site angular-momentum structure.
//!
//! Orbitals within one spin block are ordered
//! `s, s*, px, py, pz, dxy, dyz, dzx, dx²−y², d3z²−r²`; an atom's 20 states
//! are `spin * 10 + orbital` with spin up first.

use crate::constants::ORBITALS;
use num_complex::Complex64;

pub const S: usize = 0;
pub const S_STAR: usize = 1;
pub const PX: usize = 2;
pub const PY: usize = 3;
pub const PZ: usize = 4;
pub const DXY: usize = 5;
pub const DYZ: usize = 6;
pub const DZX: usize = 7;
pub const DX2Y2: usize = 8;
pub const DZ2: usize = 9;

pub const ORBITAL_NAMES: [&str; ORBITALS] =
    ["s", "s*", "px", "py", "pz", "dxy", "dyz", "dzx", "dx2-y2", "dz2"];

/// Angular momentum quantum number of each orbital.
pub const ORBITAL_L: [usize; ORBITALS] = [0, 0, 1, 1, 1, 2, 2, 2, 2, 2];

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Imaginary parts of L_x, L_y, L_z (units of ħ) in the real d basis; the
/// real parts vanish.
const D_L_IMAG: [[[f64; 5]; 5]; 3] = [
    [
        [0.0, 0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0, -SQRT3],
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, SQRT3, 0.0, 0.0, 0.0],
    ],
    [
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0, SQRT3],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, -SQRT3, 0.0, 0.0],
    ],
    [
        [0.0, 0.0, 0.0, 2.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0, 0.0],
        [-2.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
    ],
];

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Cartesian component `k` of L over the real p orbitals: (L_k)_ij = −i ε_kij.
pub fn l_matrix_p(k: usize) -> [[Complex64; 3]; 3] {
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = Complex64::new(0.0, -levi_civita(k, i, j));
        }
    }
    m
}

/// Cartesian component `k` of L over the real d orbitals.
pub fn l_matrix_d(k: usize) -> [[Complex64; 5]; 5] {
    let mut m = [[Complex64::new(0.0, 0.0); 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            m[i][j] = Complex64::new(0.0, D_L_IMAG[k][i][j]);
        }
    }
    m
}

/// L_k over all ten orbitals of one spin block (s and s* carry none).
pub fn l_matrix(k: usize) -> [[Complex64; ORBITALS]; ORBITALS] {
    let mut m = [[Complex64::new(0.0, 0.0); ORBITALS]; ORBITALS];
    let p = l_matrix_p(k);
    let d = l_matrix_d(k);
    for i in 0..3 {
        for j in 0..3 {
            m[PX + i][PX + j] = p[i][j];
        }
    }
    for i in 0..5 {
        for j in 0..5 {
            m[DXY + i][DXY + j] = d[i][j];
        }
    }
    m
}

/// L·n̂ over the ten orbitals.
pub fn l_dot(axis: [f64; 3]) -> [[Complex64; ORBITALS]; ORBITALS] {
    let mut m = [[Complex64::new(0.0, 0.0); ORBITALS]; ORBITALS];
    for (k, &n) in axis.iter().enumerate() {
        if n == 0.0 {
            continue;
        }
        let lk = l_matrix(k);
        for i in 0..ORBITALS {
            for j in 0..ORBITALS {
                m[i][j] += lk[i][j] * n;
            }
        }
    }
    m
}

/// On-site λ L·S over `{px, py, pz} × {↑, ↓}`, spin outermost.
///
/// Eigenvalues are +λ/2 (four-fold) and −λ (two-fold).
pub fn spin_orbit_block(lambda: f64) -> [[Complex64; 6]; 6] {
    let lx = l_matrix_p(0);
    let ly = l_matrix_p(1);
    let lz = l_matrix_p(2);
    let i = Complex64::new(0.0, 1.0);
    let half = 0.5 * lambda;
    let mut m = [[Complex64::new(0.0, 0.0); 6]; 6];
    for a in 0..3 {
        for b in 0..3 {
            // S = σ/2: [[Lz, Lx - iLy], [Lx + iLy, -Lz]] * λ/2
            m[a][b] = lz[a][b] * half;
            m[a][3 + b] = (lx[a][b] - i * ly[a][b]) * half;
            m[3 + a][b] = (lx[a][b] + i * ly[a][b]) * half;
            m[3 + a][3 + b] = -lz[a][b] * half;
        }
    }
    m
}

/// sp3 hybrid `(s + √3 n̂·p)/2` pointing along unit vector `n̂`.
pub fn sp3_hybrid(dir: [f64; 3]) -> [f64; ORBITALS] {
    let mut h = [0.0; ORBITALS];
    h[S] = 0.5;
    for k in 0..3 {
        h[PX + k] = 0.5 * SQRT3 * dir[k];
    }
    h
}
