//! Two-center Slater-Koster hopping blocks for the sp3d5s* basis.
//!
//! Blocks are built by rotating the bond-frame matrix (diagonal in the σ, π,
//! δ characters) into the crystal frame. p orbitals transform as vectors and
//! d orbitals as symmetric traceless quadratic forms, so one rotation handles
//! every channel.

use crate::constants::ORBITALS;
use crate::crystal::TbParams;
use crate::orbitals::ORBITAL_L;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Bond-frame character of each orbital: 0 σ, 1/2 π (x', y' like),
/// 3/4 δ (xy, x²−y²).
const CHARACTER: [usize; ORBITALS] = [0, 0, 1, 2, 0, 3, 2, 1, 4, 0];

/// Channel family: s, s*, p, d.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Shell {
    S,
    SStar,
    P,
    D,
}

const SHELL: [Shell; ORBITALS] = [
    Shell::S,
    Shell::SStar,
    Shell::P,
    Shell::P,
    Shell::P,
    Shell::D,
    Shell::D,
    Shell::D,
    Shell::D,
    Shell::D,
];

type Mat3 = [[f64; 3]; 3];

fn quadratic_forms() -> [Mat3; 5] {
    let h = 0.5;
    let z = 1.0 / (2.0 * SQRT3);
    [
        [[0.0, h, 0.0], [h, 0.0, 0.0], [0.0, 0.0, 0.0]],
        [[0.0, 0.0, 0.0], [0.0, 0.0, h], [0.0, h, 0.0]],
        [[0.0, 0.0, h], [0.0, 0.0, 0.0], [h, 0.0, 0.0]],
        [[h, 0.0, 0.0], [0.0, -h, 0.0], [0.0, 0.0, 0.0]],
        [[-z, 0.0, 0.0], [0.0, -z, 0.0], [0.0, 0.0, 2.0 * z]],
    ]
}

fn matmul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn transpose3(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

/// Proper rotation whose third column is the unit vector `d`.
fn frame_along(d: [f64; 3]) -> Mat3 {
    let t = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = t[0] * d[0] + t[1] * d[1] + t[2] * d[2];
    let mut x = [t[0] - dot * d[0], t[1] - dot * d[1], t[2] - dot * d[2]];
    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
    let y = [
        d[1] * x[2] - d[2] * x[1],
        d[2] * x[0] - d[0] * x[2],
        d[0] * x[1] - d[1] * x[0],
    ];
    [[x[0], y[0], d[0]], [x[1], y[1], d[1]], [x[2], y[2], d[2]]]
}

/// 10×10 orthogonal map from bond-frame orbitals to crystal-frame ones:
/// column m holds the crystal-frame expansion of bond-frame orbital m.
fn orbital_rotation(r: &Mat3) -> [[f64; ORBITALS]; ORBITALS] {
    let mut d = [[0.0; ORBITALS]; ORBITALS];
    d[0][0] = 1.0;
    d[1][1] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            d[2 + i][2 + j] = r[i][j];
        }
    }
    let q = quadratic_forms();
    let rt = transpose3(r);
    for a in 0..5 {
        let rotated = matmul3(&matmul3(r, &q[a]), &rt);
        for b in 0..5 {
            let mut tr = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    tr += q[b][i][j] * rotated[j][i];
                }
            }
            d[5 + b][5 + a] = 2.0 * tr;
        }
    }
    d
}

/// Bond-frame integral between orbital `a` on the origin atom and orbital `b`
/// on the neighbour, for matching characters.
fn bond_integral(p: &TbParams, a: usize, b: usize) -> f64 {
    let (sa, sb) = (SHELL[a], SHELL[b]);
    let (lo, hi, swapped) = if sa <= sb { (sa, sb, false) } else { (sb, sa, true) };
    let ch = CHARACTER[a];
    let v = match (lo, hi) {
        (Shell::S, Shell::S) => p.ss_sigma,
        (Shell::SStar, Shell::SStar) => p.sstar_sstar_sigma,
        (Shell::S, Shell::SStar) => p.s_sstar_sigma,
        (Shell::S, Shell::P) => p.sp_sigma,
        (Shell::SStar, Shell::P) => p.sstar_p_sigma,
        (Shell::S, Shell::D) => p.sd_sigma,
        (Shell::SStar, Shell::D) => p.sstar_d_sigma,
        (Shell::P, Shell::P) => {
            if ch == 0 {
                p.pp_sigma
            } else {
                p.pp_pi
            }
        }
        (Shell::P, Shell::D) => {
            if ch == 0 {
                p.pd_sigma
            } else {
                p.pd_pi
            }
        }
        (Shell::D, Shell::D) => match ch {
            0 => p.dd_sigma,
            1 | 2 => p.dd_pi,
            _ => p.dd_delta,
        },
        _ => unreachable!("shells are ordered"),
    };
    if swapped && (ORBITAL_L[a] + ORBITAL_L[b]) % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Hopping block `H[a][b] = <a, origin| H |b, origin + d>` for a bond along `d`
/// (any length; only the direction enters).
pub fn hopping_block(p: &TbParams, d: [f64; 3]) -> [[f64; ORBITALS]; ORBITALS] {
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let dir = [d[0] / n, d[1] / n, d[2] / n];
    let rot = orbital_rotation(&frame_along(dir));
    let mut local = [[0.0; ORBITALS]; ORBITALS];
    for a in 0..ORBITALS {
        for b in 0..ORBITALS {
            if CHARACTER[a] == CHARACTER[b] {
                local[a][b] = bond_integral(p, a, b);
            }
        }
    }
    // crystal = D · local · Dᵀ
    let mut tmp = [[0.0; ORBITALS]; ORBITALS];
    for i in 0..ORBITALS {
        for m in 0..ORBITALS {
            let dim = rot[i][m];
            if dim == 0.0 {
                continue;
            }
            for k in 0..ORBITALS {
                tmp[i][k] += dim * local[m][k];
            }
        }
    }
    let mut out = [[0.0; ORBITALS]; ORBITALS];
    for i in 0..ORBITALS {
        for j in 0..ORBITALS {
            let mut s = 0.0;
            for k in 0..ORBITALS {
                s += tmp[i][k] * rot[j][k];
            }
            // clean rotation round-off so that symmetry-forbidden entries stay zero
            out[i][j] = if s.abs() < 1e-13 { 0.0 } else { s };
        }
    }
    out
}
