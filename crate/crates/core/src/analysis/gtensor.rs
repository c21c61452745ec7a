//! Closed-form valley-repopulation model: the donor g-tensor as the
//! population-weighted sum of single-valley tensors.

use super::valley::ValleyPopulations;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// g-factors of one valley for B along (`g_par`) and across (`g_perp`) its axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleValleyG {
    pub g_par: f64,
    pub g_perp: f64,
}

impl SingleValleyG {
    pub fn new(g_par: f64, g_perp: f64) -> Result<Self> {
        for (name, g) in [("g_par", g_par), ("g_perp", g_perp)] {
            if !(g > 1.0 && g < 2.1) {
                return Err(Error::InvalidSolverInput(format!("{name} = {g} outside (1.0, 2.1)")));
            }
        }
        Ok(SingleValleyG { g_par, g_perp })
    }
}

/// `g_perp·I + (g_par − g_perp)·n nᵀ` for a valley along unit `axis`.
pub fn valley_tensor(axis: [f64; 3], sv: SingleValleyG) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = (sv.g_par - sv.g_perp) * axis[i] * axis[j];
        }
        t[i][i] += sv.g_perp;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GTensor {
    pub tensor: [[f64; 3]; 3],
}

impl GTensor {
    /// (g_x, g_y, g_z): the diagonal.
    pub fn components(&self) -> [f64; 3] {
        [self.tensor[0][0], self.tensor[1][1], self.tensor[2][2]]
    }

    /// Effective g for B along `dir`: |G·b̂|.
    pub fn along(&self, dir: [f64; 3]) -> f64 {
        effective_g(&self.tensor, dir)
    }
}

/// |G·b̂| for a symmetric tensor.
pub fn effective_g(tensor: &[[f64; 3]; 3], dir: [f64; 3]) -> f64 {
    let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let mut s = 0.0;
    for row in tensor {
        let v: f64 = (0..3).map(|j| row[j] * dir[j] / n).sum();
        s += v * v;
    }
    s.sqrt()
}

/// Σ_v w_v·G_v with the populations renormalized to unit sum.
pub fn analytic_g_tensor(pops: &ValleyPopulations, sv: SingleValleyG) -> Result<GTensor> {
    if pops.populations.len() != pops.axes.len() {
        return Err(Error::InvalidSolverInput("population and valley-axis counts differ".into()));
    }
    let total: f64 = pops.populations.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidSolverInput("valley populations sum to zero".into()));
    }
    let mut tensor = [[0.0; 3]; 3];
    for (&p, &axis) in pops.populations.iter().zip(&pops.axes) {
        let w = p / total;
        let t = valley_tensor(axis, sv);
        for i in 0..3 {
            for j in 0..3 {
                tensor[i][j] += w * t[i][j];
            }
        }
    }
    Ok(GTensor { tensor })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularG {
    /// |G·b̂(θ)|
    pub exact: f64,
    /// g_E·(1 + (g_P² − g_E²)/(2g_E²)·sin²θ)
    pub linearized: f64,
    pub difference: f64,
    /// (g_P − g_E)²/g_E²: bound on |difference|/exact.
    pub bound: f64,
}

/// Unit vector orthogonal to `e`: x̂ (or ŷ when e ∥ x̂) with its e-component removed.
pub fn rotation_partner(e: [f64; 3]) -> [f64; 3] {
    let seed = if e[0].abs() > 0.9 { [0.0, 1.0, 0.0] } else { [1.0, 0.0, 0.0] };
    let d: f64 = (0..3).map(|k| seed[k] * e[k]).sum();
    let mut p = [seed[0] - d * e[0], seed[1] - d * e[1], seed[2] - d * e[2]];
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    for v in &mut p {
        *v /= n;
    }
    p
}

/// B direction at angle θ from the field axis, rotating towards [`rotation_partner`].
pub fn rotated_direction(e_axis: [f64; 3], theta: f64) -> [f64; 3] {
    let n = (e_axis[0] * e_axis[0] + e_axis[1] * e_axis[1] + e_axis[2] * e_axis[2]).sqrt();
    let e = [e_axis[0] / n, e_axis[1] / n, e_axis[2] / n];
    let p = rotation_partner(e);
    let (s, c) = theta.sin_cos();
    [c * e[0] + s * p[0], c * e[1] + s * p[1], c * e[2] + s * p[2]]
}

/// g for B at angle θ from `e_axis`, for the diagonal tensor (g_x, g_y, g_z).
pub fn angular_g(g: [f64; 3], e_axis: [f64; 3], theta: f64) -> AngularG {
    let tensor = [[g[0], 0.0, 0.0], [0.0, g[1], 0.0], [0.0, 0.0, g[2]]];
    let n = (e_axis[0] * e_axis[0] + e_axis[1] * e_axis[1] + e_axis[2] * e_axis[2]).sqrt();
    let e = [e_axis[0] / n, e_axis[1] / n, e_axis[2] / n];
    let g_e = effective_g(&tensor, e);
    let g_p = effective_g(&tensor, rotation_partner(e));
    let exact = if theta == 0.0 { g_e } else { effective_g(&tensor, rotated_direction(e, theta)) };
    let s2 = theta.sin().powi(2);
    let linearized = g_e * (1.0 + (g_p * g_p - g_e * g_e) / (2.0 * g_e * g_e) * s2);
    AngularG { exact, linearized, difference: linearized - exact, bound: (g_p - g_e).powi(2) / (g_e * g_e) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::ValleyFamily;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    const SV: SingleValleyG = SingleValleyG { g_par: 1.9994, g_perp: 1.9981 };

    fn pops(family: ValleyFamily, p: Vec<f64>) -> ValleyPopulations {
        let leakage = 1.0 - p.iter().sum::<f64>();
        ValleyPopulations { populations: p, leakage, axes: family.axes() }
    }

    #[test]
    fn equal_populations_are_isotropic() {
        let t = analytic_g_tensor(&pops(ValleyFamily::SixValley100, vec![1.0 / 6.0; 6]), SV).unwrap();
        let want = 2.0 / 3.0 * SV.g_perp + SV.g_par / 3.0;
        for g in t.components() {
            assert!((g - want).abs() < 1e-14);
        }
        let t = analytic_g_tensor(&pops(ValleyFamily::FourValley111, vec![0.25; 4]), SV).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { want } else { 0.0 };
                assert!((t.tensor[i][j] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ionized_limit() {
        let t = analytic_g_tensor(&pops(ValleyFamily::SixValley100, vec![0.0, 0.0, 0.5, 0.5, 0.0, 0.0]), SV).unwrap();
        let [gx, gy, gz] = t.components();
        assert_eq!(gx, SV.g_perp);
        assert_eq!(gy, SV.g_par);
        assert_eq!(gz, SV.g_perp);
    }

    #[test]
    fn closed_form_for_field_along_y() {
        // a_x = a_{-x} = a_z = a_{-z}, a_y = a_{-y}
        let (ax, ay) = (0.13, 0.24);
        let t = analytic_g_tensor(&pops(ValleyFamily::SixValley100, vec![ax, ax, ay, ay, ax, ax]), SV).unwrap();
        let [gx, gy, _] = t.components();
        assert!((gx - (2.0 * ax * SV.g_par + (2.0 * ay + 2.0 * ax) * SV.g_perp)).abs() < 1e-14);
        assert!((gy - (4.0 * ax * SV.g_perp + 2.0 * ay * SV.g_par)).abs() < 1e-14);
    }

    #[test]
    fn angular_endpoints_and_isotropy() {
        let g = [1.999, 1.998, 1.999];
        let y = [0.0, 1.0, 0.0];
        assert_eq!(angular_g(g, y, 0.0).exact, g[1]);
        assert!((angular_g(g, y, FRAC_PI_2).exact - g[0]).abs() < 1e-15);
        for k in 0..10 {
            let a = angular_g([1.9985; 3], y, k as f64 * 0.3);
            assert!((a.exact - 1.9985).abs() < 1e-15);
        }
    }

    #[test]
    fn linearization_at_quarter_turn() {
        let a = angular_g([1.999, 1.998, 1.999], [0.0, 1.0, 0.0], std::f64::consts::FRAC_PI_4);
        let exact = (0.5 * 1.998f64.powi(2) + 0.5 * 1.999f64.powi(2)).sqrt();
        let lin = 1.998 * (1.0 + (1.999f64.powi(2) - 1.998f64.powi(2)) / (2.0 * 1.998f64.powi(2)) * 0.5);
        assert!((a.exact - exact).abs() < 1e-15);
        assert!((a.linearized - lin).abs() < 1e-15);
        // value frozen from direct evaluation of both forms
        assert!((a.difference - 6.257_821_59e-8).abs() < 1e-14, "{:e}", a.difference);
        assert!(a.difference.abs() / a.exact <= a.bound);
    }

    fn brute_force(p: &[f64], axes: &[[f64; 3]], sv: SingleValleyG) -> [[f64; 3]; 3] {
        // rotate diag(g_perp, g_perp, g_par) so its third axis lies along the valley
        let total: f64 = p.iter().sum();
        let mut out = [[0.0; 3]; 3];
        for (w, n) in p.iter().zip(axes) {
            let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let d: f64 = (0..3).map(|k| helper[k] * n[k]).sum();
            let mut u = [helper[0] - d * n[0], helper[1] - d * n[1], helper[2] - d * n[2]];
            let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            u.iter_mut().for_each(|x| *x /= un);
            let v = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
            let frame = [u, v, *n];
            let diag = [sv.g_perp, sv.g_perp, sv.g_par];
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += frame[k][i] * diag[k] * frame[k][j];
                    }
                    out[i][j] += w / total * s;
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn matches_brute_force_tensor_sum(raw in proptest::collection::vec(0.01f64..1.0, 6), four in any::<bool>()) {
            let family = if four { ValleyFamily::FourValley111 } else { ValleyFamily::SixValley100 };
            let n = family.axes().len();
            let p: Vec<f64> = raw[..n].to_vec();
            let t = analytic_g_tensor(&pops(family, p.clone()), SV).unwrap();
            let b = brute_force(&p, &family.axes(), SV);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((t.tensor[i][j] - b[i][j]).abs() < 1e-14);
                }
            }
        }

        #[test]
        fn linearization_within_bound(gx in 1.99f64..2.0, gy in 1.99f64..2.0, theta in 0.0f64..3.2) {
            let a = angular_g([gx, gy, gx], [0.0, 1.0, 0.0], theta);
            prop_assert!(a.difference.abs() / a.exact <= a.bound + 1e-15);
        }
    }
}
