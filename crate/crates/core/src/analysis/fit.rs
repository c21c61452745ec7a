//! Least-squares fits of Stark series and of sin²θ scans.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StarkModel {
    /// g(E)/g(0) − 1 = η₂E²
    #[default]
    Quadratic,
    /// g(E)/g(0) − 1 = η₁E + η₂E²
    LinearQuadratic,
}

impl StarkModel {
    /// Quadratic when a site-symmetry operation of the tetrahedral donor site
    /// reverses `e_axis` (g is then even in E), linear+quadratic otherwise.
    pub fn for_axis(e_axis: [f64; 3]) -> Self {
        if td_reverses(e_axis) {
            StarkModel::Quadratic
        } else {
            StarkModel::LinearQuadratic
        }
    }

    pub fn min_points(self) -> usize {
        match self {
            StarkModel::Quadratic => 4,
            StarkModel::LinearQuadratic => 5,
        }
    }
}

/// Whether some operation of Td maps `e` to −e. Td is the 24 signed
/// permutations of the axes with an even number of sign flips.
pub fn td_reverses(e: [f64; 3]) -> bool {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let scale = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return true;
    }
    let tol = 1e-9 * scale;
    PERMS.iter().any(|p| {
        (0..4).any(|flips: usize| {
            // sign patterns with an even number of −1: none, or all but one axis
            let sign = |k: usize| if flips == 0 || flips - 1 == k { 1.0 } else { -1.0 };
            (0..3).all(|k| (sign(k) * e[p[k]] + e[k]).abs() <= tol)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkFit {
    pub model: StarkModel,
    pub g0: f64,
    /// μm/V
    pub eta1: f64,
    /// μm²/V²
    pub eta2: f64,
    /// RMS of the residual of g/g0 − 1.
    pub rms_residual: f64,
}

impl StarkFit {
    /// Fitted relative shift g(E)/g0 − 1.
    pub fn shift(&self, e: f64) -> f64 {
        self.eta1 * e + self.eta2 * e * e
    }
}

/// Solves min ‖A c − y‖ by Householder QR. `a` is row-major, `m × n`.
/// Columns whose R diagonal falls below `1e-10` of their norm are rejected.
fn least_squares(mut a: Vec<f64>, m: usize, n: usize, mut y: Vec<f64>) -> Result<Vec<f64>> {
    let col_norms: Vec<f64> = (0..n).map(|j| (0..m).map(|i| a[i * n + j].powi(2)).sum::<f64>().sqrt()).collect();
    for k in 0..n {
        let alpha = (k..m).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
        if alpha <= 1e-10 * col_norms[k].max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient(format!("design column {k} is numerically dependent on the others")));
        }
        let sign = if a[k * n + k] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (k..m).map(|i| a[i * n + k]).collect();
        v[0] += sign * alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * a[i * n + j]).sum::<f64>() * 2.0 / vv;
            for i in k..m {
                a[i * n + j] -= s * v[i - k];
            }
        }
        let s: f64 = (k..m).map(|i| v[i - k] * y[i]).sum::<f64>() * 2.0 / vv;
        for i in k..m {
            y[i] -= s * v[i - k];
        }
    }
    let mut c = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * c[j]).sum();
        c[k] = (y[k] - s) / a[k * n + k];
    }
    Ok(c)
}

/// Fits g = g0·(1 + η₁E + η₂E²) (η₁ = 0 for the quadratic model) by
/// unweighted least squares on g. E in V/μm.
pub fn fit_stark(series: &[(f64, f64)], model: StarkModel) -> Result<StarkFit> {
    let need = model.min_points();
    if series.len() < need {
        return Err(Error::InvalidSolverInput(format!("{model:?} fit needs at least {need} points, got {}", series.len())));
    }
    if series.iter().any(|(e, g)| !e.is_finite() || !g.is_finite()) {
        return Err(Error::InvalidSolverInput("non-finite point in Stark series".into()));
    }
    let mut es: Vec<f64> = series.iter().map(|p| p.0).collect();
    es.sort_by(f64::total_cmp);
    if es.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSolverInput("Stark series has repeated field values".into()));
    }
    let scale = es.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if scale == 0.0 {
        return Err(Error::RankDeficient("all field values are zero".into()));
    }
    let m = series.len();
    let cols: Vec<fn(f64) -> f64> = match model {
        StarkModel::Quadratic => vec![|_| 1.0, |x| x * x],
        StarkModel::LinearQuadratic => vec![|_| 1.0, |x| x, |x| x * x],
    };
    let n = cols.len();
    let mut a = Vec::with_capacity(m * n);
    for &(e, _) in series {
        for f in &cols {
            a.push(f(e / scale));
        }
    }
    let y: Vec<f64> = series.iter().map(|p| p.1).collect();
    let c = least_squares(a, m, n, y)?;
    let g0 = c[0];
    if g0 == 0.0 {
        return Err(Error::RankDeficient("fitted g(0) is zero".into()));
    }
    let (eta1, eta2) = match model {
        StarkModel::Quadratic => (0.0, c[1] / g0 / (scale * scale)),
        StarkModel::LinearQuadratic => (c[1] / g0 / scale, c[2] / g0 / (scale * scale)),
    };
    let fit = StarkFit { model, g0, eta1, eta2, rms_residual: 0.0 };
    let ss: f64 = series.iter().map(|&(e, g)| (g / g0 - 1.0 - fit.shift(e)).powi(2)).sum();
    Ok(StarkFit { rms_residual: (ss / m as f64).sqrt(), ..fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when y is constant.
    pub r_squared: f64,
}

/// Ordinary least-squares line through (x, y).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidSolverInput("linear fit needs at least two (x, y) pairs".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::RankDeficient("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit { slope, intercept, r_squared })
}
