//! Interior eigenpairs of the donor Hamiltonian.
//!
//! [`solve_folded`] runs a thick-restart block Lanczos iteration on
//! `A = (H − σ)²` with full reorthogonalisation, so the states nearest σ
//! become the smallest eigenvalues of `A`. The retained Ritz vectors are then
//! refined by a Rayleigh-Ritz pass on `H` and accepted only when their true
//! residual `‖Hψ − Eψ‖` meets the tolerance. [`solve_dense`] is the oracle for
//! small boxes.

use crate::error::{Error, Result};
use crate::linalg::{self, Block, DenseHermitian};
use crate::sparse::{read_f64, read_u32, read_u64, SparseOperator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

pub const DENSE_CAP: usize = 20_000;
pub const DEFAULT_SEED: u64 = 0x5EED_D0E5;

const CHECKPOINT_MAGIC: &[u8; 8] = b"DGFCKPT\0";
const CHECKPOINT_VERSION: u32 = 1;

type Vector = Vec<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Spinor {
    pub amplitudes: Vector,
    pub energy: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldedOptions {
    pub sigma: f64,
    pub n_states: usize,
    pub tol: f64,
    pub block_size: usize,
    pub max_iterations: usize,
    /// Subspace size that triggers a thick restart.
    pub max_basis: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    /// Written after every restart when set.
    pub checkpoint: Option<PathBuf>,
    /// Restart from this checkpoint instead of a fresh start block.
    pub resume: Option<PathBuf>,
    /// Restarts without a two-fold residual improvement before giving up.
    pub stagnation_restarts: usize,
    /// Initial guesses placed first in the start block; at most
    /// `block_size − 1` are used.
    #[serde(skip)]
    pub warm_start: Vec<Vector>,
}

impl Default for FoldedOptions {
    fn default() -> Self {
        FoldedOptions {
            sigma: 0.0,
            n_states: 2,
            tol: 1e-8,
            block_size: 4,
            max_iterations: 5000,
            max_basis: 96,
            seed: DEFAULT_SEED,
            workers: None,
            checkpoint: None,
            resume: None,
            stagnation_restarts: 200,
            warm_start: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub sigma: f64,
    pub seed: u64,
    pub iterations: usize,
    pub restarts: usize,
    pub matvecs: usize,
    pub converged: bool,
    pub stagnated: bool,
    pub max_residual: f64,
    /// Smallest folded Ritz value after each restart.
    pub ritz_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FoldedSolution {
    /// Energy-sorted; when not converged these are the best available
    /// approximations with their actual residuals.
    pub states: Vec<Spinor>,
    pub report: SolverReport,
}

impl FoldedSolution {
    pub fn converged(self) -> Result<Vec<Spinor>> {
        if self.report.converged {
            Ok(self.states)
        } else {
            Err(Error::NotConverged(format!(
                "{} iterations, max residual {:.3e}{}",
                self.report.iterations,
                self.report.max_residual,
                if self.report.stagnated { ", stagnated" } else { "" }
            )))
        }
    }
}

/// Krylov-Schur state: `A V = V T + P B` with `V` orthonormal, `P` the pending
/// block orthonormal to `V`.
struct Krylov {
    v: Block,
    t: Vec<Vec<Complex64>>,
    p: Block,
    b: Vec<Vec<Complex64>>,
}

/// Runs `f` inside a pool of `workers` threads when requested.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Two passes of block classical Gram-Schmidt of `w` against `basis`; returns
/// the accumulated `basis.cols × w.cols` coefficients (column-major).
fn project_block(w: &mut Block, basis: &Block) -> Vec<Complex64> {
    let mut total = vec![Complex64::new(0.0, 0.0); basis.cols * w.cols];
    if basis.cols == 0 {
        return total;
    }
    for _ in 0..2 {
        let c = basis.adjoint_mul(w);
        basis.mul_acc(&c, w.cols, -1.0, w);
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    total
}

/// Two Gram-Schmidt passes of one vector against a few others.
fn project_vector(w: &mut [Complex64], q: &Block) -> Vec<Complex64> {
    let mut total = vec![Complex64::new(0.0, 0.0); q.cols];
    for _ in 0..2 {
        for (j, qj) in q.columns().enumerate() {
            let c = linalg::dot(qj, w);
            linalg::axpy(-c, qj, w);
            total[j] += c;
        }
    }
    total
}

/// Orthonormalises `block` against `basis` and itself. Returns the surviving
/// vectors and `R` (rows = surviving vectors) with `block = Q R` after the
/// projection. Collapsed directions are refilled with random vectors when
/// `rng` is given; their `R` rows are zero.
fn orthonormalize_block(mut block: Block, basis: &Block, rng: Option<&mut ChaCha8Rng>) -> (Block, Vec<Vec<Complex64>>) {
    let n = block.n;
    let k = block.cols;
    let before: Vec<f64> = block.columns().map(linalg::norm).collect();
    project_block(&mut block, basis);
    let mut q = Block::empty(n);
    let mut r = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    let mut rng = rng;
    for j in 0..k {
        let mut w = block.col(j).to_vec();
        let c = project_vector(&mut w, &q);
        for (i, ci) in c.iter().enumerate() {
            r[i][j] = *ci;
        }
        let nrm = linalg::norm(&w);
        if nrm > 1e-10 * before[j] {
            r[q.cols][j] = Complex64::new(nrm, 0.0);
            linalg::scale(Complex64::new(1.0 / nrm, 0.0), &mut w);
            q.push(&w);
            continue;
        }
        // no new direction from this column: try a fresh one
        let Some(g) = rng.as_deref_mut() else { continue };
        for _ in 0..3 {
            let mut x = Block::from_columns(n, &[random_vector(g, n)]);
            let b0 = linalg::norm(x.col(0));
            project_block(&mut x, basis);
            let mut x = x.data;
            project_vector(&mut x, &q);
            let nx = linalg::norm(&x);
            if nx > 1e-8 * b0 {
                linalg::scale(Complex64::new(1.0 / nx, 0.0), &mut x);
                q.push(&x);
                break;
            }
        }
    }
    r.truncate(q.cols);
    (q, r)
}

/// Smallest-first eigen-decomposition of the projected matrix.
fn ritz(t: &[Vec<Complex64>]) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let m = t.len();
    let dense = DenseHermitian::from_fn(m, |i, j| {
        if i == j {
            Complex64::new(t[i][i].re, 0.0)
        } else if i < j {
            t[i][j]
        } else {
            t[j][i].conj()
        }
    });
    dense.eigh()
}

/// Column-major matrix whose columns are the first `k` of `y`.
fn stack(y: &[Vec<Complex64>], k: usize) -> Vec<Complex64> {
    y[..k].iter().flat_map(|c| c.iter().copied()).collect()
}

/// Eigenpairs of `h` nearest `opts.sigma`.
pub fn solve_folded(h: &SparseOperator, opts: &FoldedOptions) -> Result<FoldedSolution> {
    let workers = opts.workers;
    with_workers(workers, || folded_impl(h, opts))
}

fn validate(h: &SparseOperator, opts: &FoldedOptions) -> Result<()> {
    if opts.n_states < 1 || opts.n_states > h.dim() {
        return Err(Error::InvalidSolverInput(format!("n_states = {} for dimension {}", opts.n_states, h.dim())));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidSolverInput("tolerance must be positive".into()));
    }
    if opts.block_size == 0 {
        return Err(Error::InvalidSolverInput("block size must be positive".into()));
    }
    if !opts.sigma.is_finite() {
        return Err(Error::InvalidSolverInput("sigma must be finite".into()));
    }
    if opts.max_basis < opts.n_states + 2 * opts.block_size {
        return Err(Error::InvalidSolverInput(format!(
            "max_basis {} too small for {} states with block {}",
            opts.max_basis, opts.n_states, opts.block_size
        )));
    }
    Ok(())
}

fn folded_impl(h: &SparseOperator, opts: &FoldedOptions) -> Result<FoldedSolution> {
    validate(h, opts)?;
    let n = h.dim();
    let sigma = opts.sigma;
    let nwant = opts.n_states;
    let max_basis = opts.max_basis.min(n);
    let keep = (max_basis / 2).max(nwant + opts.block_size).min(max_basis.saturating_sub(opts.block_size)).max(nwant);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = SolverReport { sigma, seed: opts.seed, ..Default::default() };

    let mut ks = match &opts.resume {
        Some(path) => {
            let (ks, rep) = read_checkpoint(path, n, sigma)?;
            report.iterations = rep.iterations;
            report.restarts = rep.restarts;
            report.ritz_history = rep.ritz_history;
            ks
        }
        None => {
            let mut start = Block::empty(n);
            // one column always stays random: a start block spanned by warm
            // vectors alone never leaves their symmetry sector
            for w in opts.warm_start.iter().take(opts.block_size.saturating_sub(1)) {
                if w.len() != n {
                    return Err(Error::InvalidSolverInput("warm-start vector has the wrong length".into()));
                }
                start.push(w);
            }
            while start.cols < opts.block_size.min(n) {
                start.push(&random_vector(&mut rng, n));
            }
            let (p, _) = orthonormalize_block(start, &Block::empty(n), Some(&mut rng));
            Krylov { v: Block::empty(n), t: Vec::new(), p, b: Vec::new() }
        }
    };

    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut gate_scale = 1.0;
    let mut best_residual = f64::INFINITY;
    let mut restarts_since_best = 0usize;
    let mut final_states: Option<Vec<Spinor>> = None;

    loop {
        // expand: V ← [V, P], compute A P and the next pending block
        if ks.p.cols > 0 {
            let p = std::mem::replace(&mut ks.p, Block::empty(n));
            let mut ap = Block::zeros(n, p.cols);
            for j in 0..p.cols {
                h.apply_folded(sigma, p.col(j), &mut tmp, ap.col_mut(j));
            }
            report.matvecs += 2 * p.cols;
            let m_old = ks.v.cols;
            ks.v.append(&p);
            let m = ks.v.cols;
            for row in ks.t.iter_mut() {
                row.resize(m, Complex64::new(0.0, 0.0));
            }
            ks.t.resize(m, vec![Complex64::new(0.0, 0.0); m]);
            let coeffs = project_block(&mut ap, &ks.v);
            for jj in 0..p.cols {
                let j = m_old + jj;
                for i in 0..=j {
                    ks.t[i][j] = coeffs[jj * m + i];
                }
            }
            // Hermitian completion from the upper triangle
            for j in m_old..m {
                ks.t[j][j] = Complex64::new(ks.t[j][j].re, 0.0);
                for i in 0..j {
                    ks.t[j][i] = ks.t[i][j].conj();
                }
            }
            let (q, r) = orthonormalize_block(ap, &ks.v, if m < n { Some(&mut rng) } else { None });
            // B = [0 | R]
            ks.b = r
                .into_iter()
                .map(|row| {
                    let mut full = vec![Complex64::new(0.0, 0.0); m];
                    full[m_old..].copy_from_slice(&row);
                    full
                })
                .collect();
            ks.p = q;
            report.iterations += 1;
        }

        let m = ks.v.cols;
        let (theta, y) = ritz(&ks.t);
        let exhausted = ks.p.cols == 0;
        let nw = nwant.min(m);
        let a_res: Vec<f64> = (0..nw)
            .map(|j| {
                ks.b.iter()
                    .map(|row| row.iter().zip(&y[j]).map(|(bi, yi)| bi * yi).sum::<Complex64>().norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let gate_ok = nw == nwant
            && (0..nw).all(|j| a_res[j] <= gate_scale * 2.0 * theta[j].max(0.0).sqrt().max(opts.tol) * opts.tol);

        if gate_ok || exhausted {
            let xs = ks.v.mul(&stack(&y, nw), nw);
            let states = refine_on_h(h, xs, &mut report);
            let max_res = states.iter().map(|s| s.residual_norm).fold(0.0, f64::max);
            report.max_residual = max_res;
            if max_res <= opts.tol || exhausted {
                report.converged = max_res <= opts.tol;
                final_states = Some(states);
                break;
            }
            gate_scale *= 0.1;
        }

        if report.iterations >= opts.max_iterations {
            break;
        }

        if m + ks.p.cols > max_basis {
            // thick restart on the `keep` smallest Ritz pairs
            let k = keep.min(m);
            let yk = stack(&y, k);
            let v_new = ks.v.mul(&yk, k);
            let b_new: Vec<Vec<Complex64>> = ks
                .b
                .iter()
                .map(|row| (0..k).map(|j| row.iter().zip(&y[j]).map(|(bi, yi)| bi * yi).sum()).collect())
                .collect();
            let mut t_new = vec![vec![Complex64::new(0.0, 0.0); k]; k];
            for j in 0..k {
                t_new[j][j] = Complex64::new(theta[j], 0.0);
            }
            ks.v = v_new;
            ks.t = t_new;
            ks.b = b_new;
            report.restarts += 1;
            report.ritz_history.push(theta[0]);
            let worst = a_res.iter().copied().fold(0.0, f64::max);
            if worst < 0.5 * best_residual {
                best_residual = worst;
                restarts_since_best = 0;
            } else {
                restarts_since_best += 1;
                if restarts_since_best >= opts.stagnation_restarts {
                    report.stagnated = true;
                    break;
                }
            }
            if let Some(path) = &opts.checkpoint {
                write_checkpoint(path, &ks, &report)?;
            }
        }
    }

    let states = match final_states {
        Some(s) => s,
        None => {
            let (_, y) = ritz(&ks.t);
            let nw = nwant.min(ks.v.cols);
            let s = refine_on_h(h, ks.v.mul(&stack(&y, nw), nw), &mut report);
            report.max_residual = s.iter().map(|s| s.residual_norm).fold(0.0, f64::max);
            report.converged = report.max_residual <= opts.tol && s.len() == nwant;
            s
        }
    };
    Ok(FoldedSolution { states, report })
}

/// Rayleigh-Ritz of `H` on span(xs); returns energy-sorted spinors with
/// their true residuals.
fn refine_on_h(h: &SparseOperator, xs: Block, report: &mut SolverReport) -> Vec<Spinor> {
    let k = xs.cols;
    if k == 0 {
        return Vec::new();
    }
    let mut hx = Block::zeros(xs.n, k);
    for j in 0..k {
        h.apply(xs.col(j), hx.col_mut(j));
    }
    report.matvecs += k;
    let g = xs.adjoint_mul(&hx);
    let dense = DenseHermitian::from_fn(k, |i, j| {
        if i == j {
            Complex64::new(g[i * k + i].re, 0.0)
        } else if i < j {
            g[j * k + i]
        } else {
            g[i * k + j].conj()
        }
    });
    let (e, q) = dense.eigh();
    let qm = stack(&q, k);
    let z = xs.mul(&qm, k);
    let hz = hx.mul(&qm, k);
    let mut out: Vec<Spinor> = (0..k)
        .map(|j| {
            let mut zj = z.col(j).to_vec();
            let mut r = hz.col(j).to_vec();
            let nz = linalg::norm(&zj);
            linalg::scale(Complex64::new(1.0 / nz, 0.0), &mut zj);
            linalg::scale(Complex64::new(1.0 / nz, 0.0), &mut r);
            linalg::axpy(Complex64::new(-e[j], 0.0), &zj, &mut r);
            Spinor { energy: e[j], residual_norm: linalg::norm(&r), amplitudes: zj }
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

/// Full diagonalisation, eigenvalues ascending.
pub fn solve_dense(h: &SparseOperator) -> Result<Vec<Spinor>> {
    check_dense_cap(h)?;
    let d = h.to_dense();
    let (e, v) = d.eigh();
    Ok(e.into_iter()
        .zip(v)
        .map(|(energy, amplitudes)| {
            let mut r = h.mul_vec(&amplitudes);
            linalg::axpy(Complex64::new(-energy, 0.0), &amplitudes, &mut r);
            Spinor { residual_norm: linalg::norm(&r), energy, amplitudes }
        })
        .collect())
}

/// Eigenvalues only; far cheaper in memory than [`solve_dense`].
pub fn dense_eigenvalues(h: &SparseOperator) -> Result<Vec<f64>> {
    check_dense_cap(h)?;
    Ok(h.to_dense().eigenvalues())
}

fn check_dense_cap(h: &SparseOperator) -> Result<()> {
    if h.dim() > DENSE_CAP {
        return Err(Error::DenseTooLarge { dim: h.dim(), cap: DENSE_CAP });
    }
    Ok(())
}

fn write_vec(w: &mut impl Write, v: &[Complex64]) -> Result<()> {
    for x in v {
        w.write_all(&x.re.to_le_bytes())?;
        w.write_all(&x.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_vec(r: &mut impl Read, n: usize) -> Result<Vector> {
    (0..n).map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?))).collect()
}

/// Versioned little-endian checkpoint: header, counters, Ritz history, then
/// `T`, `B`, `V` and the pending block.
fn write_checkpoint(path: &Path, ks: &Krylov, report: &SolverReport) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
        let n = ks.v.n;
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        for x in [n, ks.v.cols, ks.p.cols, report.iterations, report.restarts, report.ritz_history.len()] {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        w.write_all(&report.sigma.to_le_bytes())?;
        for x in &report.ritz_history {
            w.write_all(&x.to_le_bytes())?;
        }
        for row in &ks.t {
            write_vec(&mut w, row)?;
        }
        for row in &ks.b {
            write_vec(&mut w, row)?;
        }
        write_vec(&mut w, &ks.v.data)?;
        write_vec(&mut w, &ks.p.data)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// (dimension, σ) a checkpoint was written for.
pub fn checkpoint_header(path: &Path) -> Result<(usize, f64)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a solver checkpoint".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let n = read_u64(&mut r)? as usize;
    for _ in 0..5 {
        read_u64(&mut r)?;
    }
    Ok((n, read_f64(&mut r)?))
}

fn read_checkpoint(path: &Path, dim: usize, sigma: f64) -> Result<(Krylov, SolverReport)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a solver checkpoint".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let mut h = [0usize; 6];
    for x in h.iter_mut() {
        *x = read_u64(&mut r)? as usize;
    }
    let [n, m, pb, iterations, restarts, hist] = h;
    let s = read_f64(&mut r)?;
    if n != dim || s != sigma {
        return Err(Error::Format(format!("checkpoint is for dimension {n}, sigma {s}; run has {dim}, {sigma}")));
    }
    let ritz_history = (0..hist).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let t = (0..m).map(|_| read_vec(&mut r, m)).collect::<Result<Vec<_>>>()?;
    let b = (0..pb).map(|_| read_vec(&mut r, m)).collect::<Result<Vec<_>>>()?;
    let v = Block { n, cols: m, data: read_vec(&mut r, n * m)? };
    let p = Block { n, cols: pb, data: read_vec(&mut r, n * pb)? };
    let report = SolverReport { iterations, restarts, ritz_history, sigma, ..Default::default() };
    Ok((Krylov { v, t, p, b }, report))
}
