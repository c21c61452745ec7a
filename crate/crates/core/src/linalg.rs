//! Small dense and vector kernels shared by the solvers.
//!
//! Inner products use a fixed chunked pairwise reduction, so their result
//! depends only on the input vectors and never on the worker count.

use faer::complex_native::c64;
use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

/// Elements summed sequentially before the pairwise tree takes over.
const DOT_CHUNK: usize = 2048;

fn pairwise_sum(mut parts: Vec<Complex64>) -> Complex64 {
    if parts.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    while parts.len() > 1 {
        let next: Vec<Complex64> = parts
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0] + c[1] } else { c[0] })
            .collect();
        parts = next;
    }
    parts[0]
}

/// ⟨a|b⟩ = Σ conj(aᵢ) bᵢ.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let parts: Vec<Complex64> = a
        .par_chunks(DOT_CHUNK)
        .zip(b.par_chunks(DOT_CHUNK))
        .map(|(x, y)| {
            let mut s = Complex64::new(0.0, 0.0);
            for (u, v) in x.iter().zip(y) {
                s += u.conj() * v;
            }
            s
        })
        .collect();
    pairwise_sum(parts)
}

pub fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).re.max(0.0).sqrt()
}

/// y ← y + α x
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.par_chunks_mut(DOT_CHUNK).zip(x.par_chunks(DOT_CHUNK)).for_each(|(yc, xc)| {
        for (u, v) in yc.iter_mut().zip(xc) {
            *u += alpha * v;
        }
    });
}

pub fn scale(alpha: Complex64, x: &mut [Complex64]) {
    x.par_chunks_mut(DOT_CHUNK).for_each(|c| c.iter_mut().for_each(|v| *v *= alpha));
}

/// Σⱼ coeffs[j] · vecs[j]
pub fn combine(vecs: &[Vec<Complex64>], coeffs: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    out.par_chunks_mut(DOT_CHUNK).enumerate().for_each(|(c, chunk)| {
        let start = c * DOT_CHUNK;
        let len = chunk.len();
        for (v, &w) in vecs.iter().zip(coeffs) {
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, x) in chunk.iter_mut().zip(&v[start..start + len]) {
                *o += w * x;
            }
        }
    });
    out
}

/// Rows per independent GEMM task in the tall-skinny kernels below.
const ROW_BLOCK: usize = 4096;

fn as_c64(s: &[Complex64]) -> &[c64] {
    // c64 is documented to share Complex64's layout
    unsafe { std::slice::from_raw_parts(s.as_ptr() as *const c64, s.len()) }
}

fn as_c64_mut(s: &mut [Complex64]) -> &mut [c64] {
    unsafe { std::slice::from_raw_parts_mut(s.as_mut_ptr() as *mut c64, s.len()) }
}

/// Tall column-major block of `cols` vectors of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub n: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Block {
    pub fn zeros(n: usize, cols: usize) -> Self {
        Block { n, cols, data: vec![Complex64::new(0.0, 0.0); n * cols] }
    }

    pub fn empty(n: usize) -> Self {
        Block { n, cols: 0, data: Vec::new() }
    }

    pub fn from_columns(n: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut b = Block::empty(n);
        for c in columns {
            b.push(c);
        }
        b
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn push(&mut self, v: &[Complex64]) {
        assert_eq!(v.len(), self.n);
        self.data.extend_from_slice(v);
        self.cols += 1;
    }

    pub fn append(&mut self, other: &Block) {
        assert_eq!(other.n, self.n);
        self.data.extend_from_slice(&other.data);
        self.cols += other.cols;
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.n.max(1)).take(self.cols)
    }

    /// `selfᴴ · w` as a `self.cols × w.cols` column-major matrix. Row blocks
    /// are reduced pairwise in a fixed order.
    pub fn adjoint_mul(&self, w: &Block) -> Vec<Complex64> {
        let (n, m, k) = (self.n, self.cols, w.cols);
        if m == 0 || k == 0 {
            return vec![Complex64::new(0.0, 0.0); m * k];
        }
        let blocks = n.div_ceil(ROW_BLOCK);
        let parts: Vec<Vec<Complex64>> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * ROW_BLOCK;
                let rows = ROW_BLOCK.min(n - lo);
                let vs = faer::mat::from_column_major_slice::<c64>(as_c64(&self.data), n, m);
                let ws = faer::mat::from_column_major_slice::<c64>(as_c64(&w.data), n, k);
                let mut out = vec![Complex64::new(0.0, 0.0); m * k];
                let acc = faer::mat::from_column_major_slice_mut::<c64>(as_c64_mut(&mut out), m, k);
                faer::linalg::matmul::matmul(
                    acc,
                    vs.subrows(lo, rows).adjoint(),
                    ws.subrows(lo, rows),
                    None,
                    c64::new(1.0, 0.0),
                    faer::Parallelism::None,
                );
                out
            })
            .collect();
        let mut parts = parts;
        while parts.len() > 1 {
            parts = parts
                .chunks(2)
                .map(|c| {
                    if c.len() == 2 {
                        c[0].iter().zip(&c[1]).map(|(a, b)| a + b).collect()
                    } else {
                        c[0].clone()
                    }
                })
                .collect();
        }
        parts.pop().unwrap()
    }

    /// `out += alpha · self · c` for a `self.cols × k` column-major `c`.
    pub fn mul_acc(&self, c: &[Complex64], k: usize, alpha: f64, out: &mut Block) {
        let (n, m) = (self.n, self.cols);
        assert_eq!(out.n, n);
        assert_eq!(out.cols, k);
        if m == 0 || k == 0 {
            return;
        }
        let cm = faer::mat::from_column_major_slice::<c64>(as_c64(c), m, k);
        let vs = faer::mat::from_column_major_slice::<c64>(as_c64(&self.data), n, m);
        // split output rows; each task owns a disjoint row range of every column
        let ptr = SendPtr(out.data.as_mut_ptr());
        (0..n.div_ceil(ROW_BLOCK)).into_par_iter().for_each(|b| {
            let lo = b * ROW_BLOCK;
            let rows = ROW_BLOCK.min(n - lo);
            let p = ptr;
            let acc = unsafe { faer::mat::from_raw_parts_mut::<c64>(p.0.add(lo) as *mut c64, rows, k, 1, n as isize) };
            faer::linalg::matmul::matmul(
                acc,
                vs.subrows(lo, rows),
                cm,
                Some(c64::new(1.0, 0.0)),
                c64::new(alpha, 0.0),
                faer::Parallelism::None,
            );
        });
    }

    /// `self · c` for a `self.cols × k` column-major `c`.
    pub fn mul(&self, c: &[Complex64], k: usize) -> Block {
        let mut out = Block::zeros(self.n, k);
        self.mul_acc(c, k, 1.0, &mut out);
        out
    }
}

#[derive(Clone, Copy)]
struct SendPtr(*mut Complex64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

/// Dense Hermitian matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl DenseHermitian {
    pub fn zeros(n: usize) -> Self {
        DenseHermitian { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    fn to_faer(&self) -> Mat<c64> {
        // lower triangle only is read; symmetrise so either side is valid
        Mat::<c64>::from_fn(self.n, self.n, |i, j| {
            let v = 0.5 * (self.get(i, j) + self.get(j, i).conj());
            c64::new(v.re, v.im)
        })
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        let mut ev = self.to_faer().selfadjoint_eigenvalues(Side::Lower);
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Ascending eigenvalues and unit eigenvectors (`vecs[k]` pairs with `vals[k]`).
    pub fn eigh(&self) -> (Vec<f64>, Vec<Vec<Complex64>>) {
        if self.n == 0 {
            return (Vec::new(), Vec::new());
        }
        let eig = self.to_faer().selfadjoint_eigendecomposition(Side::Lower);
        let s = eig.s().column_vector();
        let u = eig.u();
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| s.read(a).re.total_cmp(&s.read(b).re));
        let vals = order.iter().map(|&k| s.read(k).re).collect();
        let vecs = order
            .iter()
            .map(|&k| {
                (0..self.n)
                    .map(|i| {
                        let z = u.read(i, k);
                        Complex64::new(z.re, z.im)
                    })
                    .collect()
            })
            .collect();
        (vals, vecs)
    }
}

/// Eigen-decomposition of a 2×2 Hermitian matrix in closed form.
pub fn eig2(m: [[Complex64; 2]; 2]) -> ([f64; 2], [[Complex64; 2]; 2]) {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = 0.5 * (m[0][1] + m[1][0].conj());
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let vals = [mean - r, mean + r];
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if b.norm() < 1e-300 {
        return if a <= d { (vals, [[one, zero], [zero, one]]) } else { (vals, [[zero, one], [one, zero]]) };
    }
    // (b, λ−a) and (λ−d, b*) both solve the eigen-equation; keep the longer one
    let vec_for = |lam: f64| {
        let u = [b, Complex64::new(lam - a, 0.0)];
        let w = [Complex64::new(lam - d, 0.0), b.conj()];
        let nu = u[0].norm_sqr() + u[1].norm_sqr();
        let nw = w[0].norm_sqr() + w[1].norm_sqr();
        let (v, n) = if nu >= nw { (u, nu.sqrt()) } else { (w, nw.sqrt()) };
        [v[0] / n, v[1] / n]
    };
    let v0 = vec_for(vals[0]);
    let v1 = vec_for(vals[1]);
    (vals, [[v0[0], v1[0]], [v0[1], v1[1]]])
}
