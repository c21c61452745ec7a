//! Row-compressed complex Hermitian operator and its parallel matvec.

use crate::error::{Error, Result};
use crate::linalg::DenseHermitian;
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Rows handled by one matvec task. Each row is reduced sequentially in
/// column order, so the product is bitwise independent of the worker count.
const ROW_CHUNK: usize = 1024;

const DUMP_MAGIC: &[u8; 8] = b"DGFHAM\0\0";
const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_offsets: Vec<usize>,
    columns: Vec<u32>,
    values: Vec<Complex64>,
    /// Position of each row's diagonal entry in `values`.
    diag_pos: Vec<usize>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from CSR arrays. Every row must store its diagonal and keep its
    /// columns strictly increasing.
    pub fn from_csr(dim: usize, row_offsets: Vec<usize>, columns: Vec<u32>, values: Vec<Complex64>, hermitian: bool) -> Result<Self> {
        if row_offsets.len() != dim + 1 || columns.len() != values.len() || row_offsets[dim] != columns.len() {
            return Err(Error::Format("inconsistent CSR arrays".into()));
        }
        let mut diag_pos = Vec::with_capacity(dim);
        for r in 0..dim {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::Format(format!("row {r}: decreasing offsets")));
            }
            let cols = &columns[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c as usize >= dim) {
                return Err(Error::Format(format!("row {r}: columns not strictly increasing or out of range")));
            }
            match cols.binary_search(&(r as u32)) {
                Ok(p) => diag_pos.push(lo + p),
                Err(_) => return Err(Error::Format(format!("row {r}: diagonal entry not stored"))),
            }
        }
        Ok(SparseOperator { dim, row_offsets, columns, values, diag_pos, hermitian })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn columns(&self) -> &[u32] {
        &self.columns
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> (&[u32], &[Complex64]) {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.columns[lo..hi], &self.values[lo..hi])
    }

    pub fn diagonal(&self, r: usize) -> f64 {
        self.values[self.diag_pos[r]].re
    }

    /// Adds a real shift to diagonal entry `r`.
    pub fn shift_diagonal(&mut self, r: usize, delta: f64) {
        self.values[self.diag_pos[r]].re += delta;
    }

    /// Entry (r, c), zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&(c as u32)) {
            Ok(p) => vals[p],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// y = A x
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(c, out)| {
            let base = c * ROW_CHUNK;
            for (k, o) in out.iter_mut().enumerate() {
                let r = base + k;
                let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
                let mut acc = Complex64::new(0.0, 0.0);
                for p in lo..hi {
                    acc += self.values[p] * x[self.columns[p] as usize];
                }
                *o = acc;
            }
        });
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        y
    }

    /// y = (A − σ)² x, using `tmp` as scratch.
    pub fn apply_folded(&self, sigma: f64, x: &[Complex64], tmp: &mut [Complex64], y: &mut [Complex64]) {
        self.apply(x, tmp);
        tmp.par_iter_mut().zip(x.par_iter()).for_each(|(t, v)| *t -= sigma * v);
        self.apply(tmp, y);
        y.par_iter_mut().zip(tmp.par_iter()).for_each(|(o, t)| *o -= sigma * t);
    }

    /// max |A_ij − conj(A_ji)| over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        (0..self.dim)
            .into_par_iter()
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter()
                    .zip(vals)
                    .map(|(&c, &v)| (v - self.get(c as usize, r).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.dim).map(|r| self.row_offsets[r + 1] - self.row_offsets[r]).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> DenseHermitian {
        let mut m = DenseHermitian::zeros(self.dim);
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                m.set(r, c as usize, v);
            }
        }
        m
    }

    /// Little-endian binary dump: magic, version, dim, nnz, hermitian flag,
    /// offsets (u64), columns (u32), values (re, im as f64).
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.nnz() as u64).to_le_bytes())?;
        w.write_all(&[self.hermitian as u8])?;
        for &o in &self.row_offsets {
            w.write_all(&(o as u64).to_le_bytes())?;
        }
        for &c in &self.columns {
            w.write_all(&c.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Format("not an operator dump".into()));
        }
        let version = read_u32(r)?;
        if version != DUMP_VERSION {
            return Err(Error::Format(format!("unsupported operator dump version {version}")));
        }
        let dim = read_u64(r)? as usize;
        let nnz = read_u64(r)? as usize;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let offsets = (0..=dim).map(|_| read_u64(r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let columns = (0..nnz).map(|_| read_u32(r)).collect::<Result<Vec<_>>>()?;
        let values = (0..nnz)
            .map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_csr(dim, offsets, columns, values, flag[0] != 0)
    }
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
