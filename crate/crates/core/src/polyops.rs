//! FFT-backed polynomial arithmetic in the variable `z^2`.
//!
//! Polynomials are coefficient vectors in ascending powers. Odd powers of `z`
//! never appear; a pure power `z^{-p}` multiplying a matrix is tracked as an
//! integer (`prefactor_power`).

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Operands with fewer coefficients than this are multiplied by schoolbook
/// convolution.
pub const SCHOOLBOOK_CROSSOVER: usize = 32;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn fft_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

fn transformed(c: &[Complex64], n: usize, fft: &dyn Fft<f64>) -> Vec<Complex64> {
    let mut buf = Vec::with_capacity(n);
    buf.extend_from_slice(c);
    buf.resize(n, ZERO);
    fft.process(&mut buf);
    buf
}

fn schoolbook(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

/// Coefficient convolution of two polynomials. The empty polynomial is zero.
pub fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) < SCHOOLBOOK_CROSSOVER {
        return schoolbook(a, b);
    }
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let fwd = fft_forward(n);
    let mut fa = transformed(a, n, fwd.as_ref());
    let fb = transformed(b, n, fwd.as_ref());
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft_inverse(n).process(&mut fa);
    let scale = 1.0 / n as f64;
    fa.truncate(len);
    fa.iter_mut().for_each(|v| *v *= scale);
    fa
}

pub fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, v) in out.iter_mut().zip(short) {
        *o += v;
    }
    out
}

/// Matrix whose entries are polynomials in `z^2`, all stored with the same
/// number of coefficients, times the scalar `z^{-prefactor_power}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    len: usize,
    entries: Vec<Vec<Complex64>>,
    prefactor_power: i32,
}

impl PolyMatrix {
    /// Builds a matrix from row-major entries; entries are zero-padded to a
    /// common length.
    pub fn new(rows: usize, cols: usize, entries: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let len = entries.iter().map(Vec::len).max().unwrap_or(1).max(1);
        let entries = entries
            .into_iter()
            .map(|mut e| {
                e.resize(len, ZERO);
                e
            })
            .collect();
        Ok(Self {
            rows,
            cols,
            len,
            entries,
            prefactor_power: 0,
        })
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![vec![ZERO]; size * size];
        for i in 0..size {
            entries[i * size + i][0] = ONE;
        }
        Self {
            rows: size,
            cols: size,
            len: 1,
            entries,
            prefactor_power: 0,
        }
    }

    pub fn with_prefactor(mut self, power: i32) -> Self {
        self.prefactor_power = power;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Common coefficient count of the entries (degree + 1).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> usize {
        self.len - 1
    }

    /// Power `p` of the scalar prefactor `z^{-p}`.
    pub fn prefactor_power(&self) -> i32 {
        self.prefactor_power
    }

    pub fn entry(&self, i: usize, j: usize) -> &[Complex64] {
        &self.entries[i * self.cols + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut Vec<Complex64> {
        &mut self.entries[i * self.cols + j]
    }

    /// Drops coefficients beyond `len`.
    pub fn truncate(&mut self, len: usize) {
        if len < self.len {
            let len = len.max(1);
            self.entries.iter_mut().for_each(|e| e.truncate(len));
            self.len = len;
        }
    }

    /// Entrywise evaluation at `w = z^2`, ignoring the prefactor.
    pub fn eval(&self, w: Complex64) -> Vec<Complex64> {
        self.entries
            .iter()
            .map(|e| crate::grid::horner(e, w))
            .collect()
    }

    /// Applies the polynomial part of the matrix to a vector of polynomials.
    pub fn apply(&self, v: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} rows",
                self.cols,
                v.len()
            )));
        }
        let col = PolyMatrix::new(self.cols, 1, v.to_vec())?;
        let prod = polymat_mul(self, &col)?;
        Ok(prod.entries)
    }
}

/// Product `A B` with polynomial entries; prefactor powers add.
pub fn polymat_mul(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let len = a.len + b.len - 1;
    let mut entries = Vec::with_capacity(a.rows * b.cols);
    if a.len.min(b.len) < SCHOOLBOOK_CROSSOVER {
        for i in 0..a.rows {
            for j in 0..b.cols {
                let mut acc = vec![ZERO; len];
                for l in 0..a.cols {
                    let p = schoolbook(a.entry(i, l), b.entry(l, j));
                    acc.iter_mut().zip(&p).for_each(|(x, y)| *x += y);
                }
                entries.push(acc);
            }
        }
    } else {
        let n = len.next_power_of_two();
        let fwd = fft_forward(n);
        let inv = fft_inverse(n);
        let fa: Vec<Vec<Complex64>> = a
            .entries
            .iter()
            .map(|e| transformed(e, n, fwd.as_ref()))
            .collect();
        let fb: Vec<Vec<Complex64>> = b
            .entries
            .iter()
            .map(|e| transformed(e, n, fwd.as_ref()))
            .collect();
        let scale = 1.0 / n as f64;
        for i in 0..a.rows {
            for j in 0..b.cols {
                let mut acc = vec![ZERO; n];
                for l in 0..a.cols {
                    let x = &fa[i * a.cols + l];
                    let y = &fb[l * b.cols + j];
                    for ((o, u), v) in acc.iter_mut().zip(x).zip(y) {
                        *o += u * v;
                    }
                }
                inv.process(&mut acc);
                acc.truncate(len);
                acc.iter_mut().for_each(|v| *v *= scale);
                entries.push(acc);
            }
        }
    }
    Ok(PolyMatrix {
        rows: a.rows,
        cols: b.cols,
        len,
        entries,
        prefactor_power: a.prefactor_power + b.prefactor_power,
    })
}

/// Cumulative product `Ms[last] ... Ms[1] Ms[0]` by balanced pairwise
/// multiplication. An empty list gives the identity of size `size`.
pub fn tree_product(ms: &[PolyMatrix], size: usize) -> Result<PolyMatrix> {
    tree_product_capped(ms, size, &|_| usize::MAX)
}

/// [`tree_product`] that truncates every partial product of `k` factors to
/// `cap(k)` coefficients. Used when the degree of the product is known to be
/// smaller than the sum of the factor degrees.
pub fn tree_product_capped(
    ms: &[PolyMatrix],
    size: usize,
    cap: &dyn Fn(usize) -> usize,
) -> Result<PolyMatrix> {
    match ms.len() {
        0 => Ok(PolyMatrix::identity(size)),
        1 => {
            let mut m = ms[0].clone();
            m.truncate(cap(1));
            Ok(m)
        }
        k => {
            let mid = k / 2;
            let lower = tree_product_capped(&ms[..mid], size, cap)?;
            let upper = tree_product_capped(&ms[mid..], size, cap)?;
            let mut p = polymat_mul(&upper, &lower)?;
            p.truncate(cap(k));
            Ok(p)
        }
    }
}

/// `1 / a mod x^n`; requires `a[0] != 0`.
pub fn series_inv(a: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    let a0 = a.first().copied().unwrap_or(ZERO);
    if a0 == ZERO {
        return Err(Error::InvalidInput("series inverse needs a non-zero constant term".into()));
    }
    let mut b = vec![ONE / a0];
    let mut len = 1;
    while len < n {
        len = (2 * len).min(n);
        let ab = poly_mul(&a[..a.len().min(len)], &b);
        // b (2 - a b)
        let mut corr: Vec<Complex64> = ab.into_iter().take(len).map(|v| -v).collect();
        corr[0] += 2.0;
        let mut nb = poly_mul(&b, &corr);
        nb.truncate(len);
        b = nb;
    }
    b.resize(n, ZERO);
    Ok(b)
}

/// `log a mod x^n`; requires `a[0] != 0` (the principal log of `a[0]` is
/// used for the constant term).
pub fn series_log(a: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let inv = series_inv(a, n)?;
    let da: Vec<Complex64> = a
        .iter()
        .enumerate()
        .skip(1)
        .take(n)
        .map(|(k, &v)| v * k as f64)
        .collect();
    let mut q = poly_mul(&da, &inv);
    q.resize(n, ZERO);
    let mut out = vec![ZERO; n];
    out[0] = a[0].ln();
    for k in 1..n {
        out[k] = q[k - 1] / k as f64;
    }
    Ok(out)
}

/// `exp g mod x^n` by Newton iteration on `log f = g`.
pub fn series_exp(g: &[Complex64], n: usize) -> Vec<Complex64> {
    if n == 0 {
        return Vec::new();
    }
    let g0 = g.first().copied().unwrap_or(ZERO);
    let mut f = vec![ONE];
    let mut len = 1;
    while len < n {
        len = (2 * len).min(n);
        let lf = series_log(&f, len).expect("constant term is 1");
        let mut corr = vec![ZERO; len];
        for k in 1..len {
            corr[k] = g.get(k).copied().unwrap_or(ZERO) - lf[k];
        }
        corr[0] = ONE;
        let mut nf = poly_mul(&f, &corr);
        nf.truncate(len);
        f = nf;
    }
    f.resize(n, ZERO);
    let s = g0.exp();
    f.iter_mut().for_each(|v| *v *= s);
    f
}
