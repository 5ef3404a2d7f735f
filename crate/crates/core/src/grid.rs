//! Time grids, sampled potentials and discrete Jost polynomials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equispaced grid `t_n = T1 + n h`, `n = 0..=N`, with `t_N = T2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t1: f64,
    t2: f64,
    n: usize,
    h: f64,
}

impl TimeGrid {
    pub fn new(t1: f64, t2: f64, n: usize) -> Result<Self> {
        if !(t1.is_finite() && t2.is_finite()) || t2 <= t1 {
            return Err(Error::InvalidInput(format!(
                "grid needs finite T1 < T2, got [{t1}, {t2}]"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidInput("grid needs at least one layer".into()));
        }
        Ok(Self {
            t1,
            t2,
            n,
            h: (t2 - t1) / n as f64,
        })
    }

    /// Symmetric grid on `[-T, T]`.
    pub fn symmetric(t: f64, n: usize) -> Result<Self> {
        Self::new(-t, t, n)
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// Number of layers; the grid carries `N + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `ell_-` with `h ell_- = -T1`.
    pub fn ell_minus(&self) -> f64 {
        -self.t1 / self.h
    }

    /// `ell_+` with `h ell_+ = T2`.
    pub fn ell_plus(&self) -> f64 {
        self.t2 / self.h
    }

    /// Node `t_i`; both end points are reproduced exactly.
    pub fn node(&self, i: usize) -> f64 {
        let s = i as f64 / self.n as f64;
        self.t1 * (1.0 - s) + self.t2 * s
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Grid on `[-T2, -T1]` obtained by reversing time.
    pub fn reversed(&self) -> Self {
        Self {
            t1: -self.t2,
            t2: -self.t1,
            n: self.n,
            h: self.h,
        }
    }
}

/// Complex samples `q_n = q(t_n)` on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    grid: TimeGrid,
    q: Vec<Complex64>,
}

impl SampledPotential {
    pub fn new(grid: TimeGrid, q: Vec<Complex64>) -> Result<Self> {
        if q.len() != grid.n() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} nodes but {} samples were given",
                grid.n() + 1,
                q.len()
            )));
        }
        if let Some(i) = q.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, q })
    }

    pub fn zero(grid: TimeGrid) -> Self {
        Self {
            grid,
            q: vec![Complex64::new(0.0, 0.0); grid.n() + 1],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let q = grid.nodes().into_iter().map(f).collect();
        Self { grid, q }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.q
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.q
    }

    /// `Q_n = c h q_n` for a scheme-specific weight `c`.
    pub fn scaled(&self, weight: f64) -> Vec<Complex64> {
        let s = weight * self.grid.h();
        self.q.iter().map(|v| v * s).collect()
    }

    /// Trapezoidal `L2` energy `int |q|^2 dt`.
    pub fn energy(&self) -> f64 {
        let n = self.q.len();
        let mut acc = 0.0;
        for (i, v) in self.q.iter().enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc += w * v.norm_sqr();
        }
        acc * self.grid.h()
    }

    /// Time-reversed, conjugated potential `q*(-s)` on the reversed grid.
    ///
    /// The right Jost solution of `q` is the component-swapped left Jost
    /// solution of this potential.
    pub fn reflected(&self) -> Self {
        Self {
            grid: self.grid.reversed(),
            q: self.q.iter().rev().map(|v| v.conj()).collect(),
        }
    }

    /// Copy with the first sample forced to zero (`Q_0 = 0`).
    pub fn with_zero_first(&self) -> Self {
        let mut q = self.q.clone();
        q[0] = Complex64::new(0.0, 0.0);
        Self { grid: self.grid, q }
    }

    /// CSV with header `t,re_q,im_q`, one row per node. Values use the
    /// shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re_q,im_q\n");
        for (t, v) in self.grid.nodes().into_iter().zip(&self.q) {
            // adding 0.0 turns -0 into 0
            out.push_str(&format!("{t},{:e},{:e}\n", v.re + 0.0, v.im + 0.0));
        }
        out
    }

    /// Parses the format written by [`SampledPotential::to_csv`]. The grid is
    /// rebuilt from the first and last `t`; interior nodes must lie on it.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("t,re_q,im_q") => {}
            other => {
                return Err(Error::InvalidInput(format!(
                    "expected header `t,re_q,im_q`, got {other:?}"
                )))
            }
        }
        let mut t = Vec::new();
        let mut q = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("row {}: {e}", row + 1)))?;
            if fields.len() != 3 {
                return Err(Error::InvalidInput(format!(
                    "row {}: expected 3 fields, got {}",
                    row + 1,
                    fields.len()
                )));
            }
            t.push(fields[0]);
            q.push(Complex64::new(fields[1], fields[2]));
        }
        if t.len() < 2 {
            return Err(Error::InvalidInput("potential needs at least two nodes".into()));
        }
        let grid = TimeGrid::new(t[0], t[t.len() - 1], t.len() - 1)?;
        let tol = 1e-6 * grid.h();
        if let Some(i) = t.iter().enumerate().position(|(i, &ti)| (ti - grid.node(i)).abs() > tol) {
            return Err(Error::InvalidInput(format!("node {i} is not on a uniform grid")));
        }
        Self::new(grid, q)
    }
}

/// Coefficients of the discrete Jost polynomials `P_1(z^2)`, `P_2(z^2)`
/// after `n` layers, in ascending powers of `z^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct JostPolynomialPair {
    pub p1: Vec<Complex64>,
    pub p2: Vec<Complex64>,
}

impl JostPolynomialPair {
    pub fn new(p1: Vec<Complex64>, p2: Vec<Complex64>) -> Result<Self> {
        if p1.is_empty() || p1.len() != p2.len() {
            return Err(Error::DimensionMismatch(format!(
                "Jost polynomials need equal non-zero lengths, got {} and {}",
                p1.len(),
                p2.len()
            )));
        }
        Ok(Self { p1, p2 })
    }

    /// `P = (1, 0)` padded to `n + 1` coefficients.
    pub fn vacuum(n: usize) -> Self {
        let mut p1 = vec![Complex64::new(0.0, 0.0); n + 1];
        p1[0] = Complex64::new(1.0, 0.0);
        Self {
            p1,
            p2: vec![Complex64::new(0.0, 0.0); n + 1],
        }
    }

    /// Layer index `n` (coefficient vectors have length `n + 1`).
    pub fn n(&self) -> usize {
        self.p1.len() - 1
    }

    /// Zero-pads (or truncates) both polynomials to `n + 1` coefficients.
    pub fn resized(mut self, n: usize) -> Self {
        self.p1.resize(n + 1, Complex64::new(0.0, 0.0));
        self.p2.resize(n + 1, Complex64::new(0.0, 0.0));
        self
    }

    /// Evaluates both polynomials at `w = z^2`.
    pub fn eval(&self, w: Complex64) -> (Complex64, Complex64) {
        (horner(&self.p1, w), horner(&self.p2, w))
    }
}

pub(crate) fn horner(c: &[Complex64], w: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * w + ck)
}
