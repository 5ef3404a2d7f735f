//! Construction of the layer-peeling input `P_N` from a reflection
//! coefficient, either directly from its delayed Fourier coefficients or
//! through a polynomial approximation of `a` obtained from a scalar
//! Riemann-Hilbert problem on the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::eval_on_circle;
use crate::grid::{JostPolynomialPair, TimeGrid};
use crate::polyops::{fft_forward, poly_mul, series_exp};
use crate::spectrum::ContinuousSpectrum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default oversampling factor `M / N`.
pub const DEFAULT_OVERSAMPLING: usize = 8;

/// Sampling plan tying the spectral window `[-Lambda, Lambda]` to the time
/// grid through `h Lambda = pi / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisPlan {
    lambda: f64,
    h: f64,
    n: usize,
    n_os: usize,
    m: usize,
    /// Delay exponent `ell_+ = T_2 / h`; need not be an integer.
    shift: f64,
}

impl SynthesisPlan {
    pub fn new(lambda: f64, n: usize, n_os: usize, shift: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("Lambda must be > 0, got {lambda}")));
        }
        if n == 0 || n_os == 0 {
            return Err(Error::InvalidInput(format!(
                "need N >= 1 and n_os >= 1, got N={n}, n_os={n_os}"
            )));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidInput("delay must be finite".into()));
        }
        Ok(Self {
            lambda,
            h: PI / (2.0 * lambda),
            n,
            n_os,
            m: n_os * n,
            shift,
        })
    }

    /// Plan for a time grid: `Lambda = pi / 2h`, delay `ell_+ = T_2 / h`.
    pub fn from_grid(grid: &TimeGrid, n_os: usize) -> Result<Self> {
        Self::new(PI / (2.0 * grid.h()), grid.n(), n_os, grid.ell_plus())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_os(&self) -> usize {
        self.n_os
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `xi_j = j pi / (2 M h)` for `j = -M..M`.
    pub fn xi(&self) -> Vec<f64> {
        let d = PI / (2.0 * self.m as f64 * self.h);
        (0..2 * self.m).map(|i| (i as f64 - self.m as f64) * d).collect()
    }
}

/// `rho(xi_j)` on the plan's frequency grid.
pub fn rho_samples(rho: &ContinuousSpectrum, plan: &SynthesisPlan) -> Vec<Complex64> {
    plan.xi().into_iter().map(|x| rho.eval(x)).collect()
}

/// Fourier coefficients of `rho(xi) exp(2 i xi T_2)` on the circle: the
/// length-2M Fourier sum, keeping indices `0..N`.
pub fn rho_fourier_coeffs(rho: &ContinuousSpectrum, plan: &SynthesisPlan) -> Vec<Complex64> {
    let samples = rho_samples(rho, plan);
    delayed_coeffs(&samples, plan)
}

/// [`rho_fourier_coeffs`] from precomputed samples `rho(xi_j)`.
pub fn delayed_coeffs(samples: &[Complex64], plan: &SynthesisPlan) -> Vec<Complex64> {
    let m = plan.m;
    let len = 2 * m;
    let mut buf = vec![ZERO; len];
    for (i, (x, v)) in plan.xi().into_iter().zip(samples).enumerate() {
        let j = i as i64 - m as i64;
        // exp(2 i xi T2) = exp(2 i xi h ell_+)
        let phase = Complex64::from_polar(1.0, 2.0 * x * plan.h * plan.shift);
        buf[j.rem_euclid(len as i64) as usize] = v * phase;
    }
    fft_forward(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    buf.truncate(plan.n);
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// `P_1 = 1`, `P_2 = sum_k rho_k z^{2k}`, padded to `N + 1` coefficients.
pub fn lp_input_direct(coeffs: &[Complex64]) -> JostPolynomialPair {
    let n = coeffs.len();
    let mut p1 = vec![ZERO; n + 1];
    p1[0] = ONE;
    let mut p2 = coeffs.to_vec();
    p2.push(ZERO);
    JostPolynomialPair { p1, p2 }
}

/// Polynomial approximation `a_N = {exp g}_N` of `a` with no bound states,
/// from `2M >= 2N` samples of `rho` on `xi_j = j pi / (2 M h)`.
///
/// The jump is `f = -log(1 + |rho|^2)`; `g` is its analytic half with the
/// mean term halved, so that `2 Re g = f` on the circle.
pub fn rh_a_polynomial(rho_samples: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    let len = rho_samples.len();
    if !len.is_multiple_of(2) || len < 2 * n {
        return Err(Error::InvalidInput(format!(
            "need an even number >= 2N = {} of samples, got {len}",
            2 * n
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = len / 2;
    let mut buf = vec![ZERO; len];
    for (i, r) in rho_samples.iter().enumerate() {
        let j = i as i64 - m as i64;
        buf[j.rem_euclid(len as i64) as usize] = Complex64::new(-(r.norm_sqr()).ln_1p(), 0.0);
    }
    fft_forward(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    let mut g: Vec<Complex64> = buf[..n].iter().map(|v| v * scale).collect();
    g[0] *= 0.5;
    Ok(series_exp(&g, n))
}

/// `b_N = {a_N sum_k rho_k z^{2k}}_N`.
pub fn rh_b_polynomial(a: &[Complex64], coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().min(coeffs.len());
    let mut b = poly_mul(&a[..n], &coeffs[..n]);
    b.resize(n, ZERO);
    b
}

/// Riemann-Hilbert route input `(a_N, b_N)`, padded to `N + 1` coefficients.
pub fn lp_input_rh(rho: &ContinuousSpectrum, plan: &SynthesisPlan) -> Result<JostPolynomialPair> {
    let samples = rho_samples(rho, plan);
    let coeffs = delayed_coeffs(&samples, plan);
    let mut a = rh_a_polynomial(&samples, plan.n)?;
    let mut b = rh_b_polynomial(&a, &coeffs);
    a.push(ZERO);
    b.push(ZERO);
    JostPolynomialPair::new(a, b)
}

/// `|a_N|` on `z^2 = exp(i pi j / M)`, for checking the unitarity identity.
pub fn circle_magnitudes(a: &[Complex64], m: usize) -> Vec<f64> {
    eval_on_circle(a, m).into_iter().map(|v| v.norm()).collect()
}
