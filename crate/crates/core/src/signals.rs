//! Closed-form test spectra and potentials, and the error metrics used to
//! compare numerical results against them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{SampledPotential, TimeGrid};
use crate::quad::composite_gauss;
use crate::special::ln_gamma;
use crate::spectrum::{a_s_eval, BoundState, ContinuousSpectrum, DiscreteSpectrum, NFSpectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Range beyond which the sech reflection coefficients are below `1e-17`.
pub const SECH_LAMBDA: f64 = 15.0;

fn sech(x: f64) -> f64 {
    if x.abs() > 700.0 {
        0.0
    } else {
        1.0 / x.cosh()
    }
}

fn check_sech_params(a_r: f64) -> Result<()> {
    if !(0.0..0.5).contains(&a_r) {
        return Err(Error::InvalidInput(format!("A_R must lie in [0, 0.5), got {a_r}")));
    }
    Ok(())
}

/// Bound states `zeta_k = i (A_R + 0.5 + K - k)`, `b_k = (-1)^k`, `k = 1..=K`.
pub fn sech_bound_states(a_r: f64, k: usize) -> Result<DiscreteSpectrum> {
    check_sech_params(a_r)?;
    DiscreteSpectrum::new(
        (1..=k)
            .map(|j| {
                let zeta = Complex64::new(0.0, a_r + 0.5 + (k - j) as f64);
                let b = if j % 2 == 0 { 1.0 } else { -1.0 };
                BoundState::new(zeta, Complex64::new(b, 0.0))
            })
            .collect(),
    )
}

/// Reflection coefficient of the radiative part of `(A_R + K) sech t`:
///
/// `rho_R = b(xi) Gamma(0.5 + A_R - i xi) Gamma(0.5 - A_R - i xi) / Gamma(0.5 - i xi)^2`
/// with `b(xi) = -sin((A_R + K) pi) sech(pi xi)`.
pub fn sech_radiative_reflection(a_r: f64, k: usize) -> Result<ContinuousSpectrum> {
    check_sech_params(a_r)?;
    let amp = -((a_r + k as f64) * PI).sin();
    ContinuousSpectrum::from_fn(SECH_LAMBDA, false, move |xi| {
        let b = amp * sech(PI * xi);
        if b == 0.0 {
            return ZERO;
        }
        let mi = Complex64::new(0.0, -xi);
        let lg = ln_gamma(mi + 0.5 + a_r) + ln_gamma(mi + 0.5 - a_r) - 2.0 * ln_gamma(mi + 0.5);
        lg.exp() * b
    })
}

/// Full spectrum of `(A_R + K) sech t`: `rho = rho_R / a_S` and the bound
/// states of [`sech_bound_states`].
pub fn sech_spectrum(a_r: f64, k: usize) -> Result<NFSpectrum> {
    let discrete = sech_bound_states(a_r, k)?;
    let rho_r = sech_radiative_reflection(a_r, k)?;
    let s = discrete.clone();
    let rho = rho_r.map(move |xi, r| {
        r / a_s_eval(Complex64::new(xi, 0.0), &s).unwrap_or(Complex64::new(1.0, 0.0))
    });
    Ok(NFSpectrum::new(discrete, rho))
}

/// Exact scattering coefficients `(a(xi), b(xi))` of `A sech t`.
pub fn sech_scattering(amp: f64, xi: f64) -> (Complex64, Complex64) {
    let mi = Complex64::new(0.5, -xi);
    let a = (2.0 * ln_gamma(mi) - ln_gamma(mi + amp) - ln_gamma(mi - amp)).exp();
    let b = -(amp * PI).sin() * sech(PI * xi);
    (a, Complex64::new(b, 0.0))
}

/// `q_n = A sech(t_n)`.
pub fn sech_potential(amp: f64, grid: TimeGrid) -> SampledPotential {
    SampledPotential::from_fn(grid, |t| Complex64::new(amp * sech(t), 0.0))
}

/// Raised-cosine spectral shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaisedCosineParams {
    a_rc: f64,
    tau_s: f64,
    beta: f64,
}

impl RaisedCosineParams {
    pub fn new(a_rc: f64, tau_s: f64, beta: f64) -> Result<Self> {
        if !(a_rc > 0.0 && a_rc.is_finite()) {
            return Err(Error::InvalidInput(format!("A_rc must be > 0, got {a_rc}")));
        }
        if !(tau_s > 0.0 && tau_s.is_finite()) {
            return Err(Error::InvalidInput(format!("tau_s must be > 0, got {tau_s}")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidInput(format!("beta must lie in [0, 1], got {beta}")));
        }
        Ok(Self { a_rc, tau_s, beta })
    }

    pub fn amplitude(&self) -> f64 {
        self.a_rc
    }

    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Support half-width `(1 + beta) / tau_s`.
    pub fn lambda(&self) -> f64 {
        (1.0 + self.beta) / self.tau_s
    }

    pub fn with_amplitude(&self, a_rc: f64) -> Self {
        Self { a_rc, ..*self }
    }

    /// `H_rc(xi)`.
    pub fn eval(&self, xi: f64) -> f64 {
        let x = (self.tau_s * xi).abs() - (1.0 - self.beta);
        if x <= 0.0 {
            self.a_rc
        } else if x <= 2.0 * self.beta {
            0.5 * self.a_rc * (1.0 + (0.5 * PI * x / self.beta).cos())
        } else {
            0.0
        }
    }

    /// Impulse response `p_rc(tau) = (1/2pi) int H_rc(xi) exp(i xi tau) d xi`.
    pub fn impulse(&self, tau: f64) -> f64 {
        let u = tau / self.tau_s;
        let sinc = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
        // cos(pi x / 2) / (1 - x^2), x = 2 beta u / pi
        let x = (2.0 * self.beta * u / PI).abs();
        let shape = if (x - 1.0).abs() < 0.5 {
            let d = 1.0 - x;
            0.5 * PI * sinc(0.5 * PI * d) / (1.0 + x)
        } else {
            (0.5 * PI * x).cos() / (1.0 - x * x)
        };
        self.a_rc / (PI * self.tau_s) * sinc(u) * shape
    }
}

/// Raised-cosine continuous spectrum, bandlimited to `(1 + beta) / tau_s`.
pub fn rc_spectrum(params: &RaisedCosineParams) -> ContinuousSpectrum {
    let p = *params;
    ContinuousSpectrum::from_fn(p.lambda(), true, move |xi| Complex64::new(p.eval(xi), 0.0))
        .expect("raised-cosine support is positive")
}

/// Impulse response `p_rc` as a callable.
pub fn rc_impulse(params: &RaisedCosineParams) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let p = *params;
    move |tau| p.impulse(tau)
}

/// `n` QPSK symbols drawn from `{1, i, -1, -i}` with a seeded generator.
pub fn qpsk_symbols(n: usize, seed: u64) -> Result<Vec<Complex64>> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("N_sym must be even and positive, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    Ok((0..n).map(|_| alphabet[rng.gen_range(0..4)]).collect())
}

/// `sum_n s_n exp(-i n pi tau_s xi)` over `n = -N/2..N/2`.
fn symbol_sum(symbols: &[Complex64], tau_s: f64, xi: f64) -> Complex64 {
    let half = (symbols.len() / 2) as f64;
    symbols
        .iter()
        .enumerate()
        .map(|(i, s)| s * Complex64::from_polar(1.0, -(i as f64 - half) * PI * tau_s * xi))
        .sum()
}

/// `int |f|^2` over the raised-cosine support, split at the roll-off
/// breakpoints so each piece is smooth.
fn rc_norm_sqr(p: &RaisedCosineParams, f: impl Fn(f64) -> f64) -> f64 {
    let lo = (1.0 - p.beta()) / p.tau_s();
    let hi = p.lambda();
    let panels = 64 + 4 * (hi * p.tau_s()) as usize;
    let mut total = composite_gauss(&f, -lo, lo, 4 * panels);
    if hi > lo {
        total += composite_gauss(&f, lo, hi, panels) + composite_gauss(&f, -hi, -lo, panels);
    }
    total
}

/// QPSK-modulated raised-cosine spectrum
/// `rho(xi) = (sum_n s_n exp(-i n pi tau_s xi)) H_rc(xi)`,
/// with the amplitude chosen so that `||rho|| / ||H_rc|| = a_eff`.
///
/// The amplitude of `base` is ignored; the returned parameters carry the
/// amplitude that was used.
pub fn qpsk_spectrum(
    symbols: &[Complex64],
    base: &RaisedCosineParams,
    a_eff: f64,
) -> Result<(ContinuousSpectrum, RaisedCosineParams)> {
    if symbols.is_empty() || !symbols.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "N_sym must be even and positive, got {}",
            symbols.len()
        )));
    }
    if !(a_eff > 0.0 && a_eff.is_finite()) {
        return Err(Error::InvalidInput(format!("A_eff must be > 0, got {a_eff}")));
    }
    let unit = base.with_amplitude(1.0);
    let tau_s = unit.tau_s();
    let syms = symbols.to_vec();
    let mod_norm = rc_norm_sqr(&unit, |xi| (symbol_sum(&syms, tau_s, xi) * unit.eval(xi)).norm_sqr());
    if mod_norm == 0.0 {
        return Ok((ContinuousSpectrum::zero(unit.lambda()), unit));
    }
    let h_norm = rc_norm_sqr(&unit, |xi| unit.eval(xi).powi(2));
    let scaled = unit.with_amplitude(a_eff * (h_norm / mod_norm).sqrt());
    let spec = ContinuousSpectrum::from_fn(scaled.lambda(), true, move |xi| {
        symbol_sum(&syms, tau_s, xi) * scaled.eval(xi)
    })?;
    Ok((spec, scaled))
}

/// `A_eff = ||rho|| / ||H_rc||` for a QPSK spectrum built from `params`,
/// measured against the unit-amplitude raised cosine.
pub fn qpsk_effective_amplitude(symbols: &[Complex64], params: &RaisedCosineParams) -> f64 {
    let tau_s = params.tau_s();
    let unit = params.with_amplitude(1.0);
    let num = rc_norm_sqr(params, |xi| (symbol_sum(symbols, tau_s, xi) * params.eval(xi)).norm_sqr());
    let den = rc_norm_sqr(&unit, |xi| unit.eval(xi).powi(2));
    (num / den).sqrt()
}

fn trapezoid_norm_sqr(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len();
    v.enumerate()
        .map(|(i, x)| if i == 0 || i + 1 == n { 0.5 * x } else { x })
        .sum()
}

fn relative_l2(num: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if num.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "metric inputs differ in length: {} vs {}",
            num.len(),
            reference.len()
        )));
    }
    let den = trapezoid_norm_sqr(reference.iter().map(|v| v.norm_sqr()));
    if den == 0.0 {
        return Err(Error::InvalidInput("reference is identically zero".into()));
    }
    let err = trapezoid_norm_sqr(num.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()));
    Ok((err / den).sqrt())
}

/// Relative `L^2` error of potential samples on a uniform grid, trapezoidal
/// rule.
pub fn metric_q(num: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    relative_l2(num, reference)
}

/// Relative `L^2` error of reflection-coefficient samples on a uniform grid
/// of `Omega_h`, trapezoidal rule.
pub fn metric_rho(num: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    relative_l2(num, reference)
}

/// RMS-relative error of norming constants.
pub fn metric_b(num: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if num.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "metric inputs differ in length: {} vs {}",
            num.len(),
            reference.len()
        )));
    }
    let den: f64 = reference.iter().map(|v| v.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::InvalidInput("reference is identically zero".into()));
    }
    let err: f64 = num.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((err / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sech_bound_state_example() {
        let s = sech_bound_states(0.4, 2).unwrap();
        let z = s.eigenvalues();
        assert!((z[0] - c(0.0, 1.9)).norm() < 1e-15);
        assert!((z[1] - c(0.0, 0.9)).norm() < 1e-15);
        assert_eq!(s.norming_constants(), vec![c(-1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn pure_soliton_has_no_radiation() {
        for k in 0..4 {
            let r = sech_radiative_reflection(0.0, k).unwrap();
            for xi in [-2.0, 0.0, 0.7] {
                assert!(r.eval(xi).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sech_reflection_at_origin() {
        let r = sech_radiative_reflection(0.4, 0).unwrap().eval(0.0);
        let expect = -(0.4 * PI).sin() / (0.1 * PI).sin();
        assert!((r.re - expect).abs() < 1e-12 && r.im.abs() < 1e-12);
        assert!((expect + 3.0777).abs() < 1e-4);
    }

    #[test]
    fn gamma_reflection_on_strip() {
        let v = gamma(c(0.1, 0.0)) * gamma(c(0.9, 0.0));
        let e = PI / (0.1 * PI).sin();
        assert!((v.re - e).abs() / e <= 1e-12);
    }

    #[test]
    fn sech_unitarity() {
        for amp in [0.4, 1.4, 4.4] {
            for i in -40..=40 {
                let xi = i as f64 * 0.1;
                let (a, b) = sech_scattering(amp, xi);
                assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-10, "A={amp} xi={xi}");
            }
        }
        let (a0, _) = sech_scattering(0.4, 0.0);
        assert!((a0.norm() - (0.1 * PI).sin()).abs() < 1e-12);
    }

    #[test]
    fn radiative_part_matches_full_coefficients() {
        // rho_R = a_S b / a for (A_R + K) sech t
        for k in 1..=3 {
            let s = sech_bound_states(0.4, k).unwrap();
            let r = sech_radiative_reflection(0.4, k).unwrap();
            for xi in [-1.3, -0.2, 0.0, 0.5, 2.0] {
                let (a, b) = sech_scattering(0.4 + k as f64, xi);
                let a_s = a_s_eval(c(xi, 0.0), &s).unwrap();
                let expect = a_s * b / a;
                assert!((r.eval(xi) - expect).norm() < 1e-10 * (1.0 + expect.norm()), "K={k} xi={xi}");
            }
        }
    }

    #[test]
    fn sech_potential_samples() {
        let g = TimeGrid::symmetric(40.0, 4000).unwrap();
        let p = sech_potential(0.4, g);
        assert!((p.samples()[2000].re - 0.4).abs() < 1e-15);
        assert!((p.energy() - 2.0 * 0.16).abs() < 1e-6);
        assert!(sech_potential(0.0, g).samples().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn raised_cosine_shape() {
        let p = RaisedCosineParams::new(20.0, 1.0, 0.5).unwrap();
        assert_eq!(p.lambda(), 1.5);
        assert!((p.eval(1.0) - 10.0).abs() < 1e-12);
        assert_eq!(p.eval(0.2), 20.0);
        assert_eq!(p.eval(1.6), 0.0);
        for edge in [0.5, 1.5] {
            let l = p.eval(edge - 1e-15);
            let r = p.eval(edge + 1e-15);
            assert!((l - r).abs() <= 1e-14 * 20.0);
        }
        assert!((p.impulse(0.0) - 20.0 / PI).abs() < 1e-14);
        assert!(RaisedCosineParams::new(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn impulse_removable_point_is_continuous() {
        let p = RaisedCosineParams::new(1.0, 1.0, 0.5).unwrap();
        let t0 = PI / (2.0 * 0.5);
        let mid = p.impulse(t0);
        for d in [1e-9, 1e-6, 1e-4] {
            assert!((p.impulse(t0 + d) - mid).abs() < d);
            assert!((p.impulse(t0 - d) - mid).abs() < d);
        }
        let expect = 1.0 / PI * (t0.sin() / t0) * PI / 4.0;
        assert!((mid - expect).abs() < 1e-15);
    }

    #[test]
    fn impulse_is_inverse_transform_of_shape() {
        let p = RaisedCosineParams::new(3.0, 1.0, 0.5).unwrap();
        for tau in [0.0, 0.7, 2.5, 9.0] {
            // (1/2pi) int H cos(xi tau) d xi, H even
            let v = rc_norm_sqr(&p, |xi| p.eval(xi) * (xi * tau).cos()) / (2.0 * PI);
            assert!((v - p.impulse(tau)).abs() < 1e-10, "tau={tau}");
        }
    }

    #[test]
    fn qpsk_symbols_are_seeded() {
        let a = qpsk_symbols(16, 7).unwrap();
        assert_eq!(a, qpsk_symbols(16, 7).unwrap());
        assert_ne!(a, qpsk_symbols(16, 8).unwrap());
        assert!(a.iter().all(|s| (s.norm() - 1.0).abs() < 1e-15 && (s.re == 0.0 || s.im == 0.0)));
        assert!(qpsk_symbols(3, 0).is_err());
    }

    #[test]
    fn qpsk_amplitude_normalisation() {
        let base = RaisedCosineParams::new(1.0, 1.0, 0.5).unwrap();
        let single = [ZERO, c(1.0, 0.0)];
        assert!((qpsk_effective_amplitude(&single, &base) - 1.0).abs() < 1e-13);
        let syms = qpsk_symbols(16, 3).unwrap();
        let (spec, scaled) = qpsk_spectrum(&syms, &base, 10.0).unwrap();
        let got = qpsk_effective_amplitude(&syms, &scaled);
        assert!((got - 10.0).abs() < 1e-12, "{got}");
        let (one, _) = qpsk_spectrum(&single, &base, 1.0).unwrap();
        for xi in [-1.2, 0.0, 0.8] {
            assert!((one.eval(xi) - c(base.eval(xi), 0.0)).norm() < 1e-12);
        }
        assert!(spec.is_bandlimited());
        let (z, _) = qpsk_spectrum(&[ZERO; 4], &base, 10.0).unwrap();
        assert_eq!(z.eval(0.3), ZERO);
    }

    #[test]
    fn metric_examples() {
        let q = vec![c(1.0, 0.5), c(0.2, -1.0), c(3.0, 0.0)];
        assert_eq!(metric_q(&q, &q).unwrap(), 0.0);
        let scaled: Vec<_> = q.iter().map(|v| v * 1.01).collect();
        assert!((metric_q(&scaled, &q).unwrap() - 0.01).abs() < 1e-14);
        let b = metric_b(&[c(-1.1, 0.0), c(1.0, 0.0)], &[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((b - (0.005f64).sqrt()).abs() < 1e-15);
        assert!(metric_rho(&[ZERO], &[ZERO]).is_err());
        assert!(metric_q(&q, &q[..2]).is_err());
    }
}
