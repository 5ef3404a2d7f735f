//! Nonlinear Fourier spectra: bound states, reflection coefficients and the
//! JSON description used by the command-line tools.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{self, RaisedCosineParams};

type RhoFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// One eigenvalue / norming-constant pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub zeta: Complex64,
    pub b: Complex64,
}

impl BoundState {
    pub fn new(zeta: Complex64, b: Complex64) -> Self {
        Self { zeta, b }
    }
}

/// Discrete spectrum: eigenvalues strictly in the upper half plane, pairwise
/// distinct, with non-zero norming constants.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteSpectrum {
    states: Vec<BoundState>,
}

impl DiscreteSpectrum {
    pub fn new(states: Vec<BoundState>) -> Result<Self> {
        for (k, s) in states.iter().enumerate() {
            if !(s.zeta.im > 0.0) || !s.zeta.re.is_finite() || !s.zeta.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "eigenvalue {k} = {} is not in the upper half plane",
                    s.zeta
                )));
            }
            if s.b.norm() == 0.0 || !s.b.norm().is_finite() {
                return Err(Error::InvalidInput(format!(
                    "norming constant {k} must be finite and non-zero"
                )));
            }
            for (j, t) in states[..k].iter().enumerate() {
                if (t.zeta - s.zeta).norm() <= 1e-12 * (1.0 + s.zeta.norm()) {
                    return Err(Error::InvalidInput(format!(
                        "eigenvalues {j} and {k} coincide"
                    )));
                }
            }
        }
        Ok(Self { states })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BoundState] {
        &self.states
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.states.iter().map(|s| s.zeta).collect()
    }

    pub fn norming_constants(&self) -> Vec<Complex64> {
        self.states.iter().map(|s| s.b).collect()
    }

    /// Evaluates `a_S(zeta) = prod_k (zeta - zeta_k) / (zeta - zeta_k^*)`.
    pub fn a_s(&self, zeta: Complex64) -> Result<Complex64> {
        a_s_eval(zeta, self)
    }
}

/// `prod_k (zeta - zeta_k) / (zeta - zeta_k^*)`; the empty product is 1.
pub fn a_s_eval(zeta: Complex64, s: &DiscreteSpectrum) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (k, st) in s.states.iter().enumerate() {
        let den = zeta - st.zeta.conj();
        if den.norm() <= 1e-14 * (1.0 + st.zeta.norm()) {
            return Err(Error::Pole { index: k });
        }
        acc *= (zeta - st.zeta) / den;
    }
    Ok(acc)
}

/// Reflection coefficient `rho(xi)` with a bandlimit `Lambda`.
///
/// When `bandlimited` is set the spectrum is identically zero outside
/// `[-Lambda, Lambda]`; otherwise `Lambda` is only the range where the
/// function is considered numerically significant.
#[derive(Clone)]
pub struct ContinuousSpectrum {
    f: Arc<RhoFn>,
    lambda: f64,
    bandlimited: bool,
}

impl fmt::Debug for ContinuousSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousSpectrum")
            .field("lambda", &self.lambda)
            .field("bandlimited", &self.bandlimited)
            .finish()
    }
}

impl ContinuousSpectrum {
    pub fn from_fn(
        lambda: f64,
        bandlimited: bool,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("bandlimit must be > 0, got {lambda}")));
        }
        Ok(Self {
            f: Arc::new(f),
            lambda,
            bandlimited,
        })
    }

    /// `rho == 0`.
    pub fn zero(lambda: f64) -> Self {
        Self {
            f: Arc::new(|_| Complex64::new(0.0, 0.0)),
            lambda,
            bandlimited: true,
        }
    }

    /// Uniform samples `rho(-Lambda + 2 Lambda j / L)`, `j = 0..L`, treated as
    /// one period of a trigonometric polynomial (evaluated through its
    /// Fourier sum).
    pub fn from_samples(lambda: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Ok(Self::zero(lambda));
        }
        let l = values.len();
        // Fourier coefficients c_k with k in [-(L/2), L - L/2)
        let lo = -((l / 2) as i64);
        let coeffs: Vec<(f64, Complex64)> = (0..l as i64)
            .map(|i| {
                let k = lo + i;
                let mut c = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let ang = -2.0 * PI * (k as f64) * (j as f64) / l as f64;
                    c += v * Complex64::from_polar(1.0, ang);
                }
                (k as f64, c / l as f64)
            })
            .collect();
        Self::from_fn(lambda, true, move |xi| {
            let u = (xi + lambda) / (2.0 * lambda);
            coeffs
                .iter()
                .map(|&(k, c)| c * Complex64::from_polar(1.0, 2.0 * PI * k * u))
                .sum()
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_bandlimited(&self) -> bool {
        self.bandlimited
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        if self.bandlimited && xi.abs() > self.lambda {
            return Complex64::new(0.0, 0.0);
        }
        (self.f)(xi)
    }

    /// Pointwise product with a function of `xi`; support and bandlimit are
    /// unchanged.
    pub fn map(&self, g: impl Fn(f64, Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        let f = Arc::clone(&self.f);
        Self {
            f: Arc::new(move |xi| g(xi, f(xi))),
            lambda: self.lambda,
            bandlimited: self.bandlimited,
        }
    }
}

/// `rho_R(xi) = a_S(xi) rho(xi)`, the reflection coefficient of the
/// radiative part.
pub fn radiative_reflection(rho: &ContinuousSpectrum, s: &DiscreteSpectrum) -> ContinuousSpectrum {
    if s.is_empty() {
        return rho.clone();
    }
    let s = s.clone();
    rho.map(move |xi, r| {
        // a_S has no poles on the real axis
        r * a_s_eval(Complex64::new(xi, 0.0), &s).unwrap_or(Complex64::new(1.0, 0.0))
    })
}

/// Full nonlinear Fourier spectrum.
#[derive(Debug, Clone)]
pub struct NFSpectrum {
    pub discrete: DiscreteSpectrum,
    pub continuous: ContinuousSpectrum,
}

impl NFSpectrum {
    pub fn new(discrete: DiscreteSpectrum, continuous: ContinuousSpectrum) -> Self {
        Self {
            discrete,
            continuous,
        }
    }

    /// No bound states and `rho == 0`.
    pub fn empty() -> Self {
        Self::new(DiscreteSpectrum::empty(), ContinuousSpectrum::zero(1.0))
    }

    pub fn lambda(&self) -> f64 {
        self.continuous.lambda()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpectrumFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        file.build()
    }
}

fn pair(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// JSON description of a spectrum:
/// `{"bound_states":[{"zeta":[re,im],"b":[re,im]}], "rho":{"kind":...}, "Lambda":x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    #[serde(default)]
    pub bound_states: Vec<BoundStateEntry>,
    pub rho: RhoEntry,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundStateEntry {
    pub zeta: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RhoEntry {
    /// Uniform samples on `[-Lambda, Lambda)`; an empty list is `rho == 0`.
    #[serde(rename = "samples")]
    Samples {
        #[serde(default)]
        values: Vec<[f64; 2]>,
    },
    /// Reflection coefficient of `(A_R + K) sech t`, divided by `a_S` of the
    /// listed bound states.
    #[serde(rename = "sech")]
    Sech {
        #[serde(rename = "A_R")]
        a_r: f64,
        #[serde(rename = "K", default)]
        k: usize,
    },
    #[serde(rename = "rc")]
    Rc {
        #[serde(rename = "A")]
        a: f64,
        tau_s: f64,
        beta: f64,
    },
    /// QPSK-modulated raised cosine. Symbols are either listed or drawn from
    /// a seeded generator.
    #[serde(rename = "qpsk-rc")]
    QpskRc {
        tau_s: f64,
        beta: f64,
        #[serde(rename = "A_eff")]
        a_eff: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symbols: Option<Vec<[f64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_sym: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl SpectrumFile {
    pub fn build(&self) -> Result<NFSpectrum> {
        let discrete = DiscreteSpectrum::new(
            self.bound_states
                .iter()
                .map(|e| BoundState::new(pair(e.zeta), pair(e.b)))
                .collect(),
        )?;
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return Err(Error::InvalidInput(format!("Lambda must be > 0, got {l}")));
            }
        }
        let continuous = match &self.rho {
            RhoEntry::Samples { values } => {
                let lambda = self.lambda.unwrap_or(1.0);
                ContinuousSpectrum::from_samples(lambda, values.iter().copied().map(pair).collect())?
            }
            RhoEntry::Sech { a_r, k } => {
                let rho_r = signals::sech_radiative_reflection(*a_r, *k)?;
                let s = discrete.clone();
                let lambda = self.lambda.unwrap_or(rho_r.lambda());
                let rho = rho_r.map(move |xi, r| {
                    r / a_s_eval(Complex64::new(xi, 0.0), &s).unwrap_or(Complex64::new(1.0, 0.0))
                });
                ContinuousSpectrum::from_fn(lambda, false, move |xi| rho.eval(xi))?
            }
            RhoEntry::Rc { a, tau_s, beta } => {
                signals::rc_spectrum(&RaisedCosineParams::new(*a, *tau_s, *beta)?)
            }
            RhoEntry::QpskRc {
                tau_s,
                beta,
                a_eff,
                symbols,
                n_sym,
                seed,
            } => {
                let symbols: Vec<Complex64> = match (symbols, n_sym) {
                    (Some(s), _) => s.iter().copied().map(pair).collect(),
                    (None, Some(n)) => signals::qpsk_symbols(*n, seed.unwrap_or(0))?,
                    (None, None) => {
                        return Err(Error::InvalidInput(
                            "qpsk-rc needs either `symbols` or `n_sym`".into(),
                        ))
                    }
                };
                let base = RaisedCosineParams::new(1.0, *tau_s, *beta)?;
                signals::qpsk_spectrum(&symbols, &base, *a_eff)?.0
            }
        };
        Ok(NFSpectrum::new(discrete, continuous))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_product_is_one() {
        let s = DiscreteSpectrum::empty();
        assert_eq!(s.a_s(c(0.3, 0.2)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn single_eigenvalue_at_origin_gives_minus_one() {
        let s = DiscreteSpectrum::new(vec![BoundState::new(c(0.0, 0.9), c(-1.0, 0.0))]).unwrap();
        assert!((s.a_s(c(0.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_eigenvalues_match_direct_product() {
        let s = DiscreteSpectrum::new(vec![
            BoundState::new(c(0.0, 0.9), c(-1.0, 0.0)),
            BoundState::new(c(0.0, 1.9), c(1.0, 0.0)),
        ])
        .unwrap();
        let x = c(1.0, 0.0);
        let direct = (x - c(0.0, 0.9)) / (x + c(0.0, 0.9)) * (x - c(0.0, 1.9)) / (x + c(0.0, 1.9));
        assert!((s.a_s(x).unwrap() - direct).norm() < 1e-15);
        // frozen from an independent evaluation of the product
        let frozen = c(-0.879_172_109_634_352_4, 0.476_504_356_371_567_9);
        assert!((direct - frozen).norm() < 1e-12, "{direct}");
    }

    #[test]
    fn pole_is_reported() {
        let s = DiscreteSpectrum::new(vec![BoundState::new(c(0.0, 0.5), c(1.0, 0.0))]).unwrap();
        assert_eq!(s.a_s(c(0.0, -0.5)), Err(Error::Pole { index: 0 }));
    }

    #[test]
    fn invalid_discrete_spectra_are_rejected() {
        assert!(DiscreteSpectrum::new(vec![BoundState::new(c(0.0, -0.5), c(1.0, 0.0))]).is_err());
        assert!(DiscreteSpectrum::new(vec![BoundState::new(c(0.0, 0.5), c(0.0, 0.0))]).is_err());
        assert!(DiscreteSpectrum::new(vec![
            BoundState::new(c(0.0, 0.5), c(1.0, 0.0)),
            BoundState::new(c(0.0, 0.5), c(2.0, 0.0)),
        ])
        .is_err());
    }

    #[test]
    fn radiative_reflection_flips_sign_at_origin() {
        let rho = ContinuousSpectrum::from_fn(2.0, true, |_| c(-3.0777, 0.0)).unwrap();
        let s = DiscreteSpectrum::new(vec![BoundState::new(c(0.0, 0.9), c(-1.0, 0.0))]).unwrap();
        let r = radiative_reflection(&rho, &s);
        assert!((r.eval(0.0) - c(3.0777, 0.0)).norm() < 1e-12);
        for &xi in &[-1.5, -0.2, 0.7, 1.9] {
            assert!((r.eval(xi).norm() - 3.0777).abs() < 1e-12);
        }
        assert_eq!(r.eval(2.5), c(0.0, 0.0));
    }

    #[test]
    fn sampled_spectrum_interpolates_its_nodes() {
        let lambda = 1.5;
        let l = 16;
        let vals: Vec<Complex64> = (0..l)
            .map(|j| {
                let xi = -lambda + 2.0 * lambda * j as f64 / l as f64;
                c((PI * xi / lambda).cos(), 0.5 * (2.0 * PI * xi / lambda).sin())
            })
            .collect();
        let rho = ContinuousSpectrum::from_samples(lambda, vals.clone()).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let xi = -lambda + 2.0 * lambda * j as f64 / l as f64;
            assert!((rho.eval(xi) - v).norm() < 1e-12);
        }
        // band-limited trigonometric content is reproduced between nodes too
        let xi = 0.123;
        let expect = c((PI * xi / lambda).cos(), 0.5 * (2.0 * PI * xi / lambda).sin());
        assert!((rho.eval(xi) - expect).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip_of_file_model() {
        let text = r#"{"bound_states":[{"zeta":[0,0.9],"b":[-1,0]}],
                       "rho":{"kind":"rc","A":20,"tau_s":1,"beta":0.5}}"#;
        let file: SpectrumFile = serde_json::from_str(text).unwrap();
        let again: SpectrumFile =
            serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(file, again);
        let spec = file.build().unwrap();
        assert_eq!(spec.discrete.len(), 1);
        assert!((spec.lambda() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn empty_sample_list_is_zero_spectrum() {
        let spec = NFSpectrum::from_json(r#"{"rho":{"kind":"samples"}}"#).unwrap();
        assert!(spec.discrete.is_empty());
        assert_eq!(spec.continuous.eval(0.1), c(0.0, 0.0));
    }
}
