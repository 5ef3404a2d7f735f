//! Computational-domain estimates: tail-energy bounds from the impulse
//! response, closed forms for the raised cosine, and heuristics for sech,
//! QPSK and soliton-bearing spectra.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::composite_gauss;
use crate::signals::RaisedCosineParams;
use crate::spectrum::DiscreteSpectrum;

/// Tail integrals `I_1`, `I_2` and the resulting bound `2 I_2^2 / (1 - I_1^2)`
/// on the energy of the potential beyond `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsteinBound {
    pub i1: f64,
    pub i2: f64,
    /// `None` when `I_1 >= 1` and the bound does not apply.
    pub bound: Option<f64>,
}

/// Quadrature controls for the tail integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuadrature {
    /// Panel width; should resolve the oscillations of `p`.
    pub panel: f64,
    /// Stop once the extrapolated remaining tail is below this fraction of
    /// the accumulated integral.
    pub rel_tol: f64,
    /// Stop once the integrand has fallen below this fraction of its value
    /// at the start of the tail.
    pub floor: f64,
}

impl Default for TailQuadrature {
    fn default() -> Self {
        Self {
            panel: 1.0,
            rel_tol: 1e-7,
            floor: 1e-18,
        }
    }
}

const CHUNK_GROWTH: f64 = 1.5;
const MAX_CHUNKS: usize = 200;

/// `int_a^inf f`, for non-negative `f`, over geometrically growing chunks,
/// each integrated by composite Gauss-Legendre on panels of fixed width.
/// After each chunk the remaining tail is extrapolated from the ratio of
/// the last two chunk integrals and added once the stopping test passes.
fn tail_integral(f: &dyn Fn(f64) -> f64, a: f64, opts: &TailQuadrature) -> Result<f64> {
    let mut start = a;
    let mut width = a.abs().max(1.0) * (CHUNK_GROWTH - 1.0);
    let mut total = 0.0;
    let mut prev_chunk: Option<f64> = None;
    let mut reference = 0.0f64;
    for _ in 0..MAX_CHUNKS {
        let end = start + width;
        let panels = ((width / opts.panel).ceil() as usize).max(1);
        let chunk = composite_gauss(f, start, end, panels);
        if !chunk.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{start}, {end}]")));
        }
        let peak = (0..=panels)
            .map(|i| f(start + i as f64 * width / panels as f64))
            .fold(0.0, f64::max);
        if reference == 0.0 {
            reference = peak;
        }
        total += chunk;
        if reference == 0.0 || peak <= opts.floor * reference {
            return Ok(total);
        }
        if let Some(p) = prev_chunk {
            if p > 0.0 && chunk < p {
                let r = chunk / p;
                let tail = chunk * r / (1.0 - r);
                if tail <= opts.rel_tol * total {
                    return Ok(total + tail);
                }
            }
        }
        prev_chunk = Some(chunk);
        start = end;
        width *= CHUNK_GROWTH;
    }
    Err(Error::Quadrature(format!(
        "tail integral from {a} did not settle after {MAX_CHUNKS} chunks"
    )))
}

/// Tail bound at `T` for the impulse response `p`, with default quadrature.
pub fn epstein_bound(p: &dyn Fn(f64) -> f64, t: f64) -> Result<EpsteinBound> {
    epstein_bound_with(p, t, &TailQuadrature::default())
}

/// `I_m(T) = [int_{2T}^inf |p(-tau)|^m d tau]^{1/m}`, `m = 1, 2`.
pub fn epstein_bound_with(p: &dyn Fn(f64) -> f64, t: f64, opts: &TailQuadrature) -> Result<EpsteinBound> {
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("T must be finite, got {t}")));
    }
    let i1 = tail_integral(&|tau| p(-tau).abs(), 2.0 * t, opts)?;
    let i2sq = tail_integral(&|tau| p(-tau).powi(2), 2.0 * t, opts)?;
    let bound = (i1 < 1.0).then(|| 2.0 * i2sq / (1.0 - i1 * i1));
    Ok(EpsteinBound {
        i1,
        i2: i2sq.sqrt(),
        bound,
    })
}

/// Upper limit of the search for [`find_t`].
pub const FIND_T_CAP: f64 = 1e6;

/// Relative bisection tolerance of [`find_t`].
pub const FIND_T_TOL: f64 = 1e-3;

/// Smallest `T` (to relative tolerance `1e-3`, rounded up) whose tail bound
/// is at most `eps`.
pub fn find_t(p: &dyn Fn(f64) -> f64, eps: f64) -> Result<f64> {
    find_t_with(p, eps, &TailQuadrature::default())
}

pub fn find_t_with(p: &dyn Fn(f64) -> f64, eps: f64, opts: &TailQuadrature) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let ok = |t: f64| -> Result<bool> {
        Ok(matches!(epstein_bound_with(p, t, opts)?.bound, Some(b) if b <= eps))
    };
    if ok(0.0)? {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !ok(hi)? {
        hi *= 2.0;
        if hi > FIND_T_CAP {
            return Err(Error::NotAchievable(format!(
                "tail bound stays above {eps} up to T = {FIND_T_CAP}"
            )));
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > FIND_T_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Closed-form `T(eps)` for the raised cosine from the large-`T` behaviour
/// of its impulse response: `0.5 (pi^2 A^2 tau_s^4 / (40 beta^4 eps))^{1/5}`.
pub fn rc_t_estimate(a: f64, tau_s: f64, beta: f64, eps: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidInput(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(eps > 0.0 && a > 0.0 && tau_s > 0.0) {
        return Err(Error::InvalidInput("A, tau_s and eps must be positive".into()));
    }
    Ok(0.5 * (PI * PI * a * a * tau_s.powi(4) / (40.0 * beta.powi(4) * eps)).powf(0.2))
}

/// [`rc_t_estimate`] for a parameter set.
pub fn rc_t_estimate_for(params: &RaisedCosineParams, eps: f64) -> Result<f64> {
    rc_t_estimate(params.amplitude(), params.tau_s(), params.beta(), eps)
}

/// `T = log(2 A_R / eps)` for `A_R sech t`.
pub fn sech_domain(a_r: f64, eps: f64) -> Result<f64> {
    if !(a_r > 0.0 && a_r < 0.5) {
        return Err(Error::InvalidInput(format!("A_R must lie in (0, 0.5), got {a_r}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    Ok((2.0 * a_r / eps).ln())
}

/// Window factor `W = 5 log2 N_sym`.
pub fn qpsk_window_factor(n_sym: usize) -> f64 {
    5.0 * (n_sym as f64).log2()
}

/// Domain for a QPSK-modulated raised cosine: `T_2 = T(eps) + pi tau_s N_sym / 4`
/// and `T_1 = -W T_2`.
pub fn qpsk_domain(n_sym: usize, tau_s: f64, t_eps: f64) -> Result<(f64, f64)> {
    if n_sym == 0 || !n_sym.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("N_sym must be even and positive, got {n_sym}")));
    }
    if !(tau_s > 0.0) || !t_eps.is_finite() {
        return Err(Error::InvalidInput("tau_s must be > 0 and T(eps) finite".into()));
    }
    let t2 = t_eps + PI * tau_s * n_sym as f64 / 4.0;
    Ok((-qpsk_window_factor(n_sym) * t2, t2))
}

/// Default multiplier in [`soliton_domain`].
pub const SOLITON_MULTIPLIER: f64 = 30.0;

/// `kappa = 2 (sum Im zeta_k)^{1/2}` and `T = multiplier kappa / min Im zeta_k`.
pub fn soliton_domain(s: &DiscreteSpectrum, multiplier: f64) -> Result<(f64, f64)> {
    if s.is_empty() {
        return Err(Error::InvalidInput("soliton domain needs at least one eigenvalue".into()));
    }
    let ims: Vec<f64> = s.eigenvalues().iter().map(|z| z.im).collect();
    let kappa = 2.0 * ims.iter().sum::<f64>().sqrt();
    let min = ims.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((kappa, multiplier * kappa / min))
}
