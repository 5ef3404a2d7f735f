//! Discrete forward scattering.
//!
//! Two discretisations are provided: the exponential trapezoidal rule (TR),
//! whose transfer matrices are 2x2 and of degree one in `z^2`, and the
//! exponential `m`-step implicit Adams schemes IA_m, `m = 1, 2, 3`, whose
//! block transfer matrices are `2m x 2m`. IA_1 coincides with TR.
//!
//! With `w = z^2 = exp(2 i zeta h)`, the Jost solution on the grid is
//! `phi_n = exp(-i zeta t_n) P_n(w)` and after `N` layers
//! `a_N = P_1(w)`, `b_N = w^{-ell_+} P_2(w)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{horner, JostPolynomialPair, SampledPotential, TimeGrid};
use crate::polyops::{fft_inverse, tree_product, tree_product_capped, PolyMatrix};
use crate::Mode;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Weight of the trapezoidal scaling `Q_n = (h/2) q_n`.
pub const TR_WEIGHT: f64 = 0.5;

/// Discretisation used for forward scattering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Trapezoidal,
    ImplicitAdams(usize),
}

impl Scheme {
    pub fn steps(&self) -> usize {
        match self {
            Scheme::Trapezoidal => 1,
            Scheme::ImplicitAdams(m) => *m,
        }
    }
}

/// Coefficients `beta_0..beta_m` of the `m`-step implicit Adams method.
#[derive(Debug, Clone, PartialEq)]
pub struct IACoefficients {
    m: usize,
    beta: Vec<f64>,
    order: usize,
}

impl IACoefficients {
    pub fn new(m: usize) -> Result<Self> {
        let beta = match m {
            1 => vec![0.5, 0.5],
            2 => vec![-1.0 / 12.0, 8.0 / 12.0, 5.0 / 12.0],
            3 => vec![1.0 / 24.0, -5.0 / 24.0, 19.0 / 24.0, 9.0 / 24.0],
            _ => {
                return Err(Error::InvalidInput(format!(
                    "implicit Adams needs m in 1..=3, got {m}"
                )))
            }
        };
        Ok(Self { m, beta, order: m + 1 })
    }

    pub fn steps(&self) -> usize {
        self.m
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Order of convergence of the scheme.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `beta_s / beta_m`.
    pub fn beta_bar(&self, s: usize) -> f64 {
        self.beta[s] / self.beta[self.m]
    }

    /// Weight `beta_m` in `Q_n = h beta_m q_n`.
    pub fn weight(&self) -> f64 {
        self.beta[self.m]
    }
}

fn check_admissible(q: &[Complex64]) -> Result<()> {
    for (i, v) in q.iter().enumerate() {
        let mag = v.norm();
        if !(mag < 1.0) {
            return Err(Error::Inadmissible { index: i, magnitude: mag });
        }
    }
    Ok(())
}

/// Trapezoidal-rule transfer matrix of one layer, with prefactor `z^{-1}`:
///
/// `(1/Theta_{n+1}) [[1 + w Q_{n+1} R_n, w Q_{n+1} + Q_n], [R_{n+1} + w R_n, R_{n+1} Q_n + w]]`.
pub fn tr_transfer_matrix(
    q_n: Complex64,
    r_n: Complex64,
    q_np1: Complex64,
    r_np1: Complex64,
) -> Result<PolyMatrix> {
    let theta = ONE - q_np1 * r_np1;
    if theta.norm() == 0.0 {
        return Err(Error::SingularLayer { index: 0 });
    }
    let s = ONE / theta;
    PolyMatrix::new(
        2,
        2,
        vec![
            vec![s, q_np1 * r_n * s],
            vec![q_n * s, q_np1 * s],
            vec![r_np1 * s, r_n * s],
            vec![r_np1 * q_n * s, s],
        ],
    )
    .map(|m| m.with_prefactor(1))
}

/// Scheme-local scaled samples `Q_n = weight h q_n` with `Q_0 = 0`, checked
/// for admissibility.
fn scaled_samples(p: &SampledPotential, weight: f64) -> Result<Vec<Complex64>> {
    let mut q = p.scaled(weight);
    q[0] = ZERO;
    check_admissible(&q)?;
    Ok(q)
}

/// Forward scattering with the trapezoidal rule. The first sample is treated
/// as zero.
pub fn forward_scatter_tr(p: &SampledPotential, mode: Mode) -> Result<JostPolynomialPair> {
    let q = scaled_samples(p, TR_WEIGHT)?;
    let n = p.grid().n();
    match mode {
        Mode::Sequential => {
            let mut p1 = vec![ZERO; n + 1];
            let mut p2 = vec![ZERO; n + 1];
            p1[0] = ONE;
            for j in 0..n {
                let (q0, q1) = (q[j], q[j + 1]);
                let (r0, r1) = (-q0.conj(), -q1.conj());
                let s = ONE / (ONE - q1 * r1);
                let a10 = q1 * r0;
                let b0 = q0;
                let c0 = r1;
                let d0 = r1 * q0;
                // new[k] = M0 P[k] + M1 P[k-1], descending so P[k-1] is old
                for k in (0..=j + 1).rev() {
                    let (x, y) = (p1[k], p2[k]);
                    let (xm, ym) = if k > 0 { (p1[k - 1], p2[k - 1]) } else { (ZERO, ZERO) };
                    p1[k] = (x + b0 * y + a10 * xm + q1 * ym) * s;
                    p2[k] = (c0 * x + d0 * y + r0 * xm + ym) * s;
                }
            }
            JostPolynomialPair::new(p1, p2)
        }
        Mode::Fast => {
            let ms = (0..n)
                .map(|j| {
                    tr_transfer_matrix(q[j], -q[j].conj(), q[j + 1], -q[j + 1].conj())
                        .map_err(|_| Error::SingularLayer { index: j + 1 })
                })
                .collect::<Result<Vec<_>>>()?;
            let prod = tree_product(&ms, 2)?;
            let mut p1 = prod.entry(0, 0).to_vec();
            let mut p2 = prod.entry(1, 0).to_vec();
            p1.resize(n + 1, ZERO);
            p2.resize(n + 1, ZERO);
            JostPolynomialPair::new(p1, p2)
        }
    }
}

/// Numerical entries of the first block row of the IA_m transfer matrix,
/// either as polynomials in `w` (coefficient vectors) or evaluated.
struct IaBlockRow {
    /// `blocks[j]` is the 2x2 block multiplying `P_{n+m-1-j}`, row-major,
    /// each entry a coefficient vector of length `m + 1`.
    blocks: Vec<[Vec<Complex64>; 4]>,
}

fn ia_block_row(window: &[Complex64], coeffs: &IACoefficients) -> Result<IaBlockRow> {
    let m = coeffs.steps();
    // window holds Q_n..Q_{n+m}, already scaled by h beta_m
    let qm = window[m];
    let rm = -qm.conj();
    let theta = ONE - qm * rm;
    if theta.norm() == 0.0 {
        return Err(Error::SingularLayer { index: 0 });
    }
    let s = ONE / theta;
    let mut blocks = Vec::with_capacity(m);
    let bb = coeffs.beta_bar(m - 1);
    let q1 = window[m - 1];
    let r1 = -q1.conj();
    let e = |len: usize| vec![ZERO; len];
    let len = m + 1;
    let mut b00 = e(len);
    let mut b01 = e(len);
    let mut b10 = e(len);
    let mut b11 = e(len);
    b00[0] = s;
    b00[1] = bb * r1 * qm * s;
    b01[0] = bb * q1 * s;
    b01[1] = qm * s;
    b10[0] = rm * s;
    b10[1] = bb * r1 * s;
    b11[0] = bb * rm * q1 * s;
    b11[1] = s;
    blocks.push([b00, b01, b10, b11]);
    for j in 1..m {
        // block j multiplies P_{n+m-1-j}; sample index n+s with s = m-1-j
        let sidx = m - 1 - j;
        let bbar = coeffs.beta_bar(sidx);
        let qs = window[sidx];
        let rs = -qs.conj();
        let mut c00 = e(len);
        let mut c01 = e(len);
        let mut c10 = e(len);
        let mut c11 = e(len);
        c00[j + 1] = bbar * rs * qm * s;
        c01[0] = bbar * qs * s;
        c10[j + 1] = bbar * rs * s;
        c11[0] = bbar * rm * qs * s;
        blocks.push([c00, c01, c10, c11]);
    }
    Ok(IaBlockRow { blocks })
}

/// Block transfer matrix `M_{n+m}(z^2)` of the `m`-step implicit Adams
/// scheme, built from the raw samples `q_n..q_{n+m}` of one window.
///
/// Samples are scaled as `Q = h beta_m q` (not the trapezoidal `h/2`).
pub fn ia_block_transfer(
    window: &[Complex64],
    h: f64,
    coeffs: &IACoefficients,
) -> Result<PolyMatrix> {
    let m = coeffs.steps();
    if window.len() != m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "IA_{m} window needs {} samples, got {}",
            m + 1,
            window.len()
        )));
    }
    let scaled: Vec<Complex64> = window.iter().map(|v| v * (h * coeffs.weight())).collect();
    ia_block_transfer_scaled(&scaled, coeffs)
}

fn ia_block_transfer_scaled(scaled: &[Complex64], coeffs: &IACoefficients) -> Result<PolyMatrix> {
    let m = coeffs.steps();
    let size = 2 * m;
    let row = ia_block_row(scaled, coeffs)?;
    let mut entries = vec![vec![ZERO]; size * size];
    for (j, blk) in row.blocks.into_iter().enumerate() {
        let [a, b, c, d] = blk;
        entries[2 * j] = a;
        entries[2 * j + 1] = b;
        entries[size + 2 * j] = c;
        entries[size + 2 * j + 1] = d;
    }
    for i in 1..m {
        // identity block at (i, i-1)
        entries[(2 * i) * size + 2 * (i - 1)] = vec![ONE];
        entries[(2 * i + 1) * size + 2 * (i - 1) + 1] = vec![ONE];
    }
    PolyMatrix::new(size, size, entries)
}

/// Scaled samples for IA_m with `m - 1` virtual zeros prepended and `Q_0 = 0`.
fn ia_padded(p: &SampledPotential, coeffs: &IACoefficients) -> Result<Vec<Complex64>> {
    let q = scaled_samples(p, coeffs.weight())?;
    let mut padded = vec![ZERO; coeffs.steps() - 1];
    padded.extend(q);
    Ok(padded)
}

/// Forward scattering with the exponential `m`-step implicit Adams scheme.
pub fn forward_scatter_ia(p: &SampledPotential, m: usize, mode: Mode) -> Result<JostPolynomialPair> {
    let coeffs = IACoefficients::new(m)?;
    let q = ia_padded(p, &coeffs)?;
    let n = p.grid().n();
    match mode {
        Mode::Sequential => {
            // history[j] = P_{current - j}, j = 0..m
            let mut history: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..m)
                .map(|_| {
                    let mut a = vec![ZERO; n + 1];
                    a[0] = ONE;
                    (a, vec![ZERO; n + 1])
                })
                .collect();
            for step in 1..=n {
                // window q_{step-m}..q_{step} lives at padded indices step-1..step+m-1
                let row = ia_block_row(&q[step - 1..step + m], &coeffs)
                    .map_err(|_| Error::SingularLayer { index: step })?;
                let mut n1 = vec![ZERO; n + 1];
                let mut n2 = vec![ZERO; n + 1];
                let top = step.min(n);
                for (j, blk) in row.blocks.iter().enumerate() {
                    let (x1, x2) = &history[j];
                    for (shift, ((a, b), (c, d))) in blk[0]
                        .iter()
                        .zip(&blk[1])
                        .zip(blk[2].iter().zip(&blk[3]))
                        .enumerate()
                    {
                        if *a == ZERO && *b == ZERO && *c == ZERO && *d == ZERO {
                            continue;
                        }
                        for k in shift..=top {
                            let (u, v) = (x1[k - shift], x2[k - shift]);
                            n1[k] += a * u + b * v;
                            n2[k] += c * u + d * v;
                        }
                    }
                }
                history.pop();
                history.insert(0, (n1, n2));
            }
            let (p1, p2) = history.swap_remove(0);
            JostPolynomialPair::new(p1, p2)
        }
        Mode::Fast => {
            let ms = (1..=n)
                .map(|step| {
                    ia_block_transfer_scaled(&q[step - 1..step + m], &coeffs)
                        .map_err(|_| Error::SingularLayer { index: step })
                })
                .collect::<Result<Vec<_>>>()?;
            // block (i, j) of a product of k factors has degree <= k - i + j
            let prod = tree_product_capped(&ms, 2 * m, &|k| k + m)?;
            let mut p1 = vec![ZERO; n + 1];
            let mut p2 = vec![ZERO; n + 1];
            for j in 0..m {
                for (k, (a, c)) in prod
                    .entry(0, 2 * j)
                    .iter()
                    .zip(prod.entry(1, 2 * j))
                    .enumerate()
                    .take(n + 1)
                {
                    p1[k] += a;
                    p2[k] += c;
                }
            }
            JostPolynomialPair::new(p1, p2)
        }
    }
}

/// Forward scattering with any supported scheme.
pub fn forward_scatter(p: &SampledPotential, scheme: Scheme, mode: Mode) -> Result<JostPolynomialPair> {
    match scheme {
        Scheme::Trapezoidal => forward_scatter_tr(p, mode),
        Scheme::ImplicitAdams(m) => forward_scatter_ia(p, m, mode),
    }
}

/// Discrete scattering coefficients `(a_N, b_N)` at a (possibly complex)
/// spectral parameter, by Horner evaluation.
pub fn scattering_at(pair: &JostPolynomialPair, grid: &TimeGrid, zeta: Complex64) -> (Complex64, Complex64) {
    let w = (Complex64::i() * 2.0 * zeta * grid.h()).exp();
    let (a, p2) = pair.eval(w);
    let phase = (-Complex64::i() * 2.0 * zeta * grid.t2()).exp();
    (a, p2 * phase)
}

/// Reflection coefficient sampled on `xi_j = j pi / (2 M h)`, `j = -M..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionSamples {
    pub xi: Vec<f64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub rho: Vec<Complex64>,
    /// Indices where `|a_N|` was too small to divide by; `rho` is zero there.
    pub flagged: Vec<usize>,
}

/// Threshold on `|a_N|` below which a reflection sample is flagged.
pub const A_FLOOR: f64 = 1e-14;

/// Values of a polynomial at `exp(i pi j / M)`, `j = -M..M`, via one inverse
/// transform of length `2M`.
pub(crate) fn eval_on_circle(c: &[Complex64], m: usize) -> Vec<Complex64> {
    let len = 2 * m;
    let mut buf = vec![ZERO; len];
    for (k, v) in c.iter().enumerate() {
        buf[k % len] += v;
    }
    fft_inverse(len).process(&mut buf);
    // buf[j mod 2M] = sum_k c_k exp(2 pi i j k / 2M)
    (0..len)
        .map(|i| {
            let j = i as i64 - m as i64;
            buf[j.rem_euclid(len as i64) as usize]
        })
        .collect()
}

pub fn reflection_samples(pair: &JostPolynomialPair, grid: &TimeGrid, m: usize) -> Result<ReflectionSamples> {
    if m == 0 {
        return Err(Error::InvalidInput("need M >= 1 reflection samples".into()));
    }
    let h = grid.h();
    let a = eval_on_circle(&pair.p1, m);
    let p2 = eval_on_circle(&pair.p2, m);
    let mut xi = Vec::with_capacity(2 * m);
    let mut b = Vec::with_capacity(2 * m);
    let mut rho = Vec::with_capacity(2 * m);
    let mut flagged = Vec::new();
    for (i, (&av, &pv)) in a.iter().zip(&p2).enumerate() {
        let x = (i as f64 - m as f64) * PI / (2.0 * m as f64 * h);
        let bv = pv * Complex64::from_polar(1.0, -2.0 * x * grid.t2());
        xi.push(x);
        b.push(bv);
        if av.norm() < A_FLOOR {
            flagged.push(i);
            rho.push(ZERO);
        } else {
            rho.push(bv / av);
        }
    }
    Ok(ReflectionSamples { xi, a, b, rho, flagged })
}

/// Log-scaled solution values: `value_n = exp(log_scale[n]) * vec[n]`.
#[derive(Debug, Clone)]
pub struct ScaledTrajectory {
    pub vec: Vec<[Complex64; 2]>,
    pub log_scale: Vec<Complex64>,
}

impl ScaledTrajectory {
    pub fn len(&self) -> usize {
        self.vec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vec.is_empty()
    }
}

/// Left Jost solution `phi(t_n; zeta)` at every node, propagated pointwise
/// with the given scheme and kept in log-scaled form so that
/// exponentially growing or decaying solutions stay representable.
pub fn jost_left(p: &SampledPotential, zeta: Complex64, scheme: Scheme) -> Result<ScaledTrajectory> {
    let m = scheme.steps();
    let coeffs = IACoefficients::new(m)?;
    let q = ia_padded(p, &coeffs)?;
    let grid = p.grid();
    let n = grid.n();
    let w = (Complex64::i() * 2.0 * zeta * grid.h()).exp();
    let wpow: Vec<Complex64> = (0..=m).scan(ONE, |acc, _| {
        let v = *acc;
        *acc *= w;
        Some(v)
    }).collect();
    // history[j] = P_{current - j}, common scale exp(log)
    let mut history = vec![[ONE, ZERO]; m];
    let mut log = ZERO;
    let mut vec = Vec::with_capacity(n + 1);
    let mut log_scale = Vec::with_capacity(n + 1);
    let phase = |t: f64| -Complex64::i() * zeta * t;
    vec.push(history[0]);
    log_scale.push(phase(grid.node(0)));
    for step in 1..=n {
        let row = ia_block_row(&q[step - 1..step + m], &coeffs)
            .map_err(|_| Error::SingularLayer { index: step })?;
        let mut next = [ZERO, ZERO];
        for (blk, x) in row.blocks.iter().zip(&history) {
            let ev = |c: &Vec<Complex64>| -> Complex64 {
                c.iter().zip(&wpow).map(|(a, b)| a * b).sum()
            };
            let (a, b, c, d) = (ev(&blk[0]), ev(&blk[1]), ev(&blk[2]), ev(&blk[3]));
            next[0] += a * x[0] + b * x[1];
            next[1] += c * x[0] + d * x[1];
        }
        history.pop();
        history.insert(0, next);
        let big = history
            .iter()
            .flat_map(|v| v.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if !big.is_finite() {
            return Err(Error::Overflow(format!("Jost solution at node {step}")));
        }
        if big > 0.0 && !(1e-100..=1e100).contains(&big) {
            history
                .iter_mut()
                .flat_map(|v| v.iter_mut())
                .for_each(|v| *v /= big);
            log += big.ln();
        }
        vec.push(history[0]);
        log_scale.push(log + phase(grid.node(step)));
    }
    Ok(ScaledTrajectory { vec, log_scale })
}

/// Right Jost solution `psi(t_n; zeta)` at every node, obtained as the
/// component-swapped left Jost solution of the reflected potential `q*(-t)`.
pub fn jost_right(p: &SampledPotential, zeta: Complex64, scheme: Scheme) -> Result<ScaledTrajectory> {
    let refl = jost_left(&p.reflected(), zeta, scheme)?;
    let vec = refl.vec.iter().rev().map(|v| [v[1], v[0]]).collect();
    let log_scale = refl.log_scale.into_iter().rev().collect();
    Ok(ScaledTrajectory { vec, log_scale })
}

/// How norming constants are extracted from the discrete system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormingMethod {
    /// `b_k = w_k^{-ell_+} P_2(w_k)` by Horner's rule on the forward
    /// polynomial.
    Horner,
    /// `phi = b psi` matched at the centre of mass of `|q|^2`, with `phi`
    /// propagated from the left and `psi` from the right.
    Bidirectional,
}

/// Norming constants for known eigenvalues using the IA_m scheme.
pub fn norming_constants(
    p: &SampledPotential,
    eigenvalues: &[Complex64],
    m: usize,
    method: NormingMethod,
) -> Result<Vec<Complex64>> {
    for (k, z) in eigenvalues.iter().enumerate() {
        if !(z.im > 0.0) {
            return Err(Error::InvalidInput(format!(
                "eigenvalue {k} = {z} is not in the upper half plane"
            )));
        }
    }
    match method {
        NormingMethod::Horner => {
            let pair = forward_scatter_ia(p, m, Mode::Fast)?;
            let grid = p.grid();
            eigenvalues
                .iter()
                .map(|&zeta| {
                    let w = (Complex64::i() * 2.0 * zeta * grid.h()).exp();
                    let v = horner(&pair.p2, w);
                    if v == ZERO {
                        return Ok(ZERO);
                    }
                    let b = (v.ln() - Complex64::i() * 2.0 * zeta * grid.t2()).exp();
                    if b.re.is_finite() && b.im.is_finite() {
                        Ok(b)
                    } else {
                        Err(Error::Overflow(format!("norming constant at {zeta}")))
                    }
                })
                .collect()
        }
        NormingMethod::Bidirectional => {
            let split = energy_centre(p);
            let scheme = Scheme::ImplicitAdams(m);
            eigenvalues
                .iter()
                .map(|&zeta| {
                    let phi = jost_left(p, zeta, scheme)?;
                    let psi = jost_right(p, zeta, scheme)?;
                    Ok(match_ratio(&phi, &psi, split))
                })
                .collect()
        }
    }
}

/// Index of the centre of mass of `|q|^2`, clamped to interior nodes.
pub(crate) fn energy_centre(p: &SampledPotential) -> usize {
    let q = p.samples();
    let n = q.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in q.iter().enumerate() {
        num += i as f64 * v.norm_sqr();
        den += v.norm_sqr();
    }
    let c = if den > 0.0 { (num / den).round() as usize } else { n / 2 };
    c.clamp(1.min(n), n.saturating_sub(1).max(1.min(n)))
}

/// Least-squares `b` in `phi = b psi` at node `i`.
fn match_ratio(phi: &ScaledTrajectory, psi: &ScaledTrajectory, i: usize) -> Complex64 {
    let u = phi.vec[i];
    let v = psi.vec[i];
    let num = v[0].conj() * u[0] + v[1].conj() * u[1];
    let den = v[0].norm_sqr() + v[1].norm_sqr();
    if num == ZERO || den == 0.0 {
        return ZERO;
    }
    (num / den).ln().exp() * (phi.log_scale[i] - psi.log_scale[i]).exp()
}
