//! Layer peeling: recovery of potential samples from the discrete scattering
//! polynomials `P_N`, sequentially in `O(N^2)` or by divide and conquer in
//! `O(N log^2 N)`.
//!
//! Each step reads the two lowest coefficients of `P_{n+1}`, recovers
//! `R_{n+1}` and `R_n`, and strips the layer with the closed-form inverse
//! of its transfer matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::TR_WEIGHT;
use crate::grid::{JostPolynomialPair, SampledPotential, TimeGrid};
use crate::polyops::{polymat_mul, PolyMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pivot tolerance on both denominators of a peeling step.
pub const PIVOT_TOL: f64 = 1e-14;

/// Result of peeling one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelStep {
    pub r_np1: Complex64,
    pub r_n: Complex64,
    /// `z^{-2} M_{n+1}(z^2)^{-1}`: adjugate over `Theta_n`, prefactor power 2.
    pub minv: PolyMatrix,
}

fn peel_values(p10: Complex64, p11: Complex64, p20: Complex64, p21: Complex64) -> Option<(Complex64, Complex64)> {
    if p10.norm() < PIVOT_TOL {
        return None;
    }
    let r1 = p20 / p10;
    let q1 = -r1.conj();
    let den = p10 - q1 * p20;
    if den.norm() < PIVOT_TOL {
        return None;
    }
    let chi = (p21 - r1 * p11) / den;
    let r0 = chi / (1.0 + (1.0 + chi.norm_sqr()).sqrt());
    Some((r1, r0))
}

/// Stripped inverse `adj(M)/Theta_n` as coefficient vectors, row-major.
fn stripped_inverse(r1: Complex64, r0: Complex64) -> [[Complex64; 2]; 4] {
    let (q1, q0) = (-r1.conj(), -r0.conj());
    let s = ONE / (ONE - q0 * r0);
    [
        [r1 * q0 * s, s],
        [-q0 * s, -q1 * s],
        [-r1 * s, -r0 * s],
        [s, q1 * r0 * s],
    ]
}

/// One peeling step on `P_{n+1}`, using its coefficients 0 and 1.
pub fn lp_step(p: &JostPolynomialPair) -> Result<PeelStep> {
    let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or(ZERO);
    let (r_np1, r_n) = peel_values(get(&p.p1, 0), get(&p.p1, 1), get(&p.p2, 0), get(&p.p2, 1))
        .ok_or(Error::DegeneratePivot { layer: p.n() })?;
    let m = stripped_inverse(r_np1, r_n);
    let minv = PolyMatrix::new(2, 2, m.iter().map(|e| e.to_vec()).collect())?.with_prefactor(2);
    Ok(PeelStep { r_np1, r_n, minv })
}

/// Peels `layers` layers from the top of `P` sequentially and returns
/// `R_N, R_{N-1}, ..., R_{N-layers+1}` (ratio values), where `N` is the
/// degree bound of `P`. Only coefficients `0..=layers` of `P` are read.
pub fn peel_sequential(p: &JostPolynomialPair, layers: usize) -> Result<Vec<Complex64>> {
    let top = p.n();
    if layers > top {
        return Err(Error::InvalidInput(format!(
            "cannot peel {layers} layers from a degree-{top} pair"
        )));
    }
    let mut p1: Vec<Complex64> = p.p1.iter().take(layers + 1).copied().collect();
    let mut p2: Vec<Complex64> = p.p2.iter().take(layers + 1).copied().collect();
    p1.resize(layers + 1, ZERO);
    p2.resize(layers + 1, ZERO);
    let mut out = Vec::with_capacity(layers);
    for step in 0..layers {
        let live = layers - step; // coefficients 0..=live are meaningful
        let (r1, r0) = peel_values(p1[0], p1[1], p2[0], p2[1])
            .ok_or(Error::DegeneratePivot { layer: top - step })?;
        out.push(r1);
        let [a, b, c, d] = stripped_inverse(r1, r0);
        for k in 0..live {
            let (x0, y0, x1, y1) = (p1[k], p2[k], p1[k + 1], p2[k + 1]);
            p1[k] = a[0] * x1 + a[1] * x0 + b[0] * y1 + b[1] * y0;
            p2[k] = c[0] * x1 + c[1] * x0 + d[0] * y1 + d[1] * y0;
        }
        p1[live] = ZERO;
        p2[live] = ZERO;
    }
    Ok(out)
}

fn to_potential(r_top_down: Vec<Complex64>, grid: TimeGrid) -> Result<SampledPotential> {
    let n = grid.n();
    let scale = -1.0 / (TR_WEIGHT * grid.h());
    let mut q = vec![ZERO; n + 1];
    for (i, r) in r_top_down.into_iter().enumerate() {
        q[n - i] = r.conj() * scale;
    }
    SampledPotential::new(grid, q)
}

fn check_pair(p: &JostPolynomialPair, grid: &TimeGrid) -> Result<()> {
    if p.n() != grid.n() {
        return Err(Error::DimensionMismatch(format!(
            "pair has degree bound {}, grid has {} intervals",
            p.n(),
            grid.n()
        )));
    }
    Ok(())
}

/// Sequential layer peeling; exact inverse of trapezoidal forward scattering.
/// The sample at the left endpoint is returned as zero.
pub fn lp_sequential(p: &JostPolynomialPair, grid: &TimeGrid) -> Result<SampledPotential> {
    check_pair(p, grid)?;
    to_potential(peel_sequential(p, grid.n())?, *grid)
}

/// Divide-and-conquer layer peeling; same output as [`lp_sequential`].
pub fn lp_fast(p: &JostPolynomialPair, grid: &TimeGrid) -> Result<SampledPotential> {
    check_pair(p, grid)?;
    let n = grid.n();
    let mut out = Vec::with_capacity(n);
    if n > 0 {
        let col = PolyMatrix::new(2, 1, vec![p.p1.clone(), p.p2.clone()])?;
        peel_fast(col, n, n, &mut out, false)?;
    }
    to_potential(out, *grid)
}

/// Peels `count` layers off the column `P` (top layer index `top`), whose
/// first `count + 1` coefficients are used. Appends the ratio values to
/// `out` and, if `need_g`, returns the cumulative stripped inverse `G` with
/// `P_{top - count} = z^{-2 count} G P`.
fn peel_fast(
    mut col: PolyMatrix,
    count: usize,
    top: usize,
    out: &mut Vec<Complex64>,
    need_g: bool,
) -> Result<Option<PolyMatrix>> {
    col.truncate(count + 1);
    if count == 1 {
        let e = |i: usize, k: usize| col.entry(i, 0).get(k).copied().unwrap_or(ZERO);
        let (r1, r0) = peel_values(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
            .ok_or(Error::DegeneratePivot { layer: top })?;
        out.push(r1);
        if !need_g {
            return Ok(None);
        }
        let m = stripped_inverse(r1, r0);
        return Ok(Some(PolyMatrix::new(2, 2, m.iter().map(|e| e.to_vec()).collect())?));
    }
    let k = count / 2;
    let left = peel_fast(col.clone(), k, top, out, true)?.expect("left half returns G");
    let full = polymat_mul(&left, &col)?;
    let shifted = PolyMatrix::new(
        2,
        1,
        (0..2)
            .map(|i| {
                let e = full.entry(i, 0);
                (k..=count).map(|j| e.get(j).copied().unwrap_or(ZERO)).collect()
            })
            .collect(),
    )?;
    let right = peel_fast(shifted, count - k, top - k, out, need_g)?;
    match right {
        Some(r) => Ok(Some(polymat_mul(&r, &left)?)),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{forward_scatter_tr, tr_transfer_matrix};
    use crate::Mode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|x| x.norm_sqr()).sum();
        (num / den).sqrt()
    }

    fn random_potential(rng: &mut ChaCha8Rng, n: usize) -> SampledPotential {
        let grid = TimeGrid::symmetric(4.0, n).unwrap();
        // |Q_n| = |h q_n| / 2 stays below 0.05
        let amp = 0.1 / grid.h();
        let mut q: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::from_polar(amp * rng.gen::<f64>(), rng.gen_range(-3.2..3.2)))
            .collect();
        q[0] = ZERO;
        SampledPotential::new(grid, q).unwrap()
    }

    #[test]
    fn vacuum_step() {
        let s = lp_step(&JostPolynomialPair::vacuum(1)).unwrap();
        assert_eq!(s.r_np1, ZERO);
        assert_eq!(s.r_n, ZERO);
        assert_eq!(s.minv.prefactor_power(), 2);
    }

    #[test]
    fn single_layer_round_trip() {
        let q1 = c(0.0, 0.3);
        let m = tr_transfer_matrix(ZERO, ZERO, q1, -q1.conj()).unwrap();
        let p = JostPolynomialPair::new(m.entry(0, 0).to_vec(), m.entry(1, 0).to_vec()).unwrap();
        let s = lp_step(&p).unwrap();
        assert!((s.r_np1 - (-q1.conj())).norm() < 1e-15);
        assert!(s.r_n.norm() < 1e-15);
        // applying the stripped inverse restores (1, 0)
        let back = s.minv.apply(&[p.p1.clone(), p.p2.clone()]).unwrap();
        assert!((back[0][1] - ONE).norm() < 1e-15 && back[1][1].norm() < 1e-15);
    }

    #[test]
    fn chi_formula_gives_previous_sample() {
        let g = TimeGrid::new(0.0, 2.0, 2).unwrap();
        let q = SampledPotential::new(g, vec![ZERO, c(0.4, -0.2), c(-0.6, 0.5)]).unwrap();
        let p = forward_scatter_tr(&q, Mode::Sequential).unwrap();
        let s = lp_step(&p).unwrap();
        let qs = q.scaled(TR_WEIGHT);
        assert!((s.r_np1 + qs[2].conj()).norm() < 1e-15);
        assert!((s.r_n + qs[1].conj()).norm() < 1e-15);
    }

    #[test]
    fn vacuum_peels_to_zero() {
        let g = TimeGrid::symmetric(1.0, 16).unwrap();
        let v = JostPolynomialPair::vacuum(16);
        assert!(lp_sequential(&v, &g).unwrap().samples().iter().all(|x| *x == ZERO));
        assert!(lp_fast(&v, &g).unwrap().samples().iter().all(|x| *x == ZERO));
    }

    #[test]
    fn one_layer_input_rescatters() {
        let g = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let p = JostPolynomialPair::new(vec![ONE, ZERO], vec![c(0.1, 0.0), ZERO]).unwrap();
        let q = lp_sequential(&p, &g).unwrap();
        let again = forward_scatter_tr(&q, Mode::Sequential).unwrap();
        // same reflection ratio at every w
        for w in [c(1.0, 0.0), c(0.0, 1.0), c(-0.6, 0.8)] {
            let (a, b) = p.eval(w);
            let (a2, b2) = again.eval(w);
            assert!((b / a - b2 / a2).norm() < 1e-15);
        }
    }

    #[test]
    fn sequential_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[8usize, 100, 256] {
            let q = random_potential(&mut rng, n);
            let p = forward_scatter_tr(&q, Mode::Fast).unwrap();
            let back = lp_sequential(&p, q.grid()).unwrap();
            assert!(rel(back.samples(), q.samples()) <= 1e-10, "n={n}");
        }
    }

    #[test]
    fn fast_matches_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &n in &[1usize, 2, 3, 7, 64, 100, 1024] {
            let q = random_potential(&mut rng, n);
            let p = forward_scatter_tr(&q, Mode::Fast).unwrap();
            let s = lp_sequential(&p, q.grid()).unwrap();
            let f = lp_fast(&p, q.grid()).unwrap();
            assert!(rel(f.samples(), s.samples()) <= 1e-9, "n={n} {} {}", rel(f.samples(), s.samples()), rel(s.samples(), q.samples()));
        }
    }

    #[test]
    fn peeling_reads_only_the_coefficient_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_potential(&mut rng, 64);
        let p = forward_scatter_tr(&q, Mode::Fast).unwrap();
        for k in [1usize, 5, 17, 40] {
            let full = peel_sequential(&p, k).unwrap();
            let cut = JostPolynomialPair::new(p.p1[..=k].to_vec(), p.p2[..=k].to_vec()).unwrap();
            let trunc = peel_sequential(&cut, k).unwrap();
            assert_eq!(full, trunc);
        }
    }

    #[test]
    fn degenerate_pivot_is_reported() {
        let g = TimeGrid::symmetric(1.0, 2).unwrap();
        let p = JostPolynomialPair::new(vec![ZERO; 3], vec![ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(lp_sequential(&p, &g), Err(Error::DegeneratePivot { layer: 2 })));
        assert!(matches!(lp_fast(&p, &g), Err(Error::DegeneratePivot { layer: 2 })));
    }

    #[test]
    fn dimension_mismatch() {
        let g = TimeGrid::symmetric(1.0, 4).unwrap();
        assert!(lp_sequential(&JostPolynomialPair::vacuum(3), &g).is_err());
    }
}
