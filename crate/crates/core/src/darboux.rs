//! Addition of bound states by the classical Darboux transformation, and
//! the two-step inverse transform built on it: layer peeling for the
//! radiative part followed by one Darboux fold per eigenvalue.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::{jost_left, jost_right, Scheme, ScaledTrajectory, TR_WEIGHT};
use crate::grid::{SampledPotential, TimeGrid};
use crate::layerpeel::{lp_fast, lp_sequential};
use crate::spectrum::{radiative_reflection, DiscreteSpectrum, NFSpectrum};
use crate::synthesis::{
    lp_input_direct, lp_input_rh, rho_fourier_coeffs, SynthesisPlan, DEFAULT_OVERSAMPLING,
};
use crate::Mode;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenfunction values at one node, normalised to unit length (the
/// transformation only depends on their direction).
type Dir = [Complex64; 2];

fn normalise(v: Dir) -> Option<Dir> {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n > 0.0 && n.is_finite() {
        Some([v[0] / n, v[1] / n])
    } else {
        None
    }
}

/// Direction of `phi - b psi` at every node.
fn seed_eigenfunction(phi: &ScaledTrajectory, psi: &ScaledTrajectory, b: Complex64) -> Option<Vec<Dir>> {
    let lb = b.ln();
    phi.vec
        .iter()
        .zip(&phi.log_scale)
        .zip(psi.vec.iter().zip(&psi.log_scale))
        .map(|((u, la), (v, lp))| {
            let lbb = lp + lb;
            let s = la.re.max(lbb.re);
            let ea = (la - s).exp();
            let eb = (lbb - s).exp();
            normalise([ea * u[0] - eb * v[0], ea * u[1] - eb * v[1]])
        })
        .collect()
}

/// `D(zeta) = zeta I - Sigma` with `Sigma = Gamma diag(zj, zj*) Gamma^{-1}`
/// built from the unit eigenfunction `(a, b)` of eigenvalue `zj`.
fn dressing(zj: Complex64, t: Dir, zeta: Complex64, v: Dir) -> Dir {
    let (a, b) = (t[0], t[1]);
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    let d = zj - zj.conj();
    let s11 = zj * na + zj.conj() * nb;
    let s22 = zj * nb + zj.conj() * na;
    let s12 = d * a * b.conj();
    let s21 = d * a.conj() * b;
    [
        (zeta - s11) * v[0] - s12 * v[1],
        -s21 * v[0] + (zeta - s22) * v[1],
    ]
}

/// Adds the bound states of `s` to `seed` by successive one-fold Darboux
/// transformations, in order of decreasing `Im zeta`. Seed Jost solutions
/// are propagated with the trapezoidal recurrence.
pub fn cdt_add_bound_states(seed: &SampledPotential, s: &DiscreteSpectrum) -> Result<SampledPotential> {
    if s.is_empty() {
        return Ok(seed.clone());
    }
    let mut states = s.states().to_vec();
    states.sort_by(|x, y| y.zeta.im.total_cmp(&x.zeta.im));
    let mut thetas: Vec<Vec<Dir>> = states
        .iter()
        .enumerate()
        .map(|(k, st)| {
            let phi = jost_left(seed, st.zeta, Scheme::Trapezoidal)?;
            let psi = jost_right(seed, st.zeta, Scheme::Trapezoidal)?;
            seed_eigenfunction(&phi, &psi, st.b).ok_or(Error::BlowUp { fold: k })
        })
        .collect::<Result<_>>()?;
    let grid = *seed.grid();
    let mut q = seed.samples().to_vec();
    let limit = 1.0 / (TR_WEIGHT * grid.h());
    for j in 0..states.len() {
        let zj = states[j].zeta;
        let (done, rest) = thetas.split_at_mut(j + 1);
        let tj = &done[j];
        for (qn, t) in q.iter_mut().zip(tj) {
            *qn -= Complex64::i() * 2.0 * (zj - zj.conj()) * t[0] * t[1].conj();
            if !(qn.norm() < limit) {
                return Err(Error::BlowUp { fold: j });
            }
        }
        for (k, tk) in rest.iter_mut().enumerate() {
            let zk = states[j + 1 + k].zeta;
            for (v, t) in tk.iter_mut().zip(tj) {
                *v = normalise(dressing(zj, *t, zk, *v)).ok_or(Error::BlowUp { fold: j })?;
            }
        }
    }
    SampledPotential::new(grid, q)
}

/// Synthesis route for the layer-peeling input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthesisRoute {
    Direct,
    RiemannHilbert,
}

/// Method used to add bound states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DarbouxMethod {
    Classical,
    /// Reserved; not implemented.
    Fast,
    /// Reserved; not implemented.
    FastPreconditioned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InftOptions {
    pub n_os: usize,
    pub route: SynthesisRoute,
    pub lp: Mode,
    pub dt: DarbouxMethod,
}

impl Default for InftOptions {
    fn default() -> Self {
        Self {
            n_os: DEFAULT_OVERSAMPLING,
            route: SynthesisRoute::Direct,
            lp: Mode::Fast,
            dt: DarbouxMethod::Classical,
        }
    }
}

/// Inverse transform: layer peeling of the radiative part, then bound
/// states by Darboux transformation.
pub fn inft(spectrum: &NFSpectrum, grid: &TimeGrid, options: &InftOptions) -> Result<SampledPotential> {
    match options.dt {
        DarbouxMethod::Classical => {}
        DarbouxMethod::Fast => return Err(Error::NotImplemented("fast Darboux transformation")),
        DarbouxMethod::FastPreconditioned => {
            return Err(Error::NotImplemented("preconditioned fast Darboux transformation"))
        }
    }
    let plan = SynthesisPlan::from_grid(grid, options.n_os)?;
    let rho = &spectrum.continuous;
    if rho.is_bandlimited() && rho.lambda() > plan.lambda() * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "grid step {} resolves |xi| <= {}, but rho is supported on |xi| <= {}",
            grid.h(),
            plan.lambda(),
            rho.lambda()
        )));
    }
    let rho_r = radiative_reflection(rho, &spectrum.discrete);
    let input = match options.route {
        SynthesisRoute::Direct => lp_input_direct(&rho_fourier_coeffs(&rho_r, &plan)),
        SynthesisRoute::RiemannHilbert => lp_input_rh(&rho_r, &plan)?,
    };
    let seed = match options.lp {
        Mode::Fast => lp_fast(&input, grid)?,
        Mode::Sequential => lp_sequential(&input, grid)?,
    };
    if seed.samples().iter().all(|v| *v == ZERO) && spectrum.discrete.is_empty() {
        return Ok(seed);
    }
    cdt_add_bound_states(&seed, &spectrum.discrete)
}
