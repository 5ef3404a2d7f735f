//! Input parsing and window selection shared by the subcommands.

use std::path::Path;

use nftlab::domain::{qpsk_domain, rc_t_estimate, rc_t_estimate_for, sech_domain, soliton_domain, SOLITON_MULTIPLIER};
use nftlab::signals::{qpsk_spectrum, qpsk_symbols, sech_bound_states, sech_potential, RaisedCosineParams};
use nftlab::spectrum::{RhoEntry, SpectrumFile};
use nftlab::{Complex64, NFSpectrum, SampledPotential, TimeGrid};
use serde_json::{json, Value};

use crate::CliError;

/// Padding applied to the sech tail estimate.
pub const SECH_PAD: f64 = 1.1;

pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `T1,T2`")?;
    let t1: f64 = a.trim().parse().map_err(|e| format!("T1: {e}"))?;
    let t2: f64 = b.trim().parse().map_err(|e| format!("T2: {e}"))?;
    if !(t1 < t2) {
        return Err(format!("need T1 < T2, got {t1},{t2}"));
    }
    Ok((t1, t2))
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (a, b) = s.split_once(',').ok_or("expected `re,im`")?;
    let re: f64 = a.trim().parse().map_err(|e| format!("re: {e}"))?;
    let im: f64 = b.trim().parse().map_err(|e| format!("im: {e}"))?;
    Ok(Complex64::new(re, im))
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json(dir: &Path, name: &str, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("reports are plain JSON values");
    write(dir, name, &(text + "\n"))
}

/// Spectrum file with the QPSK seed resolved, plus the built spectrum.
pub struct LoadedSpectrum {
    pub file: SpectrumFile,
    pub spectrum: NFSpectrum,
}

pub fn load_spectrum(path: &Path, seed: Option<u64>) -> Result<LoadedSpectrum, CliError> {
    let text = read(path)?;
    let mut file: SpectrumFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if let RhoEntry::QpskRc { seed: s, .. } = &mut file.rho {
        if seed.is_some() {
            *s = seed;
        }
    }
    let spectrum = file.build()?;
    Ok(LoadedSpectrum { file, spectrum })
}

/// Computational window and how it was obtained.
#[derive(Debug, Clone)]
pub struct Window {
    pub t1: f64,
    pub t2: f64,
    pub provenance: Value,
}

/// Picks the window for a spectrum: an explicit override, otherwise the
/// tail estimate of the continuous part widened to cover the bound states.
pub fn choose_window(
    loaded: &LoadedSpectrum,
    n: usize,
    eps: f64,
    explicit: Option<(f64, f64)>,
) -> Result<Window, CliError> {
    if let Some((t1, t2)) = explicit {
        return Ok(Window {
            t1,
            t2,
            provenance: json!({ "source": "user" }),
        });
    }
    if !(eps > 0.0) {
        return Err(CliError::Input(format!("eps must be > 0, got {eps}")));
    }
    let (mut t1, mut t2, mut provenance) = match &loaded.file.rho {
        RhoEntry::Sech { a_r, k } => {
            let t = SECH_PAD * (sech_domain(*a_r, eps)? + ((a_r + *k as f64) / a_r).ln());
            (-t, t, json!({ "source": "sech_domain", "pad": SECH_PAD, "eps": eps, "T": t }))
        }
        RhoEntry::Rc { a, tau_s, beta } => {
            let t = rc_t_estimate(*a, *tau_s, *beta, eps)?;
            (-t, t, json!({ "source": "rc_T_estimate", "eps": eps, "T": t }))
        }
        RhoEntry::QpskRc { tau_s, beta, a_eff, symbols, n_sym, seed } => {
            let symbols: Vec<Complex64> = match (symbols, n_sym) {
                (Some(s), _) => s.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
                (None, Some(n)) => qpsk_symbols(*n, seed.unwrap_or(0))?,
                (None, None) => return Err(CliError::Input("qpsk-rc needs `symbols` or `n_sym`".into())),
            };
            let base = RaisedCosineParams::new(1.0, *tau_s, *beta)?;
            let (_, scaled) = qpsk_spectrum(&symbols, &base, *a_eff)?;
            let t_eps = rc_t_estimate_for(&scaled, eps)?;
            let (t1, t2) = qpsk_domain(symbols.len(), *tau_s, t_eps)?;
            (
                t1,
                t2,
                json!({
                    "source": "qpsk_domain",
                    "eps": eps,
                    "T_eps": t_eps,
                    "A_rc": scaled.amplitude(),
                    "N_sym": symbols.len(),
                    "seed": seed.unwrap_or(0),
                }),
            )
        }
        RhoEntry::Samples { .. } => {
            // widest window whose Nyquist band still covers [-Lambda, Lambda]
            let t = n as f64 * std::f64::consts::PI / (4.0 * loaded.spectrum.lambda());
            (-t, t, json!({ "source": "band_limit", "Lambda": loaded.spectrum.lambda(), "T": t }))
        }
    };
    let discrete = &loaded.spectrum.discrete;
    if !discrete.is_empty() && !matches!(loaded.file.rho, RhoEntry::Sech { .. }) {
        let (kappa, ts) = soliton_domain(discrete, SOLITON_MULTIPLIER)?;
        if ts > t2.max(-t1) {
            t1 = t1.min(-ts);
            t2 = t2.max(ts);
            provenance["bound_states"] = json!({
                "source": "soliton_domain",
                "multiplier": SOLITON_MULTIPLIER,
                "kappa": kappa,
                "T": ts,
            });
        }
    }
    Ok(Window { t1, t2, provenance })
}

/// Closed-form potential for spectra that have one: the sech family with
/// its own bound states.
pub fn reference_potential(loaded: &LoadedSpectrum, grid: TimeGrid) -> Option<SampledPotential> {
    match loaded.file.rho {
        RhoEntry::Sech { a_r, k } => {
            let expected = sech_bound_states(a_r, k).ok()?;
            let same = expected.len() == loaded.spectrum.discrete.len()
                && expected
                    .states()
                    .iter()
                    .zip(loaded.spectrum.discrete.states())
                    .all(|(a, b)| (a.zeta - b.zeta).norm() < 1e-12 && (a.b - b.b).norm() < 1e-12);
            same.then(|| sech_potential(a_r + k as f64, grid))
        }
        _ => None,
    }
}

/// Closed-form signal given as `sech:AMP`.
pub fn parse_closed_form(s: &str) -> Option<Result<f64, CliError>> {
    let amp = s.strip_prefix("sech:")?;
    Some(
        amp.trim()
            .parse::<f64>()
            .map_err(|e| CliError::Input(format!("sech amplitude: {e}")))
            .and_then(|a| {
                if a > 0.0 && a.is_finite() {
                    Ok(a)
                } else {
                    Err(CliError::Input(format!("sech amplitude must be > 0, got {a}")))
                }
            }),
    )
}
