//! Subcommand implementations.

use std::time::Instant;

use nftlab::darboux::inft as run_inft;
use nftlab::forward::{
    forward_scatter, forward_scatter_tr, norming_constants, reflection_samples, scattering_at, NormingMethod,
    Scheme,
};
use nftlab::layerpeel::{lp_fast, lp_sequential};
use nftlab::signals::{metric_b, metric_q, metric_rho, sech_potential, sech_scattering, sech_spectrum};
use nftlab::{Complex64, Mode, SampledPotential, TimeGrid};
use serde_json::{json, Value};

use crate::setup::{self, LoadedSpectrum};
use crate::{BenchArgs, BenchTarget, CliError, ConvergenceArgs, DomainArgs, InftArgs, MethodArgs, NftArgs};

const SCHEMA: &str = "nftlab/1";

fn report(command: &str, config: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    })
}

fn grid_json(g: &TimeGrid) -> Value {
    json!({ "T1": g.t1(), "T2": g.t2(), "N": g.n(), "h": g.h() })
}

fn norming_order(scheme: Scheme) -> usize {
    match scheme {
        Scheme::Trapezoidal => 1,
        Scheme::ImplicitAdams(m) => m,
    }
}

pub fn inft(a: &InftArgs) -> Result<(), CliError> {
    let loaded = setup::load_spectrum(&a.spectrum, a.seed)?;
    let window = setup::choose_window(&loaded, a.n, a.eps, a.window)?;
    let grid = TimeGrid::new(window.t1, window.t2, a.n)?;
    let start = Instant::now();
    let q = run_inft(&loaded.spectrum, &grid, &a.method.inft_options())?;
    let seconds = start.elapsed().as_secs_f64();
    setup::write(&a.out, "potential.csv", &q.to_csv())?;

    let mut metrics = json!({});
    if let Some(r) = setup::reference_potential(&loaded, grid) {
        metrics["e_rel_q"] = json!(metric_q(q.samples(), r.samples())?);
    }
    let mut rep = report(
        "inft",
        json!({
            "spectrum": a.spectrum.display().to_string(),
            "N": a.n,
            "eps": a.eps,
            "seed": a.seed,
            "method": a.method.to_json(),
        }),
    );
    rep["grid"] = grid_json(&grid);
    rep["Lambda"] = json!(loaded.spectrum.lambda());
    rep["bound_states"] = json!(loaded.spectrum.discrete.len());
    rep["domain"] = window.provenance;
    rep["timing"] = json!({ "inft_seconds": seconds });
    rep["metrics"] = metrics;
    setup::write_json(&a.out, "report.json", &rep)
}

fn load_signal(signal: &str, n: usize, window: (f64, f64)) -> Result<(SampledPotential, Option<f64>), CliError> {
    match setup::parse_closed_form(signal) {
        Some(amp) => {
            let amp = amp?;
            let grid = TimeGrid::new(window.0, window.1, n)?;
            Ok((sech_potential(amp, grid), Some(amp)))
        }
        None => {
            let text = setup::read(std::path::Path::new(signal))?;
            Ok((SampledPotential::from_csv(&text)?, None))
        }
    }
}

pub fn nft(a: &NftArgs) -> Result<(), CliError> {
    let (p, _) = load_signal(&a.signal, a.n, a.window)?;
    let grid = *p.grid();
    let scheme = a.method.scheme();
    let start = Instant::now();
    let pair = forward_scatter(&p, scheme, a.method.mode())?;
    let r = reflection_samples(&pair, &grid, (grid.n() / 2).max(1))?;
    let seconds = start.elapsed().as_secs_f64();

    let mut csv = String::from("xi,re_rho,im_rho,flagged\n");
    for (j, (xi, rho)) in r.xi.iter().zip(&r.rho).enumerate() {
        let flagged = u8::from(r.flagged.contains(&j));
        csv.push_str(&format!("{xi},{:e},{:e},{flagged}\n", rho.re, rho.im));
    }
    setup::write(&a.out, "reflection.csv", &csv)?;

    if !a.zeta.is_empty() {
        let b = norming_constants(&p, &a.zeta, norming_order(scheme), NormingMethod::Bidirectional)?;
        let mut csv = String::from("re_zeta,im_zeta,re_b,im_b\n");
        for (z, b) in a.zeta.iter().zip(&b) {
            csv.push_str(&format!("{},{},{:e},{:e}\n", z.re, z.im, b.re, b.im));
        }
        setup::write(&a.out, "norming.csv", &csv)?;
    }

    let mut rep = report(
        "nft",
        json!({
            "signal": a.signal,
            "zeta": a.zeta.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "method": a.method.to_json(),
        }),
    );
    rep["grid"] = grid_json(&grid);
    rep["flagged"] = json!(r.flagged.len());
    rep["timing"] = json!({ "nft_seconds": seconds });
    setup::write_json(&a.out, "report.json", &rep)
}

/// One point of a convergence sweep.
struct Point {
    n: usize,
    err: f64,
    seconds: f64,
}

fn convergence_csv(points: &[Point]) -> String {
    let mut csv = String::from("N,e_rel,seconds,order\n");
    for (i, p) in points.iter().enumerate() {
        let order = match i.checked_sub(1).map(|j| &points[j]) {
            Some(prev) => {
                let order = (prev.err / p.err).log2() / (p.n as f64 / prev.n as f64).log2();
                if order.is_finite() {
                    format!("{order}")
                } else {
                    String::new()
                }
            }
            None => String::new(),
        };
        csv.push_str(&format!("{},{:e},{:e},{order}\n", p.n, p.err, p.seconds));
    }
    csv
}

/// Relative `L2` error of `a_N` on `xi = -4..4` against the closed form.
fn forward_error(amp: f64, n: usize, window: (f64, f64), method: &MethodArgs) -> Result<f64, CliError> {
    let grid = TimeGrid::new(window.0, window.1, n)?;
    let pair = forward_scatter(&sech_potential(amp, grid), method.scheme(), method.mode())?;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..=80 {
        let xi = -4.0 + 0.1 * j as f64;
        let a = scattering_at(&pair, &grid, Complex64::new(xi, 0.0)).0;
        let exact = sech_scattering(amp, xi).0;
        num += (a - exact).norm_sqr();
        den += exact.norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// Inverse-transform error: against the closed form when there is one,
/// else the norming constants when there are bound states, else the
/// reflection coefficient after a forward round trip (absolute when the
/// exact one vanishes).
fn inverse_error(
    loaded: &LoadedSpectrum,
    grid: TimeGrid,
    method: &MethodArgs,
) -> Result<(f64, &'static str), CliError> {
    let q = run_inft(&loaded.spectrum, &grid, &method.inft_options())?;
    if let Some(r) = setup::reference_potential(loaded, grid) {
        return Ok((metric_q(q.samples(), r.samples())?, "q"));
    }
    let scheme = method.scheme();
    let discrete = &loaded.spectrum.discrete;
    if !discrete.is_empty() {
        let b = norming_constants(&q, &discrete.eigenvalues(), norming_order(scheme), NormingMethod::Bidirectional)?;
        return Ok((metric_b(&b, &discrete.norming_constants())?, "b"));
    }
    let pair = forward_scatter(&q, scheme, method.mode())?;
    let r = reflection_samples(&pair, &grid, grid.n() / 2)?;
    let exact: Vec<Complex64> = r.xi.iter().map(|&x| loaded.spectrum.continuous.eval(x)).collect();
    if exact.iter().all(|v| v.norm() == 0.0) {
        let rms = (r.rho.iter().map(|v| v.norm_sqr()).sum::<f64>() / r.rho.len() as f64).sqrt();
        return Ok((rms, "rho_abs"));
    }
    Ok((metric_rho(&r.rho, &exact)?, "rho"))
}

pub fn convergence(a: &ConvergenceArgs) -> Result<(), CliError> {
    if a.sweep.is_empty() || a.sweep.contains(&0) {
        return Err(CliError::Input("sweep needs positive sizes".into()));
    }
    let mut points = Vec::new();
    let mut rep;
    if let Some(signal) = &a.signal {
        let amp = setup::parse_closed_form(signal)
            .ok_or_else(|| CliError::Input(format!("convergence needs a closed-form signal, got {signal}")))??;
        let window = a.window.unwrap_or((-30.0, 30.0));
        for &n in &a.sweep {
            let start = Instant::now();
            let err = forward_error(amp, n, window, &a.method)?;
            points.push(Point { n, err, seconds: start.elapsed().as_secs_f64() });
        }
        rep = report(
            "convergence",
            json!({ "signal": signal, "sweep": a.sweep, "method": a.method.to_json() }),
        );
        rep["metric"] = json!("a");
        rep["domain"] = json!({ "source": "user", "T1": window.0, "T2": window.1 });
    } else {
        let path = a.spectrum.as_ref().expect("clap requires a spectrum or a signal");
        let loaded = setup::load_spectrum(path, a.seed)?;
        // a band-limited window must stay valid at the coarsest grid
        let smallest = *a.sweep.iter().min().expect("sweep is not empty");
        let window = setup::choose_window(&loaded, smallest, a.eps, a.window)?;
        let mut metric = "";
        for &n in &a.sweep {
            let grid = TimeGrid::new(window.t1, window.t2, n)?;
            let start = Instant::now();
            let (err, m) = inverse_error(&loaded, grid, &a.method)?;
            metric = m;
            points.push(Point { n, err, seconds: start.elapsed().as_secs_f64() });
        }
        rep = report(
            "convergence",
            json!({
                "spectrum": path.display().to_string(),
                "sweep": a.sweep,
                "eps": a.eps,
                "seed": a.seed,
                "method": a.method.to_json(),
            }),
        );
        rep["metric"] = json!(metric);
        rep["domain"] = window.provenance;
        rep["domain"]["T1"] = json!(window.t1);
        rep["domain"]["T2"] = json!(window.t2);
    }
    setup::write(&a.out, "convergence.csv", &convergence_csv(&points))?;
    setup::write_json(&a.out, "report.json", &rep)
}

pub fn domain(a: &DomainArgs) -> Result<(), CliError> {
    let loaded = setup::load_spectrum(&a.spectrum, a.seed)?;
    let window = setup::choose_window(&loaded, a.n, a.eps, None)?;
    let mut rep = report(
        "domain",
        json!({ "spectrum": a.spectrum.display().to_string(), "N": a.n, "eps": a.eps, "seed": a.seed }),
    );
    rep["T1"] = json!(window.t1);
    rep["T2"] = json!(window.t2);
    rep["h"] = json!((window.t2 - window.t1) / a.n as f64);
    rep["Lambda"] = json!(loaded.spectrum.lambda());
    rep["domain"] = window.provenance;
    if a.numeric {
        if let nftlab::spectrum::RhoEntry::Rc { a: amp, tau_s, beta } = loaded.file.rho {
            let params = nftlab::signals::RaisedCosineParams::new(amp, tau_s, beta)?;
            let p = nftlab::signals::rc_impulse(&params);
            let start = Instant::now();
            let t = nftlab::domain::find_t(&p, a.eps)?;
            rep["numeric"] = json!({ "source": "find_T", "T": t, "seconds": start.elapsed().as_secs_f64() });
        } else {
            return Err(CliError::Input("--numeric needs an rc spectrum".into()));
        }
    }
    let text = serde_json::to_string_pretty(&rep).expect("reports are plain JSON values");
    println!("{text}");
    if let Some(out) = &a.out {
        setup::write_json(out, "domain.json", &rep)?;
    }
    Ok(())
}

fn median_seconds(runs: usize, mut f: impl FnMut() -> Result<(), CliError>) -> Result<f64, CliError> {
    let mut t = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        f()?;
        t.push(start.elapsed().as_secs_f64());
    }
    t.sort_by(f64::total_cmp);
    Ok(t[runs / 2])
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    if a.runs == 0 {
        return Err(CliError::Input("runs must be >= 1".into()));
    }
    if a.sweep.is_empty() || a.sweep.contains(&0) {
        return Err(CliError::Input("sweep needs positive sizes".into()));
    }
    let spectrum = sech_spectrum(0.4, 0)?;
    let options = a.method.inft_options();
    let mut csv = String::from("N,seconds,seconds_per_sample\n");
    for &n in &a.sweep {
        let grid = TimeGrid::symmetric(30.0, n)?;
        let q = sech_potential(0.4, grid);
        let seconds = match a.target {
            BenchTarget::Lp => {
                let pair = forward_scatter_tr(&q, Mode::Fast)?;
                median_seconds(a.runs, || {
                    let out = match a.method.mode() {
                        Mode::Sequential => lp_sequential(&pair, &grid)?,
                        Mode::Fast => lp_fast(&pair, &grid)?,
                    };
                    std::hint::black_box(out);
                    Ok(())
                })?
            }
            BenchTarget::Nft => median_seconds(a.runs, || {
                std::hint::black_box(forward_scatter(&q, a.method.scheme(), a.method.mode())?);
                Ok(())
            })?,
            BenchTarget::Inft => median_seconds(a.runs, || {
                std::hint::black_box(run_inft(&spectrum, &grid, &options)?);
                Ok(())
            })?,
        };
        csv.push_str(&format!("{n},{seconds:e},{:e}\n", seconds / (n + 1) as f64));
    }
    setup::write(&a.out, "bench.csv", &csv)?;
    let target = match a.target {
        BenchTarget::Lp => "lp",
        BenchTarget::Nft => "nft",
        BenchTarget::Inft => "inft",
    };
    let rep = report(
        "bench",
        json!({
            "target": target,
            "sweep": a.sweep,
            "runs": a.runs,
            "signal": "0.4 sech t on [-30, 30]",
            "method": a.method.to_json(),
        }),
    );
    setup::write_json(&a.out, "report.json", &rep)
}
