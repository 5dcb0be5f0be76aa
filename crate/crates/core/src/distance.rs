//! Closed-form Fisher–Rao distances on the full signal manifold and on the
//! known-magnitude submanifold, their asymptotic forms, and the distance
//! ratio of time-delayed signals.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{check_len, Error, Result};
use crate::geodesic::{solve_alpha_geodesic, weighted_phase_gap};
use crate::model::{wrap_phase_unchecked, FrequencyGrid, NoiseProfile, SignalSpectrum};

fn check_pair(s1: &SignalSpectrum, s2: &SignalSpectrum, noise: &NoiseProfile) -> Result<()> {
    check_len("second spectrum", s1.len(), s2.len())?;
    check_len("noise profile", s1.len(), noise.len())
}

/// Distance on the full signal manifold in polar form:
/// sqrt(Σ (2/γ0) [ρ1² + ρ2² − 2ρ1ρ2 cos(ψ2 − ψ1)]).
///
/// Evaluated as Σ (2/γ0) [(ρ2 − ρ1)² + 4ρ1ρ2 sin²(Δψ/2)], which is the same
/// quantity without cancellation for nearby points.
pub fn distance_full(
    s1: &SignalSpectrum,
    s2: &SignalSpectrum,
    noise: &NoiseProfile,
) -> Result<f64> {
    check_pair(s1, s2, noise)?;
    let mut acc = 0.0;
    for k in 0..s1.len() {
        let (r1, r2) = (s1.rho()[k], s2.rho()[k]);
        let half = (0.5 * wrap_phase_unchecked(s2.psi()[k] - s1.psi()[k])).sin();
        acc += 2.0 / noise.gamma0()[k] * ((r2 - r1).powi(2) + 4.0 * r1 * r2 * half * half);
    }
    Ok(acc.sqrt())
}

/// The same distance as a Mahalanobis norm of the difference of the
/// (Re, Im) embeddings, with covariance diag(γ0/2).
pub fn distance_mahalanobis(
    s1: &SignalSpectrum,
    s2: &SignalSpectrum,
    noise: &NoiseProfile,
) -> Result<f64> {
    check_pair(s1, s2, noise)?;
    let acc: f64 = s1
        .to_complex()
        .iter()
        .zip(s2.to_complex())
        .zip(noise.gamma0())
        .map(|((a, b), g)| {
            let (dr, di) = (b.re - a.re, b.im - a.im);
            (dr * dr + di * di) / (0.5 * g)
        })
        .sum();
    Ok(acc.sqrt())
}

fn check_alphas(alpha1: f64, alpha2: f64) -> Result<()> {
    for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!(
                "{name} = {a} must be positive and finite"
            )));
        }
    }
    Ok(())
}

/// Distance on the known-magnitude submanifold,
/// √ω0 · sqrt(α1² + α2² − 2α1α2 cos δ) = √(ω0 k1).
pub fn distance_alpha(
    alpha1: f64,
    alpha2: f64,
    psi1: &[f64],
    psi2: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    rho0: &[f64],
) -> Result<f64> {
    Ok(solve_alpha_geodesic(alpha1, alpha2, psi1, psi2, grid, noise, rho0)?.length())
}

/// Full-manifold distance between α1ρ0e^{iψ1} and α2ρ0e^{iψ2}:
/// √ω0 · sqrt(α1² + α2² − 2α1α2 C) with C the ρ0²-weighted mean of cos Δψ.
pub fn distance_full_known_mag(
    alpha1: f64,
    alpha2: f64,
    psi1: &[f64],
    psi2: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    rho0: &[f64],
) -> Result<f64> {
    check_alphas(alpha1, alpha2)?;
    let gap = weighted_phase_gap(psi1, psi2, grid, noise, rho0)?;
    // 1 − C written as a weighted mean of 2 sin²(Δψ/2).
    let one_minus_c = gap
        .dpsi
        .iter()
        .zip(noise.gamma0())
        .zip(rho0)
        .map(|((d, g), r)| {
            let half = (0.5 * d).sin();
            2.0 / g * r * r * 2.0 * half * half
        })
        .sum::<f64>()
        / gap.omega0;
    Ok(
        gap.omega0.sqrt()
            * ((alpha2 - alpha1).powi(2) + 2.0 * alpha1 * alpha2 * one_minus_c).sqrt(),
    )
}

/// Small-phase equivalent of both distances, √SNR1 · sqrt((γ − 1)² + γδ²)
/// with SNR1 = ω0α1² and γ = α2/α1.
pub fn small_phase_equivalent(
    alpha1: f64,
    alpha2: f64,
    psi1: &[f64],
    psi2: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    rho0: &[f64],
) -> Result<f64> {
    check_alphas(alpha1, alpha2)?;
    let gap = weighted_phase_gap(psi1, psi2, grid, noise, rho0)?;
    let snr1 = gap.omega0 * alpha1 * alpha1;
    let gamma = alpha2 / alpha1;
    Ok(snr1.sqrt() * ((gamma - 1.0).powi(2) + gamma * gap.delta * gap.delta).sqrt())
}

/// Limits of (full, submanifold) distances when the phase differences are
/// spread uniformly over (−π, π]: √SNR1·sqrt(γ² + 1) and
/// √SNR1·sqrt(γ² + 1 − 2γ cos(π/√3)).
pub fn large_phase_limits(gamma_ratio: f64, snr1: f64) -> Result<(f64, f64)> {
    if !(gamma_ratio > 0.0 && snr1 >= 0.0) {
        return Err(Error::Domain(format!(
            "need gamma > 0 and SNR1 >= 0, got {gamma_ratio} and {snr1}"
        )));
    }
    let g = gamma_ratio;
    let full = snr1.sqrt() * (g * g + 1.0).sqrt();
    let alpha = snr1.sqrt() * (g * g + 1.0 - 2.0 * g * (PI / 3f64.sqrt()).cos()).sqrt();
    Ok((full, alpha))
}

/// sin(x)/x with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Distance ratio (submanifold over full) for a pure time delay at constant
/// per-bin SNR. The numerator uses the wrapped linear phase
/// ⟨Δψ0 − 2πνΔτ⟩ summed over the grid; the denominator uses the band
/// average sinc(πBΔτ)·cos(Δψ0 − 2πν0Δτ). Frequencies enter normalised by
/// the bandwidth, ν/B = ν0/B − 1/2 + (k + 1/2)/N_B.
///
/// Returns 1 when the denominator vanishes (coincident endpoints).
pub fn ratio_time_delay(
    gamma_ratio: f64,
    dpsi0: f64,
    dtau_times_b: f64,
    nu0_over_b: f64,
    n_freqs: usize,
) -> Result<f64> {
    if n_freqs < 1 {
        return Err(Error::Domain("need at least one frequency".into()));
    }
    if !(gamma_ratio > 0.0)
        || !dpsi0.is_finite()
        || !dtau_times_b.is_finite()
        || !nu0_over_b.is_finite()
    {
        return Err(Error::Domain("invalid time-delay ratio arguments".into()));
    }
    let g = gamma_ratio;
    let n = n_freqs as f64;
    let mean_sq = (0..n_freqs)
        .map(|k| {
            let x = nu0_over_b - 0.5 + (k as f64 + 0.5) / n;
            wrap_phase_unchecked(dpsi0 - 2.0 * PI * x * dtau_times_b).powi(2)
        })
        .sum::<f64>()
        / n;
    let num = g * g + 1.0 - 2.0 * g * mean_sq.sqrt().cos();
    let den = g * g + 1.0
        - 2.0 * g * sinc(PI * dtau_times_b) * (dpsi0 - 2.0 * PI * nu0_over_b * dtau_times_b).cos();
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok((num / den).sqrt())
}

/// Summary of the distances between two spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub d_full: f64,
    pub d_alpha: Option<f64>,
    pub omega0: Option<f64>,
    pub snr1: Option<f64>,
    pub gamma_ratio: Option<f64>,
    pub delta: Option<f64>,
    /// d_alpha / d_full; absent at coincident points or without a chart.
    pub ratio: Option<f64>,
}

/// Relative magnitude mismatch tolerated when fitting spectra to a template.
pub const PROPORTIONALITY_TOL: f64 = 1e-9;

/// Least-squares attenuation of `rho` against `rho0` and the relative
/// residual ‖ρ − αρ0‖ / ‖ρ‖.
pub fn fit_attenuation(rho: &[f64], rho0: &[f64]) -> Result<(f64, f64)> {
    check_len("magnitude template", rho.len(), rho0.len())?;
    let dot: f64 = rho.iter().zip(rho0).map(|(a, b)| a * b).sum();
    let norm0: f64 = rho0.iter().map(|b| b * b).sum();
    let norm: f64 = rho.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm0 == 0.0 || norm == 0.0 {
        return Err(Error::ChartMismatch { residual: 1.0 });
    }
    let alpha = dot / norm0;
    let resid = rho
        .iter()
        .zip(rho0)
        .map(|(a, b)| (a - alpha * b).powi(2))
        .sum::<f64>()
        .sqrt()
        / norm;
    Ok((alpha, resid))
}

/// Computes every distance quantity between `s1` and `s2`. When `rho0` is
/// given, both magnitudes must be proportional to it (1e-9 relative) and
/// the submanifold fields are filled in; otherwise only `d_full` is.
pub fn report(
    s1: &SignalSpectrum,
    s2: &SignalSpectrum,
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    rho0: Option<&[f64]>,
) -> Result<DistanceReport> {
    check_pair(s1, s2, noise)?;
    check_len("grid", s1.len(), grid.len())?;
    let d_full = distance_full(s1, s2, noise)?;
    let mut out = DistanceReport {
        d_full,
        d_alpha: None,
        omega0: None,
        snr1: None,
        gamma_ratio: None,
        delta: None,
        ratio: None,
    };
    let Some(rho0) = rho0 else {
        return Ok(out);
    };
    let (a1, r1) = fit_attenuation(s1.rho(), rho0)?;
    let (a2, r2) = fit_attenuation(s2.rho(), rho0)?;
    let residual = r1.max(r2);
    if residual > PROPORTIONALITY_TOL || !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::ChartMismatch { residual });
    }
    let geo = solve_alpha_geodesic(a1, a2, s1.psi(), s2.psi(), grid, noise, rho0)?;
    let d_alpha = geo.length();
    // Slack for rounding plus the admitted template-fit mismatch.
    let slack = 1e-12 * (1.0 + d_full) + 4.0 * residual * geo.omega0.sqrt() * (a1 + a2);
    if d_alpha < d_full - slack {
        return Err(Error::Numeric(format!(
            "submanifold distance {d_alpha} below full distance {d_full}"
        )));
    }
    out.d_alpha = Some(d_alpha);
    out.omega0 = Some(geo.omega0);
    out.snr1 = Some(geo.omega0 * a1 * a1);
    out.gamma_ratio = Some(a2 / a1);
    out.delta = Some(geo.delta);
    out.ratio = (d_full > 0.0).then(|| d_alpha / d_full);
    Ok(out)
}

#[derive(Deserialize)]
struct PairRow {
    pair: String,
    nu: f64,
    gamma0: f64,
    rho1: f64,
    psi1: f64,
    rho2: f64,
    psi2: f64,
    #[serde(default)]
    rho0: Option<f64>,
}

#[derive(Serialize)]
struct ReportRow<'a> {
    pair: &'a str,
    d_full: f64,
    d_alpha: Option<f64>,
    omega0: Option<f64>,
    snr1: Option<f64>,
    gamma_ratio: Option<f64>,
    delta: Option<f64>,
    ratio: Option<f64>,
}

/// Batch mode. Input is a long-format CSV with columns
/// `pair,nu,gamma0,rho1,psi1,rho2,psi2[,rho0]`, one row per frequency of
/// each endpoint pair. Output has one row per pair, in first-appearance
/// order: `pair,d_full,d_alpha,omega0,snr1,gamma_ratio,delta,ratio`, with
/// empty cells for undefined fields. A pair whose `rho0` cells are all
/// filled gets the submanifold fields; a partly filled template is an error.
pub fn batch_reports<R: Read, W: Write>(input: R, output: W) -> Result<usize> {
    let mut reader = csv::Reader::from_reader(input);
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<PairRow>> = HashMap::new();
    for (line, row) in reader.deserialize::<PairRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            location: format!("row {}", line + 2),
            message: e.to_string(),
        })?;
        if !groups.contains_key(&row.pair) {
            order.push(row.pair.clone());
        }
        groups.entry(row.pair.clone()).or_default().push(row);
    }
    let mut writer = csv::Writer::from_writer(output);
    for name in &order {
        let rows = &groups[name];
        let ctx = |e: Error| Error::Parse {
            location: format!("pair {name}"),
            message: e.to_string(),
        };
        let grid = FrequencyGrid::from_freqs(rows.iter().map(|r| r.nu).collect()).map_err(ctx)?;
        let noise = NoiseProfile::new(rows.iter().map(|r| r.gamma0).collect()).map_err(ctx)?;
        let s1 = SignalSpectrum::new(
            rows.iter().map(|r| r.rho1).collect(),
            rows.iter().map(|r| wrap_phase_unchecked(r.psi1)).collect(),
        )
        .map_err(ctx)?;
        let s2 = SignalSpectrum::new(
            rows.iter().map(|r| r.rho2).collect(),
            rows.iter().map(|r| wrap_phase_unchecked(r.psi2)).collect(),
        )
        .map_err(ctx)?;
        let filled = rows.iter().filter(|r| r.rho0.is_some()).count();
        if filled != 0 && filled != rows.len() {
            return Err(Error::Parse {
                location: format!("pair {name}"),
                message: format!("rho0 given for {filled} of {} rows", rows.len()),
            });
        }
        let rho0: Option<Vec<f64>> = rows.iter().map(|r| r.rho0).collect();
        let rep = report(&s1, &s2, &grid, &noise, rho0.as_deref())?;
        writer.serialize(ReportRow {
            pair: name,
            d_full: rep.d_full,
            d_alpha: rep.d_alpha,
            omega0: rep.omega0,
            snr1: rep.snr1,
            gamma_ratio: rep.gamma_ratio,
            delta: rep.delta,
            ratio: rep.ratio,
        })?;
    }
    writer.flush()?;
    Ok(order.len())
}
