use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::distance::{distance_alpha, distance_full, ratio_time_delay};
use crate::error::{Error, Result};
use crate::model::{wrap_phase_unchecked, FrequencyGrid, NoiseProfile, SignalSpectrum};

/// Decades spanned by the log-spaced part of a sweep that starts at zero.
pub const LOG_DECADES: f64 = 4.0;

/// Sampling of the B·Δτ axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 20.0,
            n_points: 400,
        }
    }
}

impl Sweep {
    fn validate(&self) -> Result<()> {
        if !(self.min >= 0.0 && self.max > self.min && self.max.is_finite()) || self.n_points < 2 {
            return Err(Error::Domain(format!(
                "invalid sweep: need 0 <= min < max and n_points >= 2, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Log-spaced points from `min` to `max`. A zero `min` contributes the
    /// point 0 itself followed by log spacing from max·10^−4.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let (mut out, lo, n) = if self.min == 0.0 {
            (
                vec![0.0],
                self.max * 10f64.powf(-LOG_DECADES),
                self.n_points - 1,
            )
        } else {
            (Vec::new(), self.min, self.n_points)
        };
        let (l0, l1) = (lo.ln(), self.max.ln());
        out.extend((0..n).map(|i| {
            if n == 1 {
                self.max
            } else {
                (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
            }
        }));
        *out.last_mut().unwrap() = self.max;
        Ok(out)
    }
}

fn default_n_freqs() -> usize {
    1000
}
fn default_nu0() -> f64 {
    0.25
}
fn default_snr1() -> f64 {
    1.0
}

/// A time-delay experiment: two signals with flat template ρ0 ≡ 1 and
/// constant per-bin SNR, attenuations 1 and γ, and phase difference
/// Δψ0 − 2πνΔτ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub case_name: String,
    #[serde(default = "default_n_freqs")]
    pub n_freqs: usize,
    #[serde(default = "default_nu0")]
    pub nu0: f64,
    #[serde(rename = "bandwidth_B")]
    pub bandwidth: f64,
    #[serde(default)]
    pub dpsi0: f64,
    pub gamma_ratio: f64,
    #[serde(default)]
    pub btau_sweep: Sweep,
    #[serde(default = "default_snr1")]
    pub snr1: f64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

/// Names accepted by [`ExperimentConfig::named`].
pub const CASE_NAMES: [&str; 4] = ["case1", "case2", "case3", "case4"];

impl ExperimentConfig {
    fn with(case_name: &str, bandwidth: f64, dpsi0: f64, gamma_ratio: f64) -> Self {
        Self {
            case_name: case_name.into(),
            n_freqs: default_n_freqs(),
            nu0: default_nu0(),
            bandwidth,
            dpsi0,
            gamma_ratio,
            btau_sweep: Sweep::default(),
            snr1: default_snr1(),
            output_path: None,
        }
    }

    /// The four reference cases: wideband equal energies, wideband with a
    /// quarter-turn offset, wideband with γ = 10, and narrowband.
    pub fn named(name: &str) -> Option<Self> {
        Some(match name {
            "case1" => Self::with(name, 0.5, 0.0, 1.0),
            "case2" => Self::with(name, 0.5, PI / 2.0, 1.0),
            "case3" => Self::with(name, 0.5, 0.0, 10.0),
            "case4" => Self::with(name, 0.25, 0.0, 1.0),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_freqs < 1 {
            return Err(Error::Domain("n_freqs must be positive".into()));
        }
        if !(self.gamma_ratio > 0.0 && self.gamma_ratio.is_finite()) {
            return Err(Error::Domain(format!(
                "gamma_ratio = {} must be positive",
                self.gamma_ratio
            )));
        }
        if !(self.snr1 > 0.0 && self.snr1.is_finite()) {
            return Err(Error::Domain(format!(
                "snr1 = {} must be positive",
                self.snr1
            )));
        }
        if !self.dpsi0.is_finite() {
            return Err(Error::Domain("dpsi0 must be finite".into()));
        }
        FrequencyGrid::new(self.nu0, self.bandwidth, self.n_freqs)?;
        self.btau_sweep.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub b_dtau: f64,
    pub d_full: f64,
    pub d_alpha: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureDataset {
    pub rows: Vec<FigureRow>,
}

impl FigureDataset {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        self.write_csv(BufWriter::new(file))
    }

    /// Mean ratio over sweep points with B·Δτ in [lo, hi].
    pub fn plateau(&self, lo: f64, hi: f64) -> Option<f64> {
        let inside: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.b_dtau >= lo && r.b_dtau <= hi)
            .map(|r| r.ratio)
            .collect();
        (!inside.is_empty()).then(|| inside.iter().sum::<f64>() / inside.len() as f64)
    }
}

/// Evaluates both distances and the closed-form ratio along the sweep.
/// Sweep points run in parallel; rows stay in sweep order.
pub fn run_figure_case(config: &ExperimentConfig) -> Result<FigureDataset> {
    config.validate()?;
    let n = config.n_freqs;
    let grid = FrequencyGrid::new(config.nu0, config.bandwidth, n)?;
    // ω0 = Σ 2/γ0 = SNR1 with α1 = 1.
    let noise = NoiseProfile::uniform(n, 2.0 * n as f64 / config.snr1)?;
    let rho0 = vec![1.0; n];
    let psi1 = vec![0.0; n];
    let s1 = SignalSpectrum::new(rho0.clone(), psi1.clone())?;
    let g = config.gamma_ratio;
    let nu0_over_b = config.nu0 / config.bandwidth;
    let rows = config
        .btau_sweep
        .points()?
        .into_par_iter()
        .map(|b| {
            let dtau = b / config.bandwidth;
            let psi2: Vec<f64> = grid
                .freqs()
                .iter()
                .map(|nu| wrap_phase_unchecked(config.dpsi0 - 2.0 * PI * nu * dtau))
                .collect();
            let s2 = SignalSpectrum::new(vec![g; n], psi2.clone())?;
            Ok(FigureRow {
                b_dtau: b,
                d_full: distance_full(&s1, &s2, &noise)?,
                d_alpha: distance_alpha(1.0, g, &psi1, &psi2, &grid, &noise, &rho0)?,
                ratio: ratio_time_delay(g, config.dpsi0, b, nu0_over_b, n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureDataset { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str) -> FigureDataset {
        run_figure_case(&ExperimentConfig::named(name).unwrap()).unwrap()
    }

    #[test]
    fn sweep_layout() {
        let p = Sweep::default().points().unwrap();
        assert_eq!(p.len(), 400);
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 2e-3).abs() < 1e-15);
        assert_eq!(p[399], 20.0);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        let q = Sweep {
            min: 1.0,
            max: 2.0,
            n_points: 2,
        }
        .points()
        .unwrap();
        assert_eq!(q, vec![1.0, 2.0]);
        assert!(Sweep {
            min: 0.0,
            max: 1.0,
            n_points: 1
        }
        .points()
        .is_err());
        assert!(Sweep {
            min: -1.0,
            max: 1.0,
            n_points: 5
        }
        .points()
        .is_err());
    }

    #[test]
    fn wideband_plateau() {
        let d = run("case1");
        assert_eq!(d.rows[0].ratio, 1.0);
        let target = (1.0 - (PI / 3f64.sqrt()).cos()).sqrt();
        assert!((d.plateau(10.0, 20.0).unwrap() - target).abs() < 0.02);
        for r in &d.rows {
            assert!(r.ratio >= 1.0 - 1e-12 && r.d_full.is_finite() && r.d_alpha.is_finite());
            assert!(r.d_alpha >= r.d_full - 1e-12 * (1.0 + r.d_full));
        }
    }

    #[test]
    fn quarter_turn_offset_dips_but_stays_apart() {
        let d = run("case2");
        let plateau = d.plateau(10.0, 20.0).unwrap();
        let dip = d.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        assert!(dip < plateau - 0.05, "{dip} vs {plateau}");
        assert!(d.rows.iter().all(|r| r.d_full > 0.1));
    }

    #[test]
    fn narrowband_same_plateau() {
        let d = run("case4");
        assert!((d.plateau(10.0, 20.0).unwrap() - 1.11).abs() < 0.02);
    }

    #[test]
    fn closed_form_ratio_tracks_library_distances() {
        // The grid-sum numerator is exact; only the sinc denominator
        // approximates the band sum.
        let d = run("case3");
        for r in d.rows.iter().filter(|r| r.b_dtau > 1.0) {
            assert!((r.ratio - r.d_alpha / r.d_full).abs() < 0.02, "{r:?}");
        }
    }

    #[test]
    fn config_json_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"case_name": "x", "bandwidth_B": 0.5, "gamma_ratio": 2}"#)
                .unwrap();
        assert_eq!(c.n_freqs, 1000);
        assert_eq!(c.nu0, 0.25);
        assert_eq!(c.snr1, 1.0);
        assert_eq!(c.btau_sweep, Sweep::default());
        assert!(ExperimentConfig::named("case9").is_none());
    }
}
