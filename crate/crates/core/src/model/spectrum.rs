use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Magnitude ρ(ν) ≥ 0 and wrapped phase ψ(ν) ∈ (−π, π] per grid frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum")]
pub struct SignalSpectrum {
    rho: Vec<f64>,
    psi: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpectrum {
    rho: Vec<f64>,
    psi: Vec<f64>,
}

impl TryFrom<RawSpectrum> for SignalSpectrum {
    type Error = Error;

    fn try_from(raw: RawSpectrum) -> Result<Self> {
        SignalSpectrum::new(raw.rho, raw.psi)
    }
}

impl SignalSpectrum {
    pub fn new(rho: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        crate::error::check_len("spectrum phases", rho.len(), psi.len())?;
        for (k, (&r, &p)) in rho.iter().zip(&psi).enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Domain(format!(
                    "rho[{k}] = {r} must be finite and >= 0"
                )));
            }
            if !(p > -PI && p <= PI) {
                return Err(Error::Domain(format!("psi[{k}] = {p} is not in (-pi, pi]")));
            }
        }
        Ok(Self { rho, psi })
    }

    /// Builds a spectrum from complex DFT values; zero values get phase 0.
    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        let rho = values.iter().map(|z| z.norm()).collect();
        let psi = values
            .iter()
            .map(|z| {
                if *z == Complex64::new(0.0, 0.0) {
                    0.0
                } else {
                    crate::model::wrap_phase_unchecked(z.arg())
                }
            })
            .collect();
        Self::new(rho, psi)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// s(ν) = ρ(ν) e^{iψ(ν)}.
    pub fn to_complex(&self) -> Vec<Complex64> {
        self.rho
            .iter()
            .zip(&self.psi)
            .map(|(&r, &p)| Complex64::from_polar(r, p))
            .collect()
    }
}
