use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{NoiseProfile, SignalSpectrum};
use crate::error::{check_len, Error, Result};

/// Noisy DFT values x(ν) = s(ν) + n(ν) on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub values: Vec<Complex64>,
}

impl Observation {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some(k) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Domain(format!(
                "observation value {k} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Log-density of the observation under independent circular complex
/// Gaussian noise with per-bin power γ0(ν).
pub fn log_likelihood(
    obs: &Observation,
    spectrum: &SignalSpectrum,
    noise: &NoiseProfile,
) -> Result<f64> {
    check_len("spectrum", obs.len(), spectrum.len())?;
    check_len("noise profile", obs.len(), noise.len())?;
    let mut total = 0.0;
    for ((x, s), &g) in obs
        .values
        .iter()
        .zip(spectrum.to_complex())
        .zip(noise.gamma0())
    {
        total += -(PI * g).ln() - (x - s).norm_sqr() / g;
    }
    Ok(total)
}

/// Draws one observation of `spectrum` in noise, seeded deterministically.
pub fn sample_observation(
    spectrum: &SignalSpectrum,
    noise: &NoiseProfile,
    seed: u64,
) -> Result<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_observation_with(spectrum, noise, &mut rng)
}

/// Like [`sample_observation`] but drawing from a caller-supplied generator.
pub fn sample_observation_with<R: Rng + ?Sized>(
    spectrum: &SignalSpectrum,
    noise: &NoiseProfile,
    rng: &mut R,
) -> Result<Observation> {
    check_len("noise profile", spectrum.len(), noise.len())?;
    let values = spectrum
        .to_complex()
        .into_iter()
        .zip(noise.gamma0())
        .map(|(s, &g)| {
            let scale = (0.5 * g).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(scale * re, scale * im)
        })
        .collect();
    Ok(Observation { values })
}

/// Gradient of the log-likelihood with respect to the real coordinates of
/// s(ν): returns (2/γ0) (x − s) per bin, so that for a parameter θ the score
/// is Σ Re{ conj(result) · ∂θ s }.
pub fn score(
    obs: &Observation,
    spectrum: &SignalSpectrum,
    noise: &NoiseProfile,
) -> Result<Vec<Complex64>> {
    check_len("spectrum", obs.len(), spectrum.len())?;
    check_len("noise profile", obs.len(), noise.len())?;
    Ok(obs
        .values
        .iter()
        .zip(spectrum.to_complex())
        .zip(noise.gamma0())
        .map(|((x, s), &g)| (x - s) * (2.0 / g))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> (SignalSpectrum, NoiseProfile) {
        (
            SignalSpectrum::new(vec![1.0; n], vec![0.0; n]).unwrap(),
            NoiseProfile::uniform(n, 1.0).unwrap(),
        )
    }

    #[test]
    fn zero_residual_single_bin() {
        let (s, n) = unit(1);
        let obs = Observation::new(s.to_complex()).unwrap();
        assert!((log_likelihood(&obs, &s, &n).unwrap() + PI.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_observation_two_bins() {
        let (s, n) = unit(2);
        let obs = Observation::new(vec![Complex64::new(0.0, 0.0); 2]).unwrap();
        let expected = -2.0 * PI.ln() - 2.0;
        assert!((log_likelihood(&obs, &s, &n).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn doubling_noise_shifts_by_ln2() {
        let s = SignalSpectrum::new(vec![0.5, 2.0, 1.0], vec![0.1, -1.0, 3.0]).unwrap();
        let n1 = NoiseProfile::new(vec![0.7, 1.3, 2.0]).unwrap();
        let n2 = n1.scaled(2.0).unwrap();
        let obs = Observation::new(s.to_complex()).unwrap();
        let d = log_likelihood(&obs, &s, &n1).unwrap() - log_likelihood(&obs, &s, &n2).unwrap();
        assert!((d - 3.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn zero_residual_is_maximal() {
        let s = SignalSpectrum::new(vec![0.5, 2.0], vec![0.1, -1.0]).unwrap();
        let n = NoiseProfile::new(vec![0.7, 1.3]).unwrap();
        let obs = sample_observation(&s, &n, 11).unwrap();
        let fitted = SignalSpectrum::from_complex(&obs.values).unwrap();
        let best = log_likelihood(&obs, &fitted, &n).unwrap();
        let bound: f64 = n.gamma0().iter().map(|g| -(PI * g).ln()).sum();
        assert!((best - bound).abs() < 1e-12);
        assert!(log_likelihood(&obs, &s, &n).unwrap() < best);
    }

    #[test]
    fn sampler_is_reproducible() {
        let (s, n) = unit(5);
        let a = sample_observation(&s, &n, 42).unwrap();
        let b = sample_observation(&s, &n, 42).unwrap();
        let c = sample_observation(&s, &n, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_noise_returns_signal() {
        let s = SignalSpectrum::new(vec![1.5, 0.2], vec![0.4, -2.0]).unwrap();
        let n = NoiseProfile::uniform(2, 1e-300).unwrap();
        let obs = sample_observation(&s, &n, 3).unwrap();
        for (x, t) in obs.values.iter().zip(s.to_complex()) {
            assert!((x - t).norm() < 1e-140);
        }
    }

    #[test]
    fn sampler_moments() {
        // Mean, circularity and power within 4 standard errors at 1e5 draws.
        let s = SignalSpectrum::new(vec![1.0, 0.3], vec![0.5, -2.5]).unwrap();
        let n = NoiseProfile::new(vec![1.0, 0.25]).unwrap();
        let m = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sum = [Complex64::new(0.0, 0.0); 2];
        let mut sum_sq = [Complex64::new(0.0, 0.0); 2];
        let mut power = [0.0; 2];
        let truth = s.to_complex();
        for _ in 0..m {
            let obs = sample_observation_with(&s, &n, &mut rng).unwrap();
            for k in 0..2 {
                let e = obs.values[k] - truth[k];
                sum[k] += obs.values[k];
                sum_sq[k] += e * e;
                power[k] += e.norm_sqr();
            }
        }
        for k in 0..2 {
            let g = n.gamma0()[k];
            let bound = 4.0 * (g / m as f64).sqrt();
            let mean = sum[k] / m as f64;
            assert!((mean.re - truth[k].re).abs() < bound);
            assert!((mean.im - truth[k].im).abs() < bound);
            let circ = sum_sq[k] / m as f64;
            assert!(circ.re.abs() < bound * g.sqrt() && circ.im.abs() < bound * g.sqrt());
            assert!((power[k] / m as f64 - g).abs() < 4.0 * g / (m as f64).sqrt());
        }
    }
}
