use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::fisher::check_noise;
use crate::error::{Error, Result};
use crate::model::{
    eval_model, sample_observation_with, score, split_params, FrequencyGrid, NoiseProfile,
    SignalModel,
};

/// Samples per independently seeded stream. Each chunk draws from its own
/// ChaCha stream, so the estimate does not depend on the thread count.
const CHUNK: usize = 4096;

/// Monte Carlo estimate of the Fisher matrix with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloFisher {
    pub mean: DMatrix<f64>,
    pub std_err: DMatrix<f64>,
    pub n_samples: usize,
}

/// Mean of score outer products over `n_samples` simulated observations.
/// The score is built from the model's analytic partials:
/// ∂_i ℓ = Σ (2/γ0) Re{ conj(x − s) ∂_i s }.
pub fn monte_carlo_fisher<M: SignalModel + ?Sized>(
    model: &M,
    xi: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloFisher> {
    if n_samples < 1000 {
        return Err(Error::Domain(format!(
            "need at least 1000 samples, got {n_samples}"
        )));
    }
    check_noise(grid, noise)?;
    let spectrum = eval_model(model, xi, grid)?;
    let (mag, phase) = split_params(model, xi);
    let n = xi.len();
    let p = mag.len();
    let rho = model.magnitude(mag, grid);
    let jm = model.magnitude_jacobian(mag, grid);
    let jp = model.phase_jacobian(phase, grid);
    // ∂_u s = ∂_uρ e^{iψ}, ∂_q s = i ρ ∂_qψ e^{iψ}.
    let ds: Vec<Vec<Complex64>> = (0..grid.len())
        .map(|k| {
            let e = Complex64::from_polar(1.0, spectrum.psi()[k]);
            (0..n)
                .map(|i| {
                    if i < p {
                        e * jm[(k, i)]
                    } else {
                        e * Complex64::new(0.0, rho[k] * jp[(k, i - p)])
                    }
                })
                .collect()
        })
        .collect();

    let n_chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut sum = vec![0.0; n * n];
            let mut sum_sq = vec![0.0; n * n];
            let mut g = vec![0.0; n];
            for _ in 0..count {
                let obs = sample_observation_with(&spectrum, noise, &mut rng)?;
                let resid = score(&obs, &spectrum, noise)?;
                g.iter_mut().for_each(|x| *x = 0.0);
                for (k, r) in resid.iter().enumerate() {
                    for (gi, d) in g.iter_mut().zip(&ds[k]) {
                        *gi += (r.conj() * d).re;
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let v = g[i] * g[j];
                        sum[i * n + j] += v;
                        sum_sq[i * n + j] += v * v;
                    }
                }
            }
            Ok((sum, sum_sq))
        })
        .collect();

    let mut sum = vec![0.0; n * n];
    let mut sum_sq = vec![0.0; n * n];
    for part in partials {
        let (s, s2) = part?;
        for i in 0..n * n {
            sum[i] += s[i];
            sum_sq[i] += s2[i];
        }
    }
    let m = n_samples as f64;
    let mean = DMatrix::from_fn(n, n, |i, j| sum[i * n + j] / m);
    let std_err = DMatrix::from_fn(n, n, |i, j| {
        let mu = sum[i * n + j] / m;
        let var = (sum_sq[i * n + j] / m - mu * mu).max(0.0) * m / (m - 1.0);
        (var / m).sqrt()
    });
    Ok(MonteCarloFisher {
        mean,
        std_err,
        n_samples,
    })
}
