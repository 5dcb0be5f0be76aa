use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The observation band: `n_freqs` equispaced bin-centre frequencies filling
/// `(nu0 - B/2, nu0 + B/2)`. Frequencies are normalised to the sampling rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct FrequencyGrid {
    nu0: f64,
    #[serde(rename = "bandwidth_B")]
    bandwidth: f64,
    n_freqs: usize,
    freqs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGrid {
    nu0: f64,
    #[serde(rename = "bandwidth_B")]
    bandwidth: f64,
    n_freqs: usize,
    #[serde(default)]
    freqs: Option<Vec<f64>>,
}

impl TryFrom<RawGrid> for FrequencyGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        match raw.freqs {
            None => FrequencyGrid::new(raw.nu0, raw.bandwidth, raw.n_freqs),
            Some(freqs) => {
                let g = FrequencyGrid::from_freqs(freqs)?;
                if g.n_freqs != raw.n_freqs {
                    return Err(Error::LengthMismatch {
                        what: "grid freqs",
                        expected: raw.n_freqs,
                        found: g.n_freqs,
                    });
                }
                Ok(FrequencyGrid {
                    nu0: raw.nu0,
                    bandwidth: raw.bandwidth,
                    ..g
                })
            }
        }
    }
}

impl FrequencyGrid {
    /// Bin centres `nu0 - B/2 + (k + 1/2) B / n` for `k = 0..n`.
    pub fn new(nu0: f64, bandwidth: f64, n_freqs: usize) -> Result<Self> {
        if n_freqs < 1 {
            return Err(Error::Domain("grid needs at least one frequency".into()));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite() && nu0.is_finite()) {
            return Err(Error::Domain(format!(
                "invalid band: nu0 = {nu0}, B = {bandwidth}"
            )));
        }
        let start = nu0 - 0.5 * bandwidth;
        // A band starting at exactly 0 is accepted: bin centres stay positive.
        if start < 0.0 {
            return Err(Error::Domain(format!(
                "band start nu0 - B/2 = {start} must be non-negative"
            )));
        }
        let step = bandwidth / n_freqs as f64;
        let freqs = (0..n_freqs)
            .map(|k| start + (k as f64 + 0.5) * step)
            .collect();
        Ok(Self {
            nu0,
            bandwidth,
            n_freqs,
            freqs,
        })
    }

    /// Rebuilds a grid from explicit frequencies, checking positivity and
    /// equispacing (1e-12 relative). Band centre and width are inferred.
    pub fn from_freqs(freqs: Vec<f64>) -> Result<Self> {
        let n = freqs.len();
        if n == 0 {
            return Err(Error::Domain("grid needs at least one frequency".into()));
        }
        if freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Domain(
                "grid frequencies must be positive and finite".into(),
            ));
        }
        let (nu0, bandwidth) = if n == 1 {
            // A single bin carries no spacing information; treat it as a
            // degenerate band of zero-measure width around itself.
            (freqs[0], 0.0)
        } else {
            let step = (freqs[n - 1] - freqs[0]) / (n - 1) as f64;
            if step <= 0.0 {
                return Err(Error::Domain("grid frequencies must be increasing".into()));
            }
            for w in freqs.windows(2) {
                let d = w[1] - w[0];
                let tol = 1e-12 * step + 4.0 * f64::EPSILON * w[1];
                if (d - step).abs() > tol {
                    return Err(Error::Domain("grid frequencies are not equispaced".into()));
                }
            }
            (0.5 * (freqs[0] + freqs[n - 1]), step * n as f64)
        };
        Ok(Self {
            nu0,
            bandwidth,
            n_freqs: n,
            freqs,
        })
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.n_freqs
    }

    pub fn is_empty(&self) -> bool {
        self.n_freqs == 0
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Bin spacing δν = B / N_B.
    pub fn spacing(&self) -> f64 {
        self.bandwidth / self.n_freqs as f64
    }
}

/// Known noise power spectral density γ0(ν) on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoise")]
pub struct NoiseProfile {
    gamma0: Vec<f64>,
}

#[derive(Deserialize)]
struct RawNoise {
    gamma0: Vec<f64>,
}

impl TryFrom<RawNoise> for NoiseProfile {
    type Error = Error;

    fn try_from(raw: RawNoise) -> Result<Self> {
        NoiseProfile::new(raw.gamma0)
    }
}

impl NoiseProfile {
    pub fn new(gamma0: Vec<f64>) -> Result<Self> {
        if let Some((k, g)) = gamma0
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g > 0.0))
        {
            return Err(Error::Domain(format!(
                "noise PSD must be positive and finite, gamma0[{k}] = {g}"
            )));
        }
        Ok(Self { gamma0 })
    }

    pub fn uniform(n_freqs: usize, gamma0: f64) -> Result<Self> {
        Self::new(vec![gamma0; n_freqs])
    }

    pub fn gamma0(&self) -> &[f64] {
        &self.gamma0
    }

    pub fn len(&self) -> usize {
        self.gamma0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma0.is_empty()
    }

    /// Per-bin Fisher weights 2 / γ0(ν).
    pub fn weights(&self) -> Vec<f64> {
        self.gamma0.iter().map(|g| 2.0 / g).collect()
    }

    /// Scales the PSD by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.gamma0.iter().map(|g| g * factor).collect())
    }
}
