use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::GeodesicPath;
use crate::error::{check_len, Error, Result};
use crate::model::{wrap_phase_unchecked, FrequencyGrid, NoiseProfile};

/// Weighted phase discrepancy between two endpoints of the known-magnitude
/// submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGap {
    /// ω0 = Σ (2/γ0) ρ0².
    pub omega0: f64,
    /// Δψ(ν) = wrap(ψ2 − ψ1).
    pub dpsi: Vec<f64>,
    /// δ = sqrt((1/ω0) Σ (2/γ0) ρ0² Δψ²), in [0, π].
    pub delta: f64,
}

/// Computes ω0, the wrapped phase differences and δ.
pub fn weighted_phase_gap(
    psi1: &[f64],
    psi2: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    rho0: &[f64],
) -> Result<PhaseGap> {
    let n = grid.len();
    check_len("first endpoint phases", n, psi1.len())?;
    check_len("second endpoint phases", n, psi2.len())?;
    check_len("noise profile", n, noise.len())?;
    check_len("magnitude template", n, rho0.len())?;
    if psi1.iter().chain(psi2).any(|p| !p.is_finite()) {
        return Err(Error::Domain("endpoint phases must be finite".into()));
    }
    if rho0.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Domain(
            "magnitude template must be finite and >= 0".into(),
        ));
    }
    let mut omega0 = 0.0;
    let mut acc = 0.0;
    let mut dpsi = Vec::with_capacity(n);
    for k in 0..n {
        let w = 2.0 / noise.gamma0()[k] * rho0[k] * rho0[k];
        let d = wrap_phase_unchecked(psi2[k] - psi1[k]);
        omega0 += w;
        acc += w * d * d;
        dpsi.push(d);
    }
    if !(omega0 > 0.0) {
        return Err(Error::Domain(
            "magnitude template has zero energy on the grid".into(),
        ));
    }
    let delta = (acc / omega0).sqrt().min(PI);
    Ok(PhaseGap {
        omega0,
        dpsi,
        delta,
    })
}

fn check_alpha(name: &str, a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "{name} = {a} must be positive and finite"
        )));
    }
    Ok(())
}

/// Closed-form geodesic between (α1, ψ1) and (α2, ψ2) on the submanifold
/// of signals α·ρ0(ν)·e^{iψ(ν)}.
///
/// With constants
/// k1 = α1² + α2² − 2α1α2 cos δ, k2 = (α1α2 cos δ − α1²)/k1,
/// K = α1²α2² sin²δ and c(ν) = √K Δψ(ν)/δ, the attenuation follows
/// α(ς)² = k1(ς + k2)² + K/k1 and every phase obeys α² dψ/dς = c(ν).
/// Equivalently the path is the segment from α1 to α2 e^{iδ} in the
/// complex plane, and the phase advance is proportional to the polar
/// angle θ(ς) of that segment: ψ(ν, ς) = ψ1(ν) + Δψ(ν) θ(ς)/δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGeodesic {
    pub alpha1: f64,
    pub alpha2: f64,
    pub k1: f64,
    pub k2: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    pub delta: f64,
    pub c: Vec<f64>,
    pub psi1: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub omega0: f64,
    /// δ = π: α vanishes at ς = −k2 and every phase jumps there by Δψ(ν).
    pub degenerate: bool,
}

/// Boundary-value solution of the submanifold geodesic equations.
pub fn solve_alpha_geodesic(
    alpha1: f64,
    alpha2: f64,
    psi1: &[f64],
    psi2: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    rho0: &[f64],
) -> Result<AlphaGeodesic> {
    check_alpha("alpha1", alpha1)?;
    check_alpha("alpha2", alpha2)?;
    let gap = weighted_phase_gap(psi1, psi2, grid, noise, rho0)?;
    let delta = gap.delta;
    let degenerate = PI - delta <= 4.0 * f64::EPSILON * PI;
    let half = (0.5 * delta).sin();
    // (α2 − α1)² + 4α1α2 sin²(δ/2) avoids cancellation when α1 ≈ α2, δ ≈ 0.
    let k1 = (alpha2 - alpha1).powi(2) + 4.0 * alpha1 * alpha2 * half * half;
    let k2 = if k1 > 0.0 {
        (alpha1 * alpha2 * delta.cos() - alpha1 * alpha1) / k1
    } else {
        0.0
    };
    let big_k = if degenerate {
        0.0
    } else {
        (alpha1 * alpha2 * delta.sin()).powi(2)
    };
    let c = if delta > 0.0 {
        gap.dpsi.iter().map(|d| big_k.sqrt() * d / delta).collect()
    } else {
        vec![0.0; gap.dpsi.len()]
    };
    Ok(AlphaGeodesic {
        alpha1,
        alpha2,
        k1,
        k2,
        big_k,
        delta,
        c,
        psi1: psi1.to_vec(),
        dpsi: gap.dpsi,
        omega0: gap.omega0,
        degenerate,
    })
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Domain(format!("sigma = {sigma} is outside [0, 1]")));
    }
    Ok(())
}

impl AlphaGeodesic {
    pub fn n_freqs(&self) -> usize {
        self.psi1.len()
    }

    /// Point (1 − ς)α1 + ς α2 e^{iδ} of the complex-plane segment.
    fn segment(&self, sigma: f64) -> (f64, f64) {
        let (s, c) = if self.degenerate {
            (0.0, -1.0)
        } else {
            self.delta.sin_cos()
        };
        (
            (1.0 - sigma) * self.alpha1 + sigma * self.alpha2 * c,
            sigma * self.alpha2 * s,
        )
    }

    /// Fraction θ(ς)/δ of the total phase advance reached at ς.
    fn advance(&self, sigma: f64) -> f64 {
        if self.delta == 0.0 {
            return 0.0;
        }
        if sigma == 1.0 {
            return 1.0;
        }
        let (re, im) = self.segment(sigma);
        im.atan2(re) / self.delta
    }

    /// α̃(ς).
    pub fn alpha_at(&self, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        if sigma == 1.0 {
            return Ok(self.alpha2);
        }
        let (re, im) = self.segment(sigma);
        Ok(re.hypot(im))
    }

    /// α̃(ς) and the continuous (unwrapped) phases ψ̆(ν, ς).
    pub fn eval_unwrapped(&self, sigma: f64) -> Result<(f64, Vec<f64>)> {
        let alpha = self.alpha_at(sigma)?;
        let f = self.advance(sigma);
        let psi = self
            .psi1
            .iter()
            .zip(&self.dpsi)
            .map(|(p, d)| p + d * f)
            .collect();
        Ok((alpha, psi))
    }

    /// α̃(ς) and the wrapped phases ψ(ν, ς) ∈ (−π, π].
    pub fn eval(&self, sigma: f64) -> Result<(f64, Vec<f64>)> {
        let (alpha, psi) = self.eval_unwrapped(sigma)?;
        Ok((alpha, psi.into_iter().map(wrap_phase_unchecked).collect()))
    }

    /// dα̃/dς and dψ̆(ν)/dς = c(ν)/α̃².
    pub fn rates(&self, sigma: f64) -> Result<(f64, Vec<f64>)> {
        let alpha = self.alpha_at(sigma)?;
        let alpha_dot = self.k1 * (sigma + self.k2) / alpha;
        let psi_dot = self.c.iter().map(|c| c / (alpha * alpha)).collect();
        Ok((alpha_dot, psi_dot))
    }

    /// Squared speed along the geodesic, ω0 k1 (constant in ς).
    pub fn speed_squared(&self) -> f64 {
        self.omega0 * self.k1
    }

    /// Length √(ω0 k1).
    pub fn length(&self) -> f64 {
        self.speed_squared().sqrt()
    }

    /// Residual of the tan²δ relation tying k1 to the endpoints:
    /// tan²δ (α1² + α2² − k1)² + (α2² − α1² − k1)² − 4α1²k1.
    pub fn tan_relation_residual(&self) -> f64 {
        let (a1, a2) = (self.alpha1 * self.alpha1, self.alpha2 * self.alpha2);
        self.delta.tan().powi(2) * (a1 + a2 - self.k1).powi(2) + (a2 - a1 - self.k1).powi(2)
            - 4.0 * a1 * self.k1
    }

    /// ς at which α̃ is smallest, clamped to [0, 1].
    pub fn closest_approach(&self) -> f64 {
        (-self.k2).clamp(0.0, 1.0)
    }

    /// `n` nodes on [0, 1] graded toward the closest approach so that the
    /// spacing stays proportional to the local scale sqrt(w² + (ς − ς*)²)
    /// of the phase rotation, w = √K/k1. The index map is additionally
    /// compressed by half near both ends, where one-sided stencils have the
    /// largest error constants. Equispaced when K = 0.
    pub fn graded_sigmas(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let width = if self.k1 > 0.0 {
            self.big_k.sqrt() / self.k1
        } else {
            0.0
        };
        if !(width > 0.0) || self.degenerate {
            return GeodesicPath::uniform_sigmas(n);
        }
        // Unclamped: a closest approach beyond an endpoint still sets the
        // local scale inside [0, 1].
        let centre = -self.k2;
        let (t0, t1) = ((-centre / width).asinh(), ((1.0 - centre) / width).asinh());
        let mut s: Vec<f64> = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                let u = u - 0.5 * (2.0 * PI * u).sin() / (2.0 * PI);
                let t = t0 + (t1 - t0) * u;
                (centre + width * t.sinh()).clamp(0.0, 1.0)
            })
            .collect();
        s[0] = 0.0;
        s[n - 1] = 1.0;
        s.dedup();
        s
    }

    /// Samples the geodesic in the (α, ψ̆_1, …, ψ̆_{N_B}) chart of
    /// [`crate::model::BinPhaseModel`].
    pub fn sample(&self, sigmas: &[f64]) -> Result<GeodesicPath> {
        GeodesicPath::from_fn(sigmas, |s| {
            let (alpha, psi) = self.eval_unwrapped(s)?;
            let mut xi = Vec::with_capacity(1 + psi.len());
            xi.push(alpha);
            xi.extend(psi);
            Ok(xi)
        })
    }
}
