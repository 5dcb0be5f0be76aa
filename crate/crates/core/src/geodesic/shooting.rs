use super::{weighted_phase_gap, GeodesicPath};
use crate::error::{Error, Result};
use crate::model::{FrequencyGrid, NoiseProfile};
use crate::numerics::rk4_fixed;

const MAX_ITER: usize = 100;
const ALPHA_TOL: f64 = 1e-9;

/// Result of [`shoot_alpha_geodesic`].
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    /// Path in the (α, ψ̆_1, …, ψ̆_{N_B}) chart, one node per RK4 step.
    pub path: GeodesicPath,
    /// Converged dα/dς at ς = 0.
    pub initial_slope: f64,
    /// Converged constant K of α'' = K/α³.
    pub big_k: f64,
    pub iterations: usize,
    /// |α(1) − α2| at convergence.
    pub alpha_miss: f64,
}

/// Integrates (α, α', Ψ) with α'' = K/α³ and Ψ' = 1/α², where Ψ = ∫ α⁻² dς
/// carries the phase: ψ(ν, ς) = ψ1(ν) + c(ν) Ψ(ς).
fn integrate(
    alpha1: f64,
    slope: f64,
    root_k: f64,
    n_steps: usize,
    mut record: Option<&mut Vec<(f64, f64)>>,
) -> Option<(f64, f64)> {
    let k = root_k * root_k;
    let mut end = (f64::NAN, f64::NAN);
    let ok = rk4_fixed(
        |_, y: &[f64; 3]| {
            let a2 = y[0] * y[0];
            [y[1], k / (a2 * y[0]), 1.0 / a2]
        },
        [alpha1, slope, 0.0],
        0.0,
        1.0,
        n_steps,
        |_, _, y| {
            if let Some(r) = record.as_deref_mut() {
                r.push((y[0], y[2]));
            }
            end = (y[0], y[2]);
        },
    );
    (ok && end.0 > 0.0).then_some(end)
}

/// Numerical oracle for the submanifold geodesic: fixed-step RK4 on
/// α'' = K/α³, ψ' = c(ν)/α², with the two unknowns α'(0) and √K found by a
/// damped Newton iteration on finite-difference Jacobians until
/// |α(1) − α2| < 1e-9 and the accumulated phase advance √K Ψ(1) hits δ.
#[allow(clippy::too_many_arguments)]
pub fn shoot_alpha_geodesic(
    alpha1: f64,
    alpha2: f64,
    psi1: &[f64],
    psi2: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    rho0: &[f64],
    n_steps: usize,
) -> Result<ShootingSolution> {
    if n_steps < 100 {
        return Err(Error::Domain(format!(
            "need at least 100 RK4 steps, got {n_steps}"
        )));
    }
    for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!(
                "{name} = {a} must be positive and finite"
            )));
        }
    }
    let gap = weighted_phase_gap(psi1, psi2, grid, noise, rho0)?;
    let delta = gap.delta;
    let angle_tol = 1e-13 + 1e-11 * delta;

    let residual = |s: f64, u: f64| -> Option<[f64; 2]> {
        let (a_end, big_psi) = integrate(alpha1, s, u, n_steps, None)?;
        Some([a_end - alpha2, u * big_psi - delta])
    };
    let norm = |f: &[f64; 2]| (f[0] / alpha2).hypot(f[1]);

    // Start from the constant-α small-angle guess.
    let (mut s, mut u) = (alpha2 - alpha1, delta * alpha1 * alpha2);
    let mut f =
        residual(s, u).ok_or_else(|| Error::Numeric("initial trajectory is not finite".into()))?;
    let mut iterations = 0;
    while f[0].abs() >= ALPHA_TOL || f[1].abs() >= angle_tol {
        iterations += 1;
        if iterations > MAX_ITER {
            return Err(Error::Convergence {
                solver: "alpha-geodesic shooting",
                iterations: MAX_ITER,
                miss: f[0].abs(),
            });
        }
        let hs = 1e-7 * (1.0 + s.abs());
        let hu = 1e-7 * (1.0 + u.abs());
        let fs = residual(s + hs, u);
        let fu = residual(s, u + hu);
        let (fs, fu) = match (fs, fu) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Convergence {
                    solver: "alpha-geodesic shooting",
                    iterations,
                    miss: f[0].abs(),
                })
            }
        };
        let j = [
            [(fs[0] - f[0]) / hs, (fu[0] - f[0]) / hu],
            [(fs[1] - f[1]) / hs, (fu[1] - f[1]) / hu],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Convergence {
                solver: "alpha-geodesic shooting",
                iterations,
                miss: f[0].abs(),
            });
        }
        let ds = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let du = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        let current = norm(&f);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let (ts, tu) = (s + lambda * ds, u + lambda * du);
            if let Some(tf) = residual(ts, tu) {
                if norm(&tf) < current || (tf[0].abs() < ALPHA_TOL && tf[1].abs() < angle_tol) {
                    accepted = Some((ts, tu, tf));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((ts, tu, tf)) => {
                s = ts;
                u = tu;
                f = tf;
            }
            None => {
                return Err(Error::Convergence {
                    solver: "alpha-geodesic shooting",
                    iterations,
                    miss: f[0].abs(),
                })
            }
        }
    }

    let mut trajectory = Vec::with_capacity(n_steps + 1);
    integrate(alpha1, s, u, n_steps, Some(&mut trajectory))
        .ok_or_else(|| Error::Numeric("converged trajectory is not finite".into()))?;
    let c: Vec<f64> = if delta > 0.0 {
        gap.dpsi.iter().map(|d| u * d / delta).collect()
    } else {
        vec![0.0; gap.dpsi.len()]
    };
    let nodes = trajectory
        .iter()
        .enumerate()
        .map(|(i, &(a, big_psi))| {
            let sigma = if i == n_steps {
                1.0
            } else {
                i as f64 / n_steps as f64
            };
            let mut xi = Vec::with_capacity(1 + c.len());
            xi.push(a);
            xi.extend(psi1.iter().zip(&c).map(|(p, ck)| p + ck * big_psi));
            (sigma, xi)
        })
        .collect();
    Ok(ShootingSolution {
        path: GeodesicPath::new(nodes)?,
        initial_slope: s,
        big_k: u * u,
        iterations,
        alpha_miss: f[0].abs(),
    })
}
