use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{split_params, FrequencyGrid, NoiseProfile, SignalModel};

/// Block-diagonal Fisher matrix: magnitude block `[g_uv]` and phase block
/// `[g_qr]`. The magnitude/phase cross block vanishes identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NestedBlocks", try_from = "NestedBlocks")]
pub struct FisherMatrix {
    pub mag_block: DMatrix<f64>,
    pub phase_block: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct NestedBlocks {
    mag_block: Vec<Vec<f64>>,
    phase_block: Vec<Vec<f64>>,
}

fn to_nested(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_nested(rows: &[Vec<f64>], what: &'static str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    for r in rows {
        check_len(what, n, r.len())?;
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl From<FisherMatrix> for NestedBlocks {
    fn from(f: FisherMatrix) -> Self {
        Self {
            mag_block: to_nested(&f.mag_block),
            phase_block: to_nested(&f.phase_block),
        }
    }
}

impl TryFrom<NestedBlocks> for FisherMatrix {
    type Error = Error;

    fn try_from(b: NestedBlocks) -> Result<Self> {
        Ok(Self {
            mag_block: from_nested(&b.mag_block, "mag_block row")?,
            phase_block: from_nested(&b.phase_block, "phase_block row")?,
        })
    }
}

impl FisherMatrix {
    pub fn n_params(&self) -> usize {
        self.mag_block.nrows() + self.phase_block.nrows()
    }

    /// The full N×N matrix with zero off-diagonal blocks.
    pub fn assembled(&self) -> DMatrix<f64> {
        let p = self.mag_block.nrows();
        let n = self.n_params();
        let mut g = DMatrix::zeros(n, n);
        g.view_mut((0, 0), (p, p)).copy_from(&self.mag_block);
        g.view_mut((p, p), (n - p, n - p))
            .copy_from(&self.phase_block);
        g
    }

    /// g_ij v^i v^j.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        check_len("velocity", self.n_params(), v.len())?;
        let (vm, vp) = v.split_at(self.mag_block.nrows());
        let quad = |m: &DMatrix<f64>, x: &[f64]| {
            let mut s = 0.0;
            for i in 0..x.len() {
                for j in 0..x.len() {
                    s += m[(i, j)] * x[i] * x[j];
                }
            }
            s
        };
        Ok(quad(&self.mag_block, vm) + quad(&self.phase_block, vp))
    }

    /// Checks symmetry (1e-12 relative) and positive semidefiniteness
    /// (eigenvalues ≥ −1e-10·‖block‖) of both blocks.
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("magnitude", &self.mag_block), ("phase", &self.phase_block)] {
            if b.nrows() == 0 {
                continue;
            }
            let norm = b.norm();
            let asym = (b - b.transpose()).amax();
            if asym > 1e-12 * norm {
                return Err(Error::Numeric(format!(
                    "{name} block asymmetric by {asym:e} (norm {norm:e})"
                )));
            }
            let min_eig = b.clone().symmetric_eigenvalues().min();
            if min_eig < -1e-10 * norm {
                return Err(Error::Numeric(format!(
                    "{name} block has negative eigenvalue {min_eig:e}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_noise(grid: &FrequencyGrid, noise: &NoiseProfile) -> Result<()> {
    check_len("noise profile", grid.len(), noise.len())
}

/// Σ_k w_k a_k[i] a_k[j], filled on the upper triangle and mirrored so the
/// result is exactly symmetric.
fn weighted_gram(jac: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let n = jac.ncols();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for (k, w) in weights.iter().enumerate() {
                s += w * jac[(k, i)] * jac[(k, j)];
            }
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
    g
}

/// Analytic Fisher matrix of `model` at `xi`:
/// g_uv = Σ (2/γ0) ∂_uρ ∂_vρ and g_qr = Σ (2/γ0) ρ² ∂_qψ ∂_rψ.
pub fn fisher_matrix<M: SignalModel + ?Sized>(
    model: &M,
    xi: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
) -> Result<FisherMatrix> {
    model.check_params(xi, grid)?;
    check_noise(grid, noise)?;
    let (mag, phase) = split_params(model, xi);
    let w = noise.weights();
    let rho = model.magnitude(mag, grid);
    let jm = model.magnitude_jacobian(mag, grid);
    let jp = model.phase_jacobian(phase, grid);
    if jm
        .iter()
        .chain(jp.iter())
        .chain(rho.iter())
        .any(|x| !x.is_finite())
    {
        return Err(Error::Numeric("model partials are not finite".into()));
    }
    let w_phase: Vec<f64> = w.iter().zip(&rho).map(|(w, r)| w * r * r).collect();
    Ok(FisherMatrix {
        mag_block: weighted_gram(&jm, &w),
        phase_block: weighted_gram(&jp, &w_phase),
    })
}

/// Squared speed g_ij ξ̇^i ξ̇^j, evaluated through the model as
/// Σ (2/γ0) [(dρ/dς)² + ρ² (dψ/dς)²].
pub fn path_speed<M: SignalModel + ?Sized>(
    model: &M,
    xi: &[f64],
    xi_dot: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
) -> Result<f64> {
    model.check_params(xi, grid)?;
    check_len("parameter velocity", xi.len(), xi_dot.len())?;
    check_noise(grid, noise)?;
    let (mag, phase) = split_params(model, xi);
    let (mag_dot, phase_dot) = split_params(model, xi_dot);
    let rho = model.magnitude(mag, grid);
    let rho_dot = model.magnitude_rate(mag, mag_dot, grid);
    let psi_dot = model.phase_rate(phase, phase_dot, grid);
    let mut s = 0.0;
    for k in 0..grid.len() {
        let w = 2.0 / noise.gamma0()[k];
        s += w * (rho_dot[k] * rho_dot[k] + rho[k] * rho[k] * psi_dot[k] * psi_dot[k]);
    }
    if !s.is_finite() {
        return Err(Error::Numeric("path speed is not finite".into()));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExpPolyModel, KnownMagnitudeModel};
    use proptest::prelude::*;

    fn setup(n: usize) -> (FrequencyGrid, NoiseProfile, Vec<f64>) {
        let grid = FrequencyGrid::new(0.25, 0.5, n).unwrap();
        let noise = NoiseProfile::new((0..n).map(|k| 0.5 + 0.1 * k as f64).collect()).unwrap();
        let rho0 = (0..n).map(|k| 1.0 + 0.3 * (k as f64).sin()).collect();
        (grid, noise, rho0)
    }

    fn omega0(rho0: &[f64], noise: &NoiseProfile) -> f64 {
        rho0.iter()
            .zip(noise.weights())
            .map(|(r, w)| w * r * r)
            .sum()
    }

    #[test]
    fn known_magnitude_blocks() {
        let (grid, noise, rho0) = setup(7);
        let model = KnownMagnitudeModel::new(rho0.clone(), 1).unwrap();
        let alpha = 1.7;
        let g = fisher_matrix(&model, &[alpha, 0.3], &grid, &noise).unwrap();
        let w0 = omega0(&rho0, &noise);
        assert!((g.mag_block[(0, 0)] - w0).abs() < 1e-13 * w0);
        assert!((g.phase_block[(0, 0)] - alpha * alpha * w0).abs() < 1e-13 * w0 * alpha * alpha);
        g.validate().unwrap();
    }

    #[test]
    fn zero_magnitude_kills_phase_block() {
        let (grid, noise, rho0) = setup(5);
        let model = KnownMagnitudeModel::new(rho0, 3).unwrap();
        let g = fisher_matrix(&model, &[0.0, 0.1, 1.0, -2.0], &grid, &noise).unwrap();
        assert!(g.phase_block.iter().all(|&x| x == 0.0));
        g.validate().unwrap();
    }

    #[test]
    fn pure_alpha_speed() {
        let (grid, noise, rho0) = setup(6);
        let model = KnownMagnitudeModel::new(rho0.clone(), 2).unwrap();
        let s = path_speed(&model, &[1.2, 0.0, 1.0], &[0.7, 0.0, 0.0], &grid, &noise).unwrap();
        let w0 = omega0(&rho0, &noise);
        assert!((s - w0 * 0.49).abs() < 1e-13 * w0);
        let zero = path_speed(&model, &[1.2, 0.0, 1.0], &[0.0; 3], &grid, &noise).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn json_nested_arrays() {
        let (grid, noise, _) = setup(6);
        let model = ExpPolyModel::new(2, 2).unwrap();
        let g = fisher_matrix(&model, &[0.1, -0.2, 0.5, 3.0], &grid, &noise).unwrap();
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(v["mag_block"].as_array().unwrap().len(), 2);
        assert_eq!(v["phase_block"][1].as_array().unwrap().len(), 2);
        let back: FisherMatrix = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
        let a = g.assembled();
        assert_eq!(a[(0, 2)], 0.0);
        assert_eq!(a[(3, 1)], 0.0);
    }

    proptest! {
        #[test]
        fn invariants_and_scaling(
            mag in proptest::collection::vec(-1.0f64..1.0, 1..3),
            phase in proptest::collection::vec(-4.0f64..4.0, 1..3),
            lambda in 0.1f64..10.0,
            vel in proptest::collection::vec(-2.0f64..2.0, 4),
            c in -3.0f64..3.0,
        ) {
            let (grid, noise, _) = setup(8);
            let model = ExpPolyModel::new(mag.len(), phase.len()).unwrap();
            let xi: Vec<f64> = mag.iter().chain(&phase).copied().collect();
            let g = fisher_matrix(&model, &xi, &grid, &noise).unwrap();
            g.validate().unwrap();
            // γ0 → γ0/λ multiplies every entry by λ.
            let gl = fisher_matrix(&model, &xi, &grid, &noise.scaled(1.0 / lambda).unwrap()).unwrap();
            for (a, b) in g.assembled().iter().zip(gl.assembled().iter()) {
                prop_assert!((a * lambda - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            // Chained speed equals the quadratic form; scaling is quadratic.
            let v = &vel[..xi.len()];
            let s = path_speed(&model, &xi, v, &grid, &noise).unwrap();
            prop_assert!((s - g.quadratic_form(v).unwrap()).abs() <= 1e-12 * (1.0 + s));
            let cv: Vec<f64> = v.iter().map(|x| c * x).collect();
            let sc = path_speed(&model, &xi, &cv, &grid, &noise).unwrap();
            prop_assert!((sc - c * c * s).abs() <= 1e-12 * (1.0 + sc));
        }

        #[test]
        fn phase_block_scales_with_alpha_squared(alpha in 0.1f64..10.0, c in 0.1f64..10.0, k in -5.0f64..5.0) {
            let (grid, noise, rho0) = setup(5);
            let model = KnownMagnitudeModel::new(rho0, 2).unwrap();
            let a = fisher_matrix(&model, &[alpha, 0.0, k], &grid, &noise).unwrap();
            let b = fisher_matrix(&model, &[c * alpha, 0.0, k], &grid, &noise).unwrap();
            for (x, y) in a.phase_block.iter().zip(b.phase_block.iter()) {
                prop_assert!((c * c * x - y).abs() <= 1e-12 * y.abs());
            }
            prop_assert_eq!(a.mag_block, b.mag_block);
        }
    }
}
