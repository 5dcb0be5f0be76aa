use serde::{Deserialize, Serialize};

use super::fisher::{check_noise, fisher_matrix};
use crate::error::{check_len, Error, Result};
use crate::model::{split_params, FrequencyGrid, NoiseProfile, SignalModel};

/// Relative finite-difference step: h_i = step · (1 + |ξ^i|).
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Dense first-kind Christoffel symbols Γ_{ij,m} (lowered index last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NestedSymbols", try_from = "NestedSymbols")]
pub struct ChristoffelTensor {
    n: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NestedSymbols {
    values: Vec<Vec<Vec<f64>>>,
}

impl From<ChristoffelTensor> for NestedSymbols {
    fn from(t: ChristoffelTensor) -> Self {
        let n = t.n;
        let values = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|m| t.get(i, j, m)).collect())
                    .collect()
            })
            .collect();
        Self { values }
    }
}

impl TryFrom<NestedSymbols> for ChristoffelTensor {
    type Error = Error;

    fn try_from(s: NestedSymbols) -> Result<Self> {
        let n = s.values.len();
        let mut t = Self::zeros(n);
        for (i, plane) in s.values.iter().enumerate() {
            check_len("christoffel plane", n, plane.len())?;
            for (j, row) in plane.iter().enumerate() {
                check_len("christoffel row", n, row.len())?;
                for (m, v) in row.iter().enumerate() {
                    t.set(i, j, m, *v);
                }
            }
        }
        Ok(t)
    }
}

impl ChristoffelTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, m: usize) -> usize {
        (i * self.n + j) * self.n + m
    }

    /// Γ_{ij,m}.
    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize) -> f64 {
        self.data[self.idx(i, j, m)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, m: usize, v: f64) {
        let k = self.idx(i, j, m);
        self.data[k] = v;
    }

    fn set_sym(&mut self, i: usize, j: usize, m: usize, v: f64) {
        self.set(i, j, m, v);
        self.set(j, i, m, v);
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }

    /// max |self − other| / (1 + |other|) over all entries.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max)
    }
}

/// Analytic first-kind symbols from the model's first and second partials.
///
/// With w = 2/γ0, magnitude indices u and phase indices q:
/// - Γ_{u'v',u} = Σ w ∂_uρ ∂²_{u'v'}ρ
/// - Γ_{q'r',u} = −Σ w ρ ∂_uρ ∂_{q'}ψ ∂_{r'}ψ
/// - Γ_{q'r',q} = Σ w ρ² ∂_qψ ∂²_{q'r'}ψ
/// - Γ_{q'u,q} = Γ_{uq',q} = −Γ_{q'q,u}
///
/// and every other entry is exactly zero. Models without analytic second
/// partials are delegated to [`christoffel_fd`].
pub fn christoffel<M: SignalModel + ?Sized>(
    model: &M,
    xi: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
) -> Result<ChristoffelTensor> {
    if !model.has_analytic_second_partials() {
        return christoffel_fd(model, xi, grid, noise, DEFAULT_FD_STEP);
    }
    model.check_params(xi, grid)?;
    check_noise(grid, noise)?;
    let (mag, phase) = split_params(model, xi);
    let p = mag.len();
    let nq = phase.len();
    let n = p + nq;
    let w = noise.weights();
    let rho = model.magnitude(mag, grid);
    let jm = model.magnitude_jacobian(mag, grid);
    let jp = model.phase_jacobian(phase, grid);
    let hm = model.magnitude_hessians(mag, grid);
    let hp = model.phase_hessians(phase, grid);
    check_len("magnitude hessians", grid.len(), hm.len())?;
    check_len("phase hessians", grid.len(), hp.len())?;
    let finite = |m: &nalgebra::DMatrix<f64>| m.iter().all(|x| x.is_finite());
    if !(hm.iter().all(finite) && hp.iter().all(finite) && finite(&jm) && finite(&jp)) {
        return Err(Error::Numeric(
            "model second partials are not finite".into(),
        ));
    }

    let mut t = ChristoffelTensor::zeros(n);
    for u in 0..p {
        for a in 0..p {
            for b in a..p {
                let s: f64 = (0..grid.len())
                    .map(|k| w[k] * jm[(k, u)] * hm[k][(a, b)])
                    .sum();
                t.set_sym(a, b, u, s);
            }
        }
        for a in 0..nq {
            for b in a..nq {
                let s: f64 = (0..grid.len())
                    .map(|k| w[k] * rho[k] * jm[(k, u)] * jp[(k, a)] * jp[(k, b)])
                    .sum();
                t.set_sym(p + a, p + b, u, -s);
            }
        }
    }
    for q in 0..nq {
        for a in 0..nq {
            for b in a..nq {
                let s: f64 = (0..grid.len())
                    .map(|k| w[k] * rho[k] * rho[k] * jp[(k, q)] * hp[k][(a, b)])
                    .sum();
                t.set_sym(p + a, p + b, p + q, s);
            }
        }
    }
    for u in 0..p {
        for a in 0..nq {
            for q in 0..nq {
                let v = -t.get(p + a, p + q, u);
                t.set_sym(p + a, u, p + q, v);
            }
        }
    }
    Ok(t)
}

/// Symbols from central differences of the analytic metric,
/// Γ_{ij,m} = ½(∂_i g_jm + ∂_j g_mi − ∂_m g_ij), with per-coordinate step
/// `step · (1 + |ξ^i|)`.
pub fn christoffel_fd<M: SignalModel + ?Sized>(
    model: &M,
    xi: &[f64],
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
    step: f64,
) -> Result<ChristoffelTensor> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!(
            "finite-difference step {step} must be positive"
        )));
    }
    model.check_params(xi, grid)?;
    let n = xi.len();
    let mut dg = Vec::with_capacity(n);
    for i in 0..n {
        let h = step * (1.0 + xi[i].abs());
        let mut plus = xi.to_vec();
        let mut minus = xi.to_vec();
        plus[i] += h;
        minus[i] -= h;
        let width = plus[i] - minus[i];
        if width == 0.0 || !width.is_finite() {
            return Err(Error::Numeric(format!(
                "finite-difference step underflows at coordinate {i}"
            )));
        }
        let gp = fisher_matrix(model, &plus, grid, noise)?.assembled();
        let gm = fisher_matrix(model, &minus, grid, noise)?.assembled();
        dg.push((gp - gm) / width);
    }
    let mut t = ChristoffelTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                t.set(
                    i,
                    j,
                    m,
                    0.5 * (dg[i][(j, m)] + dg[j][(m, i)] - dg[m][(i, j)]),
                );
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExpPolyModel, KnownMagnitudeModel};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    /// Nonlinear in both blocks so that every symbol family is populated:
    /// ρ = φ0 + φ1² ν, ψ̆ = ϕ0 ϕ1 ν + ϕ1² ν².
    struct Curved;

    impl SignalModel for Curved {
        fn n_mag_params(&self) -> usize {
            2
        }
        fn n_phase_params(&self) -> usize {
            2
        }
        fn magnitude(&self, m: &[f64], g: &FrequencyGrid) -> Vec<f64> {
            g.freqs().iter().map(|nu| m[0] + m[1] * m[1] * nu).collect()
        }
        fn unwrapped_phase(&self, f: &[f64], g: &FrequencyGrid) -> Vec<f64> {
            g.freqs()
                .iter()
                .map(|nu| f[0] * f[1] * nu + f[1] * f[1] * nu * nu)
                .collect()
        }
        fn magnitude_jacobian(&self, m: &[f64], g: &FrequencyGrid) -> DMatrix<f64> {
            DMatrix::from_fn(g.len(), 2, |k, u| {
                if u == 0 {
                    1.0
                } else {
                    2.0 * m[1] * g.freqs()[k]
                }
            })
        }
        fn phase_jacobian(&self, f: &[f64], g: &FrequencyGrid) -> DMatrix<f64> {
            DMatrix::from_fn(g.len(), 2, |k, q| {
                let nu = g.freqs()[k];
                if q == 0 {
                    f[1] * nu
                } else {
                    f[0] * nu + 2.0 * f[1] * nu * nu
                }
            })
        }
        fn magnitude_hessians(&self, _m: &[f64], g: &FrequencyGrid) -> Vec<DMatrix<f64>> {
            g.freqs()
                .iter()
                .map(|nu| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0 * nu]))
                .collect()
        }
        fn phase_hessians(&self, _f: &[f64], g: &FrequencyGrid) -> Vec<DMatrix<f64>> {
            g.freqs()
                .iter()
                .map(|nu| DMatrix::from_row_slice(2, 2, &[0.0, *nu, *nu, 2.0 * nu * nu]))
                .collect()
        }
    }

    struct NoHessians(ExpPolyModel);

    impl SignalModel for NoHessians {
        fn n_mag_params(&self) -> usize {
            self.0.n_mag_params()
        }
        fn n_phase_params(&self) -> usize {
            self.0.n_phase_params()
        }
        fn magnitude(&self, m: &[f64], g: &FrequencyGrid) -> Vec<f64> {
            self.0.magnitude(m, g)
        }
        fn unwrapped_phase(&self, f: &[f64], g: &FrequencyGrid) -> Vec<f64> {
            self.0.unwrapped_phase(f, g)
        }
        fn magnitude_jacobian(&self, m: &[f64], g: &FrequencyGrid) -> DMatrix<f64> {
            self.0.magnitude_jacobian(m, g)
        }
        fn phase_jacobian(&self, f: &[f64], g: &FrequencyGrid) -> DMatrix<f64> {
            self.0.phase_jacobian(f, g)
        }
        fn magnitude_hessians(&self, _m: &[f64], _g: &FrequencyGrid) -> Vec<DMatrix<f64>> {
            unreachable!()
        }
        fn phase_hessians(&self, _f: &[f64], _g: &FrequencyGrid) -> Vec<DMatrix<f64>> {
            unreachable!()
        }
        fn has_analytic_second_partials(&self) -> bool {
            false
        }
    }

    fn setup(n: usize) -> (FrequencyGrid, NoiseProfile) {
        (
            FrequencyGrid::new(0.25, 0.5, n).unwrap(),
            NoiseProfile::new((0..n).map(|k| 1.0 + 0.2 * k as f64).collect()).unwrap(),
        )
    }

    #[test]
    fn constant_phase_known_magnitude() {
        let (grid, noise) = setup(6);
        let rho0: Vec<f64> = (0..6).map(|k| 0.5 + 0.1 * k as f64).collect();
        let w0: f64 = rho0
            .iter()
            .zip(noise.weights())
            .map(|(r, w)| w * r * r)
            .sum();
        let model = KnownMagnitudeModel::new(rho0, 1).unwrap();
        let alpha = 2.5;
        let t = christoffel(&model, &[alpha, 0.4], &grid, &noise).unwrap();
        assert_eq!(t.get(0, 0, 0), 0.0);
        assert!((t.get(1, 1, 0) + alpha * w0).abs() < 1e-13 * w0);
        assert!((t.get(1, 0, 1) - alpha * w0).abs() < 1e-13 * w0);
        assert_eq!(t.get(1, 0, 1), -t.get(1, 1, 0));
        assert_eq!(t.get(0, 1, 1), t.get(1, 0, 1));
        assert_eq!(t.get(1, 1, 1), 0.0);
    }

    #[test]
    fn curved_model_matches_fd() {
        let (grid, noise) = setup(8);
        let xi = [0.8, 0.6, 1.3, -0.7];
        let a = christoffel(&Curved, &xi, &grid, &noise).unwrap();
        let f = christoffel_fd(&Curved, &xi, &grid, &noise, DEFAULT_FD_STEP).unwrap();
        assert!(f.max_rel_diff(&a) < 1e-6, "{}", f.max_rel_diff(&a));
        let (p, n) = (2usize, 4usize);
        assert!(a.count_nonzero() <= p.pow(3) + (n - p).pow(3) + 3 * p * (n - p).pow(2));
        // Families with a magnitude lowered index and mixed upper pair vanish.
        assert_eq!(a.get(0, 2, 0), 0.0);
        assert_eq!(a.get(0, 1, 3), 0.0);
    }

    #[test]
    fn flat_metric_gives_zero_fd_symbols() {
        let (grid, noise) = setup(5);
        // Constant phase with frozen α: metric independent of the phase coordinate.
        let model = KnownMagnitudeModel::new(vec![1.0; 5], 1).unwrap();
        let t = christoffel_fd(&model, &[1.0, 0.3], &grid, &noise, DEFAULT_FD_STEP).unwrap();
        assert_eq!(t.get(0, 0, 0), 0.0);
        assert!(t.get(1, 1, 1).abs() < 1e-7);
        assert!(t.get(0, 0, 1).abs() < 1e-7);
    }

    #[test]
    fn fallback_without_hessians() {
        let (grid, noise) = setup(6);
        let model = NoHessians(ExpPolyModel::new(2, 1).unwrap());
        let xi = [0.1, 0.4, -2.0];
        let t = christoffel(&model, &xi, &grid, &noise).unwrap();
        let a = christoffel(&model.0, &xi, &grid, &noise).unwrap();
        assert!(t.max_rel_diff(&a) < 1e-6);
    }

    #[test]
    fn rejects_bad_step() {
        let (grid, noise) = setup(4);
        let model = KnownMagnitudeModel::new(vec![1.0; 4], 1).unwrap();
        assert!(christoffel_fd(&model, &[1.0, 0.0], &grid, &noise, 0.0).is_err());
        assert!(christoffel_fd(&model, &[1.0, 0.0], &grid, &noise, 1e-320).is_err());
    }

    #[test]
    fn json_nested_values() {
        let (grid, noise) = setup(8);
        let t = christoffel(&Curved, &[0.8, 0.6, 1.3, -0.7], &grid, &noise).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["values"][3][2].as_array().unwrap().len(), 4);
        let back: ChristoffelTensor = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    proptest! {
        #[test]
        fn known_magnitude_symbols(
            n in 3usize..16,
            alpha in 0.1f64..10.0,
            coeffs in proptest::collection::vec(-5.0f64..5.0, 1..4),
        ) {
            let (grid, noise) = setup(n);
            let rho0: Vec<f64> = (0..n).map(|k| 1.0 + 0.5 * (k as f64 * 0.7).cos()).collect();
            let model = KnownMagnitudeModel::new(rho0, coeffs.len()).unwrap();
            let xi = KnownMagnitudeModel::params(alpha, &coeffs);
            let a = christoffel(&model, &xi, &grid, &noise).unwrap();
            let f = christoffel_fd(&model, &xi, &grid, &noise, DEFAULT_FD_STEP).unwrap();
            prop_assert!(f.max_rel_diff(&a) < 1e-5);
            let nn = xi.len();
            for i in 0..nn {
                for j in 0..nn {
                    for m in 0..nn {
                        prop_assert_eq!(a.get(i, j, m), a.get(j, i, m));
                        prop_assert_eq!(f.get(i, j, m), f.get(j, i, m));
                        let mags = [i, j, m].iter().filter(|&&x| x == 0).count();
                        // Only Γ_{qr,u} and Γ_{qu,r}/Γ_{uq,r} survive: exactly one α index.
                        if mags != 1 {
                            prop_assert_eq!(a.get(i, j, m), 0.0);
                        }
                    }
                }
            }
            for q in 1..nn {
                for r in 1..nn {
                    prop_assert_eq!(a.get(q, 0, r), -a.get(q, r, 0));
                }
            }
        }
    }
}
