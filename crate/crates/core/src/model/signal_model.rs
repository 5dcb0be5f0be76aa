use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use super::{wrap_phase_unchecked, FrequencyGrid, SignalSpectrum};
use crate::error::{check_len, Error, Result};

/// A smooth parametrisation ξ = (φ, ϕ) of signal spectra where the magnitude
/// depends only on the first `P` coordinates φ and the unwrapped phase only
/// on the remaining `N − P` coordinates ϕ.
///
/// Jacobians are `N_B × P` (magnitude) and `N_B × (N − P)` (phase); Hessians
/// are returned one square matrix per grid frequency.
pub trait SignalModel: Sync {
    fn n_mag_params(&self) -> usize;
    fn n_phase_params(&self) -> usize;

    fn n_params(&self) -> usize {
        self.n_mag_params() + self.n_phase_params()
    }

    /// Structural check of `xi` against the grid (dimensions, finiteness).
    fn check_params(&self, xi: &[f64], grid: &FrequencyGrid) -> Result<()> {
        check_len("parameter vector", self.n_params(), xi.len())?;
        if self.n_mag_params() > grid.len() || self.n_phase_params() > grid.len() {
            return Err(Error::Domain(format!(
                "model has {} magnitude and {} phase parameters but only {} frequencies",
                self.n_mag_params(),
                self.n_phase_params(),
                grid.len()
            )));
        }
        if let Some(i) = xi.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("parameter {i} is not finite")));
        }
        Ok(())
    }

    /// Admissibility of `xi` (open parameter set of the chart). Defaults to
    /// the structural check.
    fn validate(&self, xi: &[f64], grid: &FrequencyGrid) -> Result<()> {
        self.check_params(xi, grid)
    }

    fn magnitude(&self, mag: &[f64], grid: &FrequencyGrid) -> Vec<f64>;
    fn unwrapped_phase(&self, phase: &[f64], grid: &FrequencyGrid) -> Vec<f64>;
    fn magnitude_jacobian(&self, mag: &[f64], grid: &FrequencyGrid) -> DMatrix<f64>;
    fn phase_jacobian(&self, phase: &[f64], grid: &FrequencyGrid) -> DMatrix<f64>;
    fn magnitude_hessians(&self, mag: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>>;
    fn phase_hessians(&self, phase: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>>;

    /// False when the Hessians above are not analytic, in which case
    /// Christoffel symbols fall back to finite differences of the metric.
    fn has_analytic_second_partials(&self) -> bool {
        true
    }

    /// dρ/dς along a parameter velocity `mag_dot`.
    fn magnitude_rate(&self, mag: &[f64], mag_dot: &[f64], grid: &FrequencyGrid) -> Vec<f64> {
        let j = self.magnitude_jacobian(mag, grid);
        (j * DVector::from_column_slice(mag_dot))
            .as_slice()
            .to_vec()
    }

    /// dψ/dς along a parameter velocity `phase_dot`.
    fn phase_rate(&self, phase: &[f64], phase_dot: &[f64], grid: &FrequencyGrid) -> Vec<f64> {
        let j = self.phase_jacobian(phase, grid);
        (j * DVector::from_column_slice(phase_dot))
            .as_slice()
            .to_vec()
    }
}

/// Splits ξ into its magnitude and phase parts.
pub fn split_params<'a, M: SignalModel + ?Sized>(
    model: &M,
    xi: &'a [f64],
) -> (&'a [f64], &'a [f64]) {
    xi.split_at(model.n_mag_params())
}

/// Evaluates the spectrum (ρ, wrapped ψ) of a model at ξ.
pub fn eval_model<M: SignalModel + ?Sized>(
    model: &M,
    xi: &[f64],
    grid: &FrequencyGrid,
) -> Result<SignalSpectrum> {
    model.validate(xi, grid)?;
    let (mag, phase) = split_params(model, xi);
    let rho = model.magnitude(mag, grid);
    let psi = model
        .unwrapped_phase(phase, grid)
        .into_iter()
        .map(wrap_phase_unchecked)
        .collect();
    SignalSpectrum::new(rho, psi)
}

fn powers(nu: f64, n: usize) -> impl Iterator<Item = f64> {
    std::iter::successors(Some(1.0), move |p| Some(p * nu)).take(n)
}

fn poly(coeffs: &[f64], nu: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * nu + c)
}

fn vandermonde(grid: &FrequencyGrid, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(grid.len(), n, |k, j| grid.freqs()[k].powi(j as i32))
}

fn zero_hessians(n_freqs: usize, dim: usize) -> Vec<DMatrix<f64>> {
    vec![DMatrix::zeros(dim, dim); n_freqs]
}

fn check_template(rho0: &[f64]) -> Result<()> {
    if rho0.is_empty() {
        return Err(Error::Domain("magnitude template is empty".into()));
    }
    if let Some((k, r)) = rho0
        .iter()
        .enumerate()
        .find(|(_, r)| !(r.is_finite() && **r >= 0.0))
    {
        return Err(Error::Domain(format!(
            "rho0[{k}] = {r} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Known magnitude template with a global attenuation and a polynomial
/// unwrapped phase: ξ = (α, ϕ², …, ϕ^N), ρ = α ρ0(ν),
/// ψ̆(ν) = Σ_r ϕ^r ν^{r−2}.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownMagnitudeModel {
    rho0: Vec<f64>,
    n_coeffs: usize,
}

impl KnownMagnitudeModel {
    pub fn new(rho0: Vec<f64>, n_coeffs: usize) -> Result<Self> {
        check_template(&rho0)?;
        if n_coeffs == 0 {
            return Err(Error::Domain(
                "phase polynomial needs at least one coefficient".into(),
            ));
        }
        if n_coeffs > rho0.len() {
            return Err(Error::Domain(format!(
                "phase polynomial degree {} exceeds N_B - 1 = {}",
                n_coeffs - 1,
                rho0.len() - 1
            )));
        }
        Ok(Self { rho0, n_coeffs })
    }

    pub fn rho0(&self) -> &[f64] {
        &self.rho0
    }

    pub fn n_coeffs(&self) -> usize {
        self.n_coeffs
    }

    /// Packs (α, coefficients) into a parameter vector.
    pub fn params(alpha: f64, phase_coeffs: &[f64]) -> Vec<f64> {
        let mut xi = Vec::with_capacity(1 + phase_coeffs.len());
        xi.push(alpha);
        xi.extend_from_slice(phase_coeffs);
        xi
    }
}

impl SignalModel for KnownMagnitudeModel {
    fn n_mag_params(&self) -> usize {
        1
    }

    fn n_phase_params(&self) -> usize {
        self.n_coeffs
    }

    fn check_params(&self, xi: &[f64], grid: &FrequencyGrid) -> Result<()> {
        check_len("magnitude template", grid.len(), self.rho0.len())?;
        check_len("parameter vector", self.n_params(), xi.len())?;
        if let Some(i) = xi.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("parameter {i} is not finite")));
        }
        Ok(())
    }

    fn validate(&self, xi: &[f64], grid: &FrequencyGrid) -> Result<()> {
        self.check_params(xi, grid)?;
        if xi[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "attenuation alpha = {} must be > 0",
                xi[0]
            )));
        }
        if !(xi[1] > -PI && xi[1] <= PI) {
            return Err(Error::Domain(format!(
                "constant phase coefficient {} is not in (-pi, pi]",
                xi[1]
            )));
        }
        Ok(())
    }

    fn magnitude(&self, mag: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        self.rho0.iter().map(|r| mag[0] * r).collect()
    }

    fn unwrapped_phase(&self, phase: &[f64], grid: &FrequencyGrid) -> Vec<f64> {
        grid.freqs().iter().map(|&nu| poly(phase, nu)).collect()
    }

    fn magnitude_jacobian(&self, _mag: &[f64], _grid: &FrequencyGrid) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rho0.len(), 1, &self.rho0)
    }

    fn phase_jacobian(&self, _phase: &[f64], grid: &FrequencyGrid) -> DMatrix<f64> {
        vandermonde(grid, self.n_coeffs)
    }

    fn magnitude_hessians(&self, _mag: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        zero_hessians(grid.len(), 1)
    }

    fn phase_hessians(&self, _phase: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        zero_hessians(grid.len(), self.n_coeffs)
    }

    fn magnitude_rate(&self, _mag: &[f64], mag_dot: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        self.rho0.iter().map(|r| r * mag_dot[0]).collect()
    }

    fn phase_rate(&self, _phase: &[f64], phase_dot: &[f64], grid: &FrequencyGrid) -> Vec<f64> {
        grid.freqs().iter().map(|&nu| poly(phase_dot, nu)).collect()
    }
}

/// Known magnitude template with a free unwrapped phase per bin:
/// ξ = (α, ψ̆_1, …, ψ̆_{N_B}). This is the chart in which sampled
/// attenuation-submanifold geodesics live.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPhaseModel {
    rho0: Vec<f64>,
}

impl BinPhaseModel {
    pub fn new(rho0: Vec<f64>) -> Result<Self> {
        check_template(&rho0)?;
        Ok(Self { rho0 })
    }

    pub fn rho0(&self) -> &[f64] {
        &self.rho0
    }
}

impl SignalModel for BinPhaseModel {
    fn n_mag_params(&self) -> usize {
        1
    }

    fn n_phase_params(&self) -> usize {
        self.rho0.len()
    }

    fn validate(&self, xi: &[f64], grid: &FrequencyGrid) -> Result<()> {
        self.check_params(xi, grid)?;
        if xi[0] < 0.0 {
            return Err(Error::Domain(format!(
                "attenuation alpha = {} must be >= 0",
                xi[0]
            )));
        }
        Ok(())
    }

    fn check_params(&self, xi: &[f64], grid: &FrequencyGrid) -> Result<()> {
        check_len("magnitude template", grid.len(), self.rho0.len())?;
        check_len("parameter vector", self.n_params(), xi.len())?;
        if let Some(i) = xi.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("parameter {i} is not finite")));
        }
        Ok(())
    }

    fn magnitude(&self, mag: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        self.rho0.iter().map(|r| mag[0] * r).collect()
    }

    fn unwrapped_phase(&self, phase: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        phase.to_vec()
    }

    fn magnitude_jacobian(&self, _mag: &[f64], _grid: &FrequencyGrid) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rho0.len(), 1, &self.rho0)
    }

    fn phase_jacobian(&self, _phase: &[f64], grid: &FrequencyGrid) -> DMatrix<f64> {
        DMatrix::identity(grid.len(), grid.len())
    }

    fn magnitude_hessians(&self, _mag: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        zero_hessians(grid.len(), 1)
    }

    fn phase_hessians(&self, _phase: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        zero_hessians(grid.len(), grid.len())
    }

    fn magnitude_rate(&self, _mag: &[f64], mag_dot: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        self.rho0.iter().map(|r| r * mag_dot[0]).collect()
    }

    fn phase_rate(&self, _phase: &[f64], phase_dot: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        phase_dot.to_vec()
    }
}

/// Free magnitude and unwrapped phase per bin: ξ = (ρ_1, …, ρ_{N_B},
/// ψ̆_1, …, ψ̆_{N_B}). The polar chart of the full signal manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarModel {
    n_freqs: usize,
}

impl PolarModel {
    pub fn new(n_freqs: usize) -> Self {
        Self { n_freqs }
    }

    /// Parameters reproducing a spectrum exactly.
    pub fn params_of(spectrum: &SignalSpectrum) -> Vec<f64> {
        spectrum
            .rho()
            .iter()
            .chain(spectrum.psi())
            .copied()
            .collect()
    }
}

impl SignalModel for PolarModel {
    fn n_mag_params(&self) -> usize {
        self.n_freqs
    }

    fn n_phase_params(&self) -> usize {
        self.n_freqs
    }

    fn validate(&self, xi: &[f64], grid: &FrequencyGrid) -> Result<()> {
        self.check_params(xi, grid)?;
        if let Some(k) = xi[..self.n_freqs].iter().position(|r| *r < 0.0) {
            return Err(Error::Domain(format!(
                "magnitude parameter {k} is negative"
            )));
        }
        Ok(())
    }

    fn magnitude(&self, mag: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        mag.to_vec()
    }

    fn unwrapped_phase(&self, phase: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        phase.to_vec()
    }

    fn magnitude_jacobian(&self, _mag: &[f64], _grid: &FrequencyGrid) -> DMatrix<f64> {
        DMatrix::identity(self.n_freqs, self.n_freqs)
    }

    fn phase_jacobian(&self, _phase: &[f64], _grid: &FrequencyGrid) -> DMatrix<f64> {
        DMatrix::identity(self.n_freqs, self.n_freqs)
    }

    fn magnitude_hessians(&self, _mag: &[f64], _grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        zero_hessians(self.n_freqs, self.n_freqs)
    }

    fn phase_hessians(&self, _phase: &[f64], _grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        zero_hessians(self.n_freqs, self.n_freqs)
    }

    fn magnitude_rate(&self, _mag: &[f64], mag_dot: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        mag_dot.to_vec()
    }

    fn phase_rate(&self, _phase: &[f64], phase_dot: &[f64], _grid: &FrequencyGrid) -> Vec<f64> {
        phase_dot.to_vec()
    }
}

/// Log-polynomial magnitude and polynomial phase:
/// ρ(ν) = exp(Σ_u φ_u ν^u), ψ̆(ν) = Σ_q ϕ_q ν^q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpPolyModel {
    mag_terms: usize,
    phase_terms: usize,
}

impl ExpPolyModel {
    pub fn new(mag_terms: usize, phase_terms: usize) -> Result<Self> {
        if mag_terms == 0 && phase_terms == 0 {
            return Err(Error::Domain("model needs at least one parameter".into()));
        }
        Ok(Self {
            mag_terms,
            phase_terms,
        })
    }
}

impl SignalModel for ExpPolyModel {
    fn n_mag_params(&self) -> usize {
        self.mag_terms
    }

    fn n_phase_params(&self) -> usize {
        self.phase_terms
    }

    fn magnitude(&self, mag: &[f64], grid: &FrequencyGrid) -> Vec<f64> {
        grid.freqs().iter().map(|&nu| poly(mag, nu).exp()).collect()
    }

    fn unwrapped_phase(&self, phase: &[f64], grid: &FrequencyGrid) -> Vec<f64> {
        grid.freqs().iter().map(|&nu| poly(phase, nu)).collect()
    }

    fn magnitude_jacobian(&self, mag: &[f64], grid: &FrequencyGrid) -> DMatrix<f64> {
        let rho = self.magnitude(mag, grid);
        let mut j = vandermonde(grid, self.mag_terms);
        for (k, r) in rho.iter().enumerate() {
            j.row_mut(k).scale_mut(*r);
        }
        j
    }

    fn phase_jacobian(&self, _phase: &[f64], grid: &FrequencyGrid) -> DMatrix<f64> {
        vandermonde(grid, self.phase_terms)
    }

    fn magnitude_hessians(&self, mag: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        let rho = self.magnitude(mag, grid);
        grid.freqs()
            .iter()
            .zip(rho)
            .map(|(&nu, r)| {
                let p: Vec<f64> = powers(nu, self.mag_terms).collect();
                DMatrix::from_fn(self.mag_terms, self.mag_terms, |u, v| r * p[u] * p[v])
            })
            .collect()
    }

    fn phase_hessians(&self, _phase: &[f64], grid: &FrequencyGrid) -> Vec<DMatrix<f64>> {
        zero_hessians(grid.len(), self.phase_terms)
    }
}
