use super::GeodesicPath;
use crate::error::{check_len, Error, Result};
use crate::model::{split_params, FrequencyGrid, NoiseProfile, SignalModel};
use crate::numerics::StencilDerivatives;

/// Minimum node count for the second-derivative stencils.
const MIN_NODES: usize = 9;

/// Per-node residuals of the two linearly-dependent-gradient equations
///
/// Σ_ν (2/γ0) (ρ'' − ρ ψ'²) ∂_u ρ = 0 (one entry per magnitude parameter u)
/// Σ_ν (2/γ0) (ρ² ψ'' + 2ρ ρ' ψ') ∂_q ψ = 0 (one entry per phase parameter q)
///
/// with ς-derivatives taken by finite differences along the sampled path.
/// Each residual comes with a scale: the same sum with every term replaced
/// by its absolute value, so that cancellation can be judged relative to
/// the size of the terms that cancel.
#[derive(Debug, Clone, PartialEq)]
pub struct LdgResidual {
    pub sigma: Vec<f64>,
    pub magnitude: Vec<Vec<f64>>,
    pub phase: Vec<Vec<f64>>,
    pub magnitude_scale: Vec<Vec<f64>>,
    pub phase_scale: Vec<Vec<f64>>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// max over nodes of ‖r‖∞, divided by the same for the scales.
fn path_ratio(r: &[Vec<f64>], s: &[Vec<f64>]) -> f64 {
    let scale = s.iter().map(|v| max_abs(v)).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        r.iter().map(|v| max_abs(v)).fold(0.0, f64::max) / scale
    }
}

impl LdgResidual {
    /// Max-norm of the (magnitude, phase) residual at every node.
    pub fn max_norms(&self) -> Vec<(f64, f64)> {
        self.magnitude
            .iter()
            .zip(&self.phase)
            .map(|(m, p)| (max_abs(m), max_abs(p)))
            .collect()
    }

    /// Residual max-norm over the whole path relative to the largest term
    /// size along it, the worse of the two equations. Normalising per node
    /// instead would divide by zero at a closest approach, where α̃' = 0
    /// makes every phase-equation term vanish together.
    pub fn max_scaled(&self) -> f64 {
        path_ratio(&self.magnitude, &self.magnitude_scale)
            .max(path_ratio(&self.phase, &self.phase_scale))
    }
}

/// Evaluates the LDG residuals of `model` along `path` (a path in the
/// model's own chart). Needs at least 9 nodes.
pub fn ldg_residual<M: SignalModel + ?Sized>(
    model: &M,
    path: &GeodesicPath,
    grid: &FrequencyGrid,
    noise: &NoiseProfile,
) -> Result<LdgResidual> {
    if path.len() < MIN_NODES {
        return Err(Error::Domain(format!(
            "LDG residual needs at least {MIN_NODES} path nodes, got {}",
            path.len()
        )));
    }
    check_len("path dimension", model.n_params(), path.dim())?;
    check_len("noise profile", grid.len(), noise.len())?;
    let nb = grid.len();
    let w = noise.weights();
    let mut rho = vec![Vec::with_capacity(path.len()); nb];
    let mut psi = vec![Vec::with_capacity(path.len()); nb];
    for xi in path.points() {
        model.check_params(xi, grid)?;
        let (mag, phase) = split_params(model, xi);
        for (k, r) in model.magnitude(mag, grid).into_iter().enumerate() {
            rho[k].push(r);
        }
        for (k, p) in model.unwrapped_phase(phase, grid).into_iter().enumerate() {
            psi[k].push(p);
        }
    }
    let st = StencilDerivatives::new(path.sigmas());
    let (p, nq) = (model.n_mag_params(), model.n_phase_params());
    let mut out = LdgResidual {
        sigma: path.sigmas().to_vec(),
        magnitude: Vec::with_capacity(path.len()),
        phase: Vec::with_capacity(path.len()),
        magnitude_scale: Vec::with_capacity(path.len()),
        phase_scale: Vec::with_capacity(path.len()),
    };
    for (i, xi) in path.points().iter().enumerate() {
        let (mag, phase) = split_params(model, xi);
        let jm = model.magnitude_jacobian(mag, grid);
        let jp = model.phase_jacobian(phase, grid);
        let (mut rm, mut sm) = (vec![0.0; p], vec![0.0; p]);
        let (mut rp, mut sp) = (vec![0.0; nq], vec![0.0; nq]);
        for k in 0..nb {
            let r = rho[k][i];
            let (r1, r2) = (st.first(i, &rho[k]), st.second(i, &rho[k]));
            let (p1, p2) = (st.first(i, &psi[k]), st.second(i, &psi[k]));
            let mag_term = r2 - r * p1 * p1;
            let mag_size = r2.abs() + r * p1 * p1;
            let phase_term = r * r * p2 + 2.0 * r * r1 * p1;
            let phase_size = r * r * p2.abs() + 2.0 * (r * r1 * p1).abs();
            for u in 0..p {
                rm[u] += w[k] * mag_term * jm[(k, u)];
                sm[u] += w[k] * mag_size * jm[(k, u)].abs();
            }
            for q in 0..nq {
                rp[q] += w[k] * phase_term * jp[(k, q)];
                sp[q] += w[k] * phase_size * jp[(k, q)].abs();
            }
        }
        out.magnitude.push(rm);
        out.phase.push(rp);
        out.magnitude_scale.push(sm);
        out.phase_scale.push(sp);
    }
    Ok(out)
}
