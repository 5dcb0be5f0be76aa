use num_complex::Complex64;
use std::io::Write;

use crate::error::{check_len, Error, Result};
use crate::metric::path_speed;
use crate::model::{
    unwrap_phase, wrap_phase_unchecked, FrequencyGrid, NoiseProfile, SignalModel, SignalSpectrum,
};
use crate::numerics::{apply_weights, fornberg_weights, GaussLegendre, StencilDerivatives};

pub const DEFAULT_QUADRATURE_NODES: usize = 64;

/// A path sampled at increasing ς ∈ [0, 1], with both endpoints present.
/// The meaning of the coordinates depends on the chart the path lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    sigma: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl GeodesicPath {
    pub fn new(nodes: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let (sigma, points): (Vec<f64>, Vec<Vec<f64>>) = nodes.into_iter().unzip();
        if sigma.len() < 2 {
            return Err(Error::Domain("a path needs at least two nodes".into()));
        }
        if sigma[0] != 0.0 || sigma[sigma.len() - 1] != 1.0 {
            return Err(Error::Domain(
                "path must start at sigma = 0 and end at sigma = 1".into(),
            ));
        }
        if sigma.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "path sigma values must be strictly increasing".into(),
            ));
        }
        let dim = points[0].len();
        for p in &points {
            check_len("path node", dim, p.len())?;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numeric("path node is not finite".into()));
            }
        }
        Ok(Self { sigma, points })
    }

    /// Samples `f` at the given ς values.
    pub fn from_fn<F>(sigmas: &[f64], mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Vec<f64>>,
    {
        let nodes = sigmas
            .iter()
            .map(|&s| Ok((s, f(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nodes)
    }

    /// `n` equispaced ς values from 0 to 1.
    pub fn uniform_sigmas(n: usize) -> Vec<f64> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    1.0
                } else {
                    i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigma
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Values of coordinate `i` at every node.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[i]).collect()
    }

    /// Writes a path in the (α, ψ̆_1, …, ψ̆_{N_B}) chart as CSV with columns
    /// `sigma,alpha,psi_1,…,psi_NB`; phases are wrapped on output.
    pub fn write_alpha_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["sigma".to_string(), "alpha".to_string()];
        header.extend((1..self.dim()).map(|k| format!("psi_{k}")));
        w.write_record(&header)?;
        for (s, p) in self.sigma.iter().zip(&self.points) {
            let mut rec = vec![s.to_string(), p[0].to_string()];
            rec.extend(p[1..].iter().map(|x| wrap_phase_unchecked(*x).to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Squared speed g_ij ξ̇^i ξ̇^j of a chart.
pub trait PathMetric {
    fn dim(&self) -> usize;
    fn speed(&self, xi: &[f64], xi_dot: &[f64]) -> Result<f64>;
}

/// The Fisher metric of a parametric model.
pub struct ModelMetric<'a, M: SignalModel + ?Sized> {
    pub model: &'a M,
    pub grid: &'a FrequencyGrid,
    pub noise: &'a NoiseProfile,
}

impl<'a, M: SignalModel + ?Sized> ModelMetric<'a, M> {
    pub fn new(model: &'a M, grid: &'a FrequencyGrid, noise: &'a NoiseProfile) -> Self {
        Self { model, grid, noise }
    }
}

impl<M: SignalModel + ?Sized> PathMetric for ModelMetric<'_, M> {
    fn dim(&self) -> usize {
        self.model.n_params()
    }

    fn speed(&self, xi: &[f64], xi_dot: &[f64]) -> Result<f64> {
        path_speed(self.model, xi, xi_dot, self.grid, self.noise)
    }
}

/// The constant metric of the real embedding (Re s(ν_1..), Im s(ν_1..)),
/// i.e. the inverse noise covariance diag(2/γ0) on both halves.
#[derive(Debug, Clone)]
pub struct EmbeddingMetric {
    weights: Vec<f64>,
}

impl EmbeddingMetric {
    pub fn new(noise: &NoiseProfile) -> Self {
        Self {
            weights: noise.weights(),
        }
    }
}

impl PathMetric for EmbeddingMetric {
    fn dim(&self) -> usize {
        2 * self.weights.len()
    }

    fn speed(&self, _xi: &[f64], xi_dot: &[f64]) -> Result<f64> {
        check_len("embedding velocity", self.dim(), xi_dot.len())?;
        let n = self.weights.len();
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * (xi_dot[k] * xi_dot[k] + xi_dot[n + k] * xi_dot[n + k]))
            .sum())
    }
}

/// (Re s, Im s) coordinates of a spectrum.
pub fn spectrum_to_embedding(s: &SignalSpectrum) -> Vec<f64> {
    let z = s.to_complex();
    z.iter()
        .map(|v| v.re)
        .chain(z.iter().map(|v| v.im))
        .collect()
}

pub fn embedding_to_spectrum(xi: &[f64]) -> Result<SignalSpectrum> {
    if !xi.len().is_multiple_of(2) {
        return Err(Error::Domain(
            "embedding coordinates must come in (Re, Im) halves".into(),
        ));
    }
    let n = xi.len() / 2;
    let z: Vec<Complex64> = (0..n).map(|k| Complex64::new(xi[k], xi[n + k])).collect();
    SignalSpectrum::from_complex(&z)
}

/// The affine path μ1 + ς(μ2 − μ1) in the real embedding, sampled at
/// `n_nodes` equispaced ς.
pub fn straight_line_geodesic(
    mu1: &SignalSpectrum,
    mu2: &SignalSpectrum,
    n_nodes: usize,
) -> Result<GeodesicPath> {
    check_len("second spectrum", mu1.len(), mu2.len())?;
    let a = spectrum_to_embedding(mu1);
    let b = spectrum_to_embedding(mu2);
    GeodesicPath::from_fn(&GeodesicPath::uniform_sigmas(n_nodes), |s| {
        Ok(a.iter().zip(&b).map(|(x, y)| x + s * (y - x)).collect())
    })
}

/// Converts an embedding-chart path to the polar chart (ρ…, ψ̆…) of
/// [`crate::model::PolarModel`], unwrapping each phase along ς.
pub fn embedding_path_to_polar(path: &GeodesicPath) -> Result<GeodesicPath> {
    let spectra = path
        .points()
        .iter()
        .map(|p| embedding_to_spectrum(p))
        .collect::<Result<Vec<_>>>()?;
    let n = spectra[0].len();
    let unwrapped: Vec<Vec<f64>> = (0..n)
        .map(|k| unwrap_phase(&spectra.iter().map(|s| s.psi()[k]).collect::<Vec<_>>()))
        .collect();
    let nodes = spectra
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut xi = s.rho().to_vec();
            xi.extend(unwrapped.iter().map(|u| u[i]));
            (path.sigmas()[i], xi)
        })
        .collect();
    GeodesicPath::new(nodes)
}

/// Nodal ς-derivatives of every coordinate: sixth-order stencils when the
/// path has enough nodes, otherwise the derivative of the interpolating
/// polynomial through all nodes.
fn nodal_slopes(path: &GeodesicPath) -> Vec<Vec<f64>> {
    let dim = path.dim();
    let coords: Vec<Vec<f64>> = (0..dim).map(|i| path.coordinate(i)).collect();
    let mut slopes = vec![vec![0.0; dim]; path.len()];
    if path.len() >= StencilDerivatives::MIN_NODES {
        let st = StencilDerivatives::new(path.sigmas());
        for (j, slope) in slopes.iter_mut().enumerate() {
            for (i, c) in coords.iter().enumerate() {
                slope[i] = st.first(j, c);
            }
        }
    } else {
        for (j, slope) in slopes.iter_mut().enumerate() {
            let w = fornberg_weights(path.sigmas()[j], path.sigmas(), 1);
            for (i, c) in coords.iter().enumerate() {
                slope[i] = apply_weights(&w[1], c, j);
            }
        }
    }
    slopes
}

/// Length ∫ sqrt(g(ξ̇, ξ̇)) dς of a sampled path. Coordinates are
/// interpolated by piecewise cubic Hermite polynomials in ς and each
/// segment is integrated with an `n_quad`-point Gauss–Legendre rule.
pub fn path_length<P: PathMetric + ?Sized>(
    metric: &P,
    path: &GeodesicPath,
    n_quad: usize,
) -> Result<f64> {
    if n_quad < 8 {
        return Err(Error::Domain(format!(
            "need at least 8 quadrature nodes, got {n_quad}"
        )));
    }
    check_len("path dimension", metric.dim(), path.dim())?;
    let slopes = nodal_slopes(path);
    let gl = GaussLegendre::new(n_quad);
    let dim = path.dim();
    let mut xi = vec![0.0; dim];
    let mut xi_dot = vec![0.0; dim];
    let mut total = 0.0;
    for j in 0..path.len() - 1 {
        let (s0, s1) = (path.sigmas()[j], path.sigmas()[j + 1]);
        let h = s1 - s0;
        let (y0, y1) = (&path.points()[j], &path.points()[j + 1]);
        let (m0, m1) = (&slopes[j], &slopes[j + 1]);
        let mut err = None;
        let seg = gl.integrate(s0, s1, |s| {
            let t = (s - s0) / h;
            let (t2, t3) = (t * t, t * t * t);
            let (h00, h10, h01, h11) = (
                2.0 * t3 - 3.0 * t2 + 1.0,
                t3 - 2.0 * t2 + t,
                -2.0 * t3 + 3.0 * t2,
                t3 - t2,
            );
            let (d00, d10, d11) = (
                6.0 * t2 - 6.0 * t,
                3.0 * t2 - 4.0 * t + 1.0,
                3.0 * t2 - 2.0 * t,
            );
            for i in 0..dim {
                xi[i] = h00 * y0[i] + h10 * h * m0[i] + h01 * y1[i] + h11 * h * m1[i];
                xi_dot[i] = d00 * (y0[i] - y1[i]) / h + d10 * m0[i] + d11 * m1[i];
            }
            match metric.speed(&xi, &xi_dot) {
                Ok(v) => v.max(0.0).sqrt(),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        total += seg;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PolarModel;
    use std::f64::consts::PI;

    fn spectra() -> (SignalSpectrum, SignalSpectrum, NoiseProfile) {
        (
            SignalSpectrum::new(vec![1.0, 0.5, 2.0], vec![0.3, -2.0, 3.0]).unwrap(),
            SignalSpectrum::new(vec![0.2, 1.5, 1.0], vec![1.3, 2.5, -3.0]).unwrap(),
            NoiseProfile::new(vec![0.5, 1.0, 2.0]).unwrap(),
        )
    }

    fn mahalanobis(a: &SignalSpectrum, b: &SignalSpectrum, noise: &NoiseProfile) -> f64 {
        let (x, y) = (spectrum_to_embedding(a), spectrum_to_embedding(b));
        let n = a.len();
        (0..n)
            .map(|k| {
                let w = 2.0 / noise.gamma0()[k];
                w * ((x[k] - y[k]).powi(2) + (x[n + k] - y[n + k]).powi(2))
            })
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn path_validation() {
        assert!(GeodesicPath::new(vec![(0.0, vec![1.0])]).is_err());
        assert!(GeodesicPath::new(vec![(0.0, vec![1.0]), (0.9, vec![1.0])]).is_err());
        assert!(
            GeodesicPath::new(vec![(0.0, vec![1.0]), (0.0, vec![1.0]), (1.0, vec![1.0])]).is_err()
        );
        assert!(GeodesicPath::new(vec![(0.0, vec![1.0]), (1.0, vec![1.0, 2.0])]).is_err());
    }

    #[test]
    fn straight_line_midpoint_and_constant() {
        let (a, b, _) = spectra();
        let p = straight_line_geodesic(&a, &b, 3).unwrap();
        let (x, y) = (spectrum_to_embedding(&a), spectrum_to_embedding(&b));
        for i in 0..x.len() {
            assert!((p.points()[1][i] - 0.5 * (x[i] + y[i])).abs() < 1e-15);
        }
        let c = straight_line_geodesic(&a, &a, 5).unwrap();
        assert!(c.points().iter().all(|q| *q == c.points()[0]));
    }

    #[test]
    fn straight_line_length_is_mahalanobis() {
        let (a, b, noise) = spectra();
        let metric = EmbeddingMetric::new(&noise);
        for n in [2, 4, 11] {
            let p = straight_line_geodesic(&a, &b, n).unwrap();
            let len = path_length(&metric, &p, DEFAULT_QUADRATURE_NODES).unwrap();
            let d = mahalanobis(&a, &b, &noise);
            assert!((len - d).abs() < 1e-10 * d, "{n}: {len} vs {d}");
        }
        let c = straight_line_geodesic(&a, &a, 9).unwrap();
        assert_eq!(path_length(&metric, &c, 8).unwrap(), 0.0);
        assert!(path_length(&metric, &c, 7).is_err());
    }

    #[test]
    fn polar_chart_length_matches() {
        let (a, b, noise) = spectra();
        let grid = FrequencyGrid::new(0.25, 0.3, 3).unwrap();
        let line = straight_line_geodesic(&a, &b, 401).unwrap();
        let polar = embedding_path_to_polar(&line).unwrap();
        let model = PolarModel::new(3);
        let len = path_length(&ModelMetric::new(&model, &grid, &noise), &polar, 16).unwrap();
        let d = mahalanobis(&a, &b, &noise);
        assert!((len - d).abs() < 1e-8 * d, "{len} vs {d}");
    }

    #[test]
    fn reparametrisation_invariance() {
        let (a, b, noise) = spectra();
        let (x, y) = (spectrum_to_embedding(&a), spectrum_to_embedding(&b));
        let sig = GeodesicPath::uniform_sigmas(201);
        let warped = GeodesicPath::from_fn(&sig, |s| {
            let t = s * s * (3.0 - 2.0 * s);
            Ok(x.iter().zip(&y).map(|(p, q)| p + t * (q - p)).collect())
        })
        .unwrap();
        let len = path_length(&EmbeddingMetric::new(&noise), &warped, 64).unwrap();
        let d = mahalanobis(&a, &b, &noise);
        assert!((len - d).abs() < 1e-9 * d);
    }

    #[test]
    fn alpha_csv_header() {
        let p = GeodesicPath::new(vec![
            (0.0, vec![1.0, 0.5, 4.0]),
            (1.0, vec![2.0, 0.7, -4.0]),
        ])
        .unwrap();
        let mut buf = Vec::new();
        p.write_alpha_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "sigma,alpha,psi_1,psi_2");
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert!((first[3] - (4.0 - 2.0 * PI)).abs() < 1e-15);
    }
}
