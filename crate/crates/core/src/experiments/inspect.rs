use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geodesic::solve_alpha_geodesic;
use crate::metric::{christoffel, fisher_matrix};
use crate::model::{eval_model, FrequencyGrid, KnownMagnitudeModel, NoiseProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    fn expand(&self, what: &'static str, n: usize) -> Result<Vec<f64>> {
        match self {
            ScalarOrList::Scalar(v) => Ok(vec![*v; n]),
            ScalarOrList::List(v) if v.len() == n => Ok(v.clone()),
            ScalarOrList::List(v) => Err(Error::LengthMismatch {
                what,
                expected: n,
                found: v.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nu0: f64,
    #[serde(rename = "bandwidth_B")]
    pub bandwidth: f64,
    pub n_freqs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub gamma0: ScalarOrList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSpec {
    pub alpha: f64,
    pub phase_coeffs: Vec<f64>,
}

/// A known-magnitude model with two endpoints. Phase coefficients are in
/// increasing powers of ν; the shorter list is padded with zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub grid: GridSpec,
    pub noise: NoiseSpec,
    pub rho0: ScalarOrList,
    pub endpoints: [EndpointSpec; 2],
}

/// Parses a model spec, reporting the line, column and field path of the
/// first problem.
pub fn parse_model_spec(text: &str) -> Result<ModelSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            location: format!(
                "line {} column {} at `{path}`",
                inner.line(),
                inner.column()
            ),
            message: inner.to_string(),
        }
    })
}

struct Built {
    grid: FrequencyGrid,
    noise: NoiseProfile,
    rho0: Vec<f64>,
    model: KnownMagnitudeModel,
    params: [Vec<f64>; 2],
}

impl ModelSpec {
    fn build(&self) -> Result<Built> {
        let grid = FrequencyGrid::new(self.grid.nu0, self.grid.bandwidth, self.grid.n_freqs)?;
        let n = grid.len();
        let noise = NoiseProfile::new(self.noise.gamma0.expand("noise gamma0", n)?)?;
        let rho0 = self.rho0.expand("rho0", n)?;
        let n_coeffs = self
            .endpoints
            .iter()
            .map(|e| e.phase_coeffs.len())
            .max()
            .unwrap_or(0)
            .max(1);
        let model = KnownMagnitudeModel::new(rho0.clone(), n_coeffs)?;
        let params = self.endpoints.clone().map(|e| {
            let mut c = e.phase_coeffs;
            c.resize(n_coeffs, 0.0);
            KnownMagnitudeModel::params(e.alpha, &c)
        });
        for xi in &params {
            eval_model(&model, xi, &grid)?;
        }
        Ok(Built {
            grid,
            noise,
            rho0,
            model,
            params,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InspectSubject {
    Metric,
    Christoffel,
    Geodesic,
}

impl FromStr for InspectSubject {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metric" => Ok(Self::Metric),
            "christoffel" => Ok(Self::Christoffel),
            "geodesic" => Ok(Self::Geodesic),
            _ => Err(Error::Domain(format!(
                "unknown subject `{s}`, expected metric, christoffel or geodesic"
            ))),
        }
    }
}

impl fmt::Display for InspectSubject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Metric => "metric",
            Self::Christoffel => "christoffel",
            Self::Geodesic => "geodesic",
        })
    }
}

/// JSON dump of the metric or Christoffel symbols at both endpoints, or of
/// the closed-form geodesic between them.
pub fn inspect(subject: InspectSubject, spec: &ModelSpec) -> Result<Value> {
    let b = spec.build()?;
    Ok(match subject {
        InspectSubject::Metric => {
            let items = b
                .params
                .iter()
                .map(|xi| {
                    let g = fisher_matrix(&b.model, xi, &b.grid, &b.noise)?;
                    Ok(json!({ "params": xi, "metric": serde_json::to_value(g)? }))
                })
                .collect::<Result<Vec<_>>>()?;
            json!({ "subject": "metric", "endpoints": items })
        }
        InspectSubject::Christoffel => {
            let items = b
                .params
                .iter()
                .map(|xi| {
                    let t = christoffel(&b.model, xi, &b.grid, &b.noise)?;
                    Ok(json!({ "params": xi, "christoffel": serde_json::to_value(t)? }))
                })
                .collect::<Result<Vec<_>>>()?;
            json!({ "subject": "christoffel", "endpoints": items })
        }
        InspectSubject::Geodesic => {
            let [a, z] = &b.params;
            let s1 = eval_model(&b.model, a, &b.grid)?;
            let s2 = eval_model(&b.model, z, &b.grid)?;
            let g =
                solve_alpha_geodesic(a[0], z[0], s1.psi(), s2.psi(), &b.grid, &b.noise, &b.rho0)?;
            json!({ "subject": "geodesic", "length": g.length(), "geodesic": serde_json::to_value(g)? })
        }
    })
}
