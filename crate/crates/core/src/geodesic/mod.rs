//! Geodesics: straight lines of the full signal manifold, closed-form
//! geodesics of the known-magnitude submanifold, the linearly-dependent
//! gradients (LDG) residual, a shooting oracle and quadrature path lengths.

mod alpha;
mod ldg;
mod path;
mod shooting;

pub use alpha::{solve_alpha_geodesic, weighted_phase_gap, AlphaGeodesic, PhaseGap};
pub use ldg::{ldg_residual, LdgResidual};
pub use path::{
    embedding_path_to_polar, embedding_to_spectrum, path_length, spectrum_to_embedding,
    straight_line_geodesic, EmbeddingMetric, GeodesicPath, ModelMetric, PathMetric,
    DEFAULT_QUADRATURE_NODES,
};
pub use shooting::{shoot_alpha_geodesic, ShootingSolution};
