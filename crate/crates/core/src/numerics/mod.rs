//! Small numerical building blocks shared by the geodesic solvers and oracles.

pub mod finite_diff;
pub mod ode;
pub mod quadrature;

pub use finite_diff::{apply_weights, fornberg_weights, StencilDerivatives};
pub use ode::rk4_fixed;
pub use quadrature::GaussLegendre;
