//! Fisher–Rao geometry of finite-energy signals observed in additive
//! circular complex Gaussian noise.
//!
//! A signal is described on a discrete frequency band by its magnitude and
//! phase spectra. The crate provides the Fisher metric and Christoffel
//! symbols of parametric signal models, closed-form geodesics and distances
//! on the full signal manifold and on the known-magnitude submanifold, and
//! independent numerical oracles (Monte Carlo Fisher estimates, finite
//! difference Christoffels, geodesic shooting, quadrature path lengths).

// Guards are written as !(x > 0.0) so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod error;
pub mod experiments;
pub mod geodesic;
pub mod metric;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
