//! Fisher information metric, Christoffel symbols of the first kind, and
//! their numerical oracles.

mod christoffel;
mod fisher;
mod monte_carlo;

pub use christoffel::{christoffel, christoffel_fd, ChristoffelTensor, DEFAULT_FD_STEP};
pub use fisher::{fisher_matrix, path_speed, FisherMatrix};
pub use monte_carlo::{monte_carlo_fisher, MonteCarloFisher};
