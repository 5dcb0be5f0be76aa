//! Frequency grids, noise profiles, signal spectra, parametric signal models
//! and the complex-Gaussian observation law.

mod grid;
mod observation;
mod phase;
mod signal_model;
mod spectrum;
pub mod table;

pub use grid::{FrequencyGrid, NoiseProfile};
pub use observation::{
    log_likelihood, sample_observation, sample_observation_with, score, Observation,
};
pub use phase::{unwrap_phase, wrap_phase, wrap_phase_unchecked};
pub use signal_model::{
    eval_model, split_params, BinPhaseModel, ExpPolyModel, KnownMagnitudeModel, PolarModel,
    SignalModel,
};
pub use spectrum::SignalSpectrum;
