//! Reference experiments, the acceptance suite, and object inspection
//! behind the command-line front end.

pub mod acceptance;
mod figure;
mod inspect;

pub use acceptance::{
    run_acceptance_suite, run_criterion, Check, Comparison, CriterionResult, Scale, Verdict,
    CRITERIA,
};
pub use figure::{
    run_figure_case, ExperimentConfig, FigureDataset, FigureRow, Sweep, CASE_NAMES, LOG_DECADES,
};
pub use inspect::{inspect, parse_model_spec, InspectSubject, ModelSpec};
