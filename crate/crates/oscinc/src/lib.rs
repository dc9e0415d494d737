//! Constructive multiplicity for differential inclusions with oscillating
//! potentials.
//!
//! The library builds finite families of localized solutions to
//! `-div(grad u) in dF(u) + lambda dG(u)` on an interval or square, where
//! `F` oscillates toward zero amplitude or infinite amplitude and `G` is
//! a one-signed gate. The pipeline: interval-valued gradient calculus for
//! the densities (`model`), certified slabs where the shifted gradient
//! envelope is strictly negative (`oscillation`), projected descent for
//! the truncated energies on uniform Dirichlet grids (`mesh`,
//! `minimize`), and the level walk that stacks distinct minimizers with
//! admissible gate-weight thresholds (`cascade`). `config` and `report`
//! carry runs from TOML to reproducible artifacts.

pub mod cascade;
pub mod config;
pub mod error;
pub mod mesh;
pub mod minimize;
pub mod model;
pub mod oscillation;
pub mod report;

pub use cascade::{
    build_effective_model, run_cascade, verify_family, CascadeOutcome, CascadeParams, CaseId,
    EffectiveModel, SolutionRecord, VerificationReport,
};
pub use error::Error;
pub use mesh::Mesh;
pub use minimize::{
    gamma_truncate, minimize_over_ball, EnergyContext, MinimizeOptions, SolveOutcome, SolveStatus,
    SubgradStrategy,
};
pub use model::{lebourg_check, FunctionModel, GradInterval, LebourgReport};
pub use oscillation::{
    certify_window, compute_l0, estimate_limits, find_stability_intervals, GridSpec,
    IntervalScan, LimitEstimates, MarginSpec, Regime, StabilityInterval, ThresholdReport,
};
