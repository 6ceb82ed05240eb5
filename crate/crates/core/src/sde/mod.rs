//! Coefficients, the interacting particle simulator, the frozen-flow map
//! with its fixed-point iteration, and the bridging coupling.

mod coeffs;
mod config;
mod coupling;
mod ensemble;
mod flow;
mod picard;
mod stepper;

pub use coeffs::{
    custom_drift as custom_drift_by_name, mean_field_drift, state_sigma as state_sigma_by_name,
    CoefficientSpec, Diffusion, Drift, InteractionKernel, Matrix, MeasureMode, Potential,
};
pub use config::{InitialMeasure, SimConfig};
pub use coupling::{couple_pair, CouplingRecord};
pub use ensemble::ParticleEnsemble;
pub use flow::MeasureFlow;
pub use picard::{apply_h, apply_h_full, picard_solve, snapshot_times, PicardIteration, PicardResult};
pub use stepper::{
    simulate_mckean, simulate_with_observer, step_particles, SimOutput, TrajectoryStats,
};
