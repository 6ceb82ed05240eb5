//! The frozen-flow solution map and its fixed-point iteration.
//!
//! `apply_h` simulates N independent particles whose drift is evaluated
//! against a supplied measure flow instead of the live ensemble; the output
//! law flow is the image of the input under the solution map. Iterating the
//! map with common random numbers contracts (in the regimes the simulator
//! targets) to the interacting mean-field law.

use super::config::SimConfig;
use super::ensemble::ParticleEnsemble;
use super::flow::MeasureFlow;
use super::stepper::{run_simulation, MeasureSource, SimOutput};
use crate::error::{Error, Result};
use crate::measures::{wasserstein_k, EmpiricalMeasure};

/// One iteration record of the fixed-point loop.
#[derive(Debug, Clone)]
pub struct PicardIteration {
    pub iteration: usize,
    /// `sup_t W_k(mu^{m}_t, mu^{m-1}_t)` over the snapshot grid.
    pub sup_distance: f64,
    /// `sup_t e^{-lambda t} W_k(...)`, the weighted diagnostic.
    pub weighted_distance: f64,
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub flow: MeasureFlow,
    pub iterations: Vec<PicardIteration>,
    pub converged: bool,
}

/// Apply the frozen-flow solution map to `flow`, starting from the atoms of
/// `gamma`. The flow's grid must equal the configuration's snapshot grid.
pub fn apply_h(flow: &MeasureFlow, cfg: &SimConfig, gamma: &EmpiricalMeasure) -> Result<MeasureFlow> {
    Ok(apply_h_full(flow, cfg, gamma)?.flow)
}

/// Variant returning the full simulation output (terminal local times etc.).
pub fn apply_h_full(
    flow: &MeasureFlow,
    cfg: &SimConfig,
    gamma: &EmpiricalMeasure,
) -> Result<SimOutput> {
    if gamma.len() != cfg.n_particles {
        return Err(Error::invalid(
            "gamma",
            format!("expected {} atoms, got {}", cfg.n_particles, gamma.len()),
        ));
    }
    let expected = snapshot_times(cfg);
    if flow.times().len() != expected.len()
        || flow
            .times()
            .iter()
            .zip(&expected)
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::GridMismatch {
            reason: "flow grid differs from the configuration's snapshot grid".into(),
        });
    }
    let ens = ParticleEnsemble::from_measure(gamma)?;
    run_simulation(cfg, ens, MeasureSource::Frozen(flow), None)
}

/// Snapshot times implied by the configuration.
pub fn snapshot_times(cfg: &SimConfig) -> Vec<f64> {
    let grid = cfg.time_grid();
    let n_steps = grid.len() - 1;
    let stride = cfg.effective_snapshot_stride(n_steps);
    let mut times = vec![grid[0]];
    for n in 0..n_steps {
        if (n + 1) % stride == 0 || n + 1 == n_steps {
            times.push(grid[n + 1]);
        }
    }
    times
}

/// Fixed-point iteration of the frozen-flow map with common random numbers
/// across iterations. Starts from the flow frozen at `gamma`; stops when the
/// successive sup-distance drops below `tol`. Non-convergence is reported in
/// the result, not as an error.
pub fn picard_solve(
    cfg: &SimConfig,
    gamma: &EmpiricalMeasure,
    max_iter: usize,
    tol: f64,
    lambda: f64,
) -> Result<PicardResult> {
    if max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be at least 1"));
    }
    let times = snapshot_times(cfg);
    let mut current = MeasureFlow::constant(&times, gamma.clone())?;
    let mut iterations = Vec::new();
    let mut converged = false;
    let k = cfg.moment_index;
    for m in 1..=max_iter {
        let next = apply_h(&current, cfg, gamma)?;
        let mut sup = 0.0f64;
        let mut weighted = 0.0f64;
        for (i, &t) in next.times().iter().enumerate() {
            let d = wasserstein_k(k, next.snapshot(i), current.snapshot(i))?;
            sup = sup.max(d);
            weighted = weighted.max((-lambda * t).exp() * d);
        }
        iterations.push(PicardIteration {
            iteration: m,
            sup_distance: sup,
            weighted_distance: weighted,
        });
        current = next;
        if sup < tol {
            converged = true;
            break;
        }
    }
    Ok(PicardResult { flow: current, iterations, converged })
}
