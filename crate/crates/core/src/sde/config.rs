//! Simulation configuration and initial-condition sampling.

use serde::{Deserialize, Serialize};

use super::coeffs::CoefficientSpec;
use super::ensemble::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::measures::EmpiricalMeasure;
use crate::rng::{stream, CounterRng};

/// Initial distribution of the particles.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialMeasure {
    Dirac { point: Vec<f64> },
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Isotropic Gaussian truncated to the domain by rejection.
    Gaussian { mean: Vec<f64>, sd: f64 },
}

impl InitialMeasure {
    /// The same law translated by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<InitialMeasure> {
        let add = |v: &[f64]| -> Result<Vec<f64>> {
            if v.len() != shift.len() {
                return Err(Error::DimensionMismatch { expected: v.len(), got: shift.len() });
            }
            Ok(v.iter().zip(shift).map(|(a, b)| a + b).collect())
        };
        Ok(match self {
            InitialMeasure::Dirac { point } => InitialMeasure::Dirac { point: add(point)? },
            InitialMeasure::UniformBox { lo, hi } => {
                InitialMeasure::UniformBox { lo: add(lo)?, hi: add(hi)? }
            }
            InitialMeasure::Gaussian { mean, sd } => {
                InitialMeasure::Gaussian { mean: add(mean)?, sd: *sd }
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Horizon `T`.
    pub horizon: f64,
    /// Step size `h`.
    pub dt: f64,
    /// Particle count `N`.
    pub n_particles: usize,
    pub seed: u64,
    /// Moment index `k` used by distance diagnostics.
    pub moment_index: f64,
    /// Record a measure snapshot every `snapshot_stride` steps
    /// (0 selects roughly 200 snapshots). The terminal time is always kept.
    pub snapshot_stride: usize,
    /// Worker threads for the particle update; results do not depend on it.
    pub threads: usize,
    pub domain: Domain,
    pub coefficients: CoefficientSpec,
    pub initial: InitialMeasure,
}

impl SimConfig {
    pub fn new(
        domain: Domain,
        coefficients: CoefficientSpec,
        initial: InitialMeasure,
        horizon: f64,
        dt: f64,
        n_particles: usize,
        seed: u64,
    ) -> Self {
        SimConfig {
            horizon,
            dt,
            n_particles,
            seed,
            moment_index: 2.0,
            snapshot_stride: 0,
            threads: 1,
            domain,
            coefficients,
            initial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("sim.T", "horizon must be positive and finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("sim.h", "step size must be positive and finite"));
        }
        if self.dt > self.horizon {
            return Err(Error::invalid("sim.h", "step size exceeds the horizon"));
        }
        if self.n_particles == 0 {
            return Err(Error::invalid("sim.N", "need at least one particle"));
        }
        if !(self.moment_index >= 0.0) {
            return Err(Error::invalid("sim.k", "moment index must be nonnegative"));
        }
        self.coefficients.validate(self.domain.dim())?;
        match &self.initial {
            InitialMeasure::Dirac { point } => {
                if !self.domain.contains(point)? {
                    return Err(Error::invalid("initial", "dirac point outside the domain"));
                }
            }
            InitialMeasure::UniformBox { lo, hi } => {
                if lo.len() != self.domain.dim() || hi.len() != self.domain.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.domain.dim(),
                        got: lo.len().max(hi.len()),
                    });
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::invalid("initial", "need lo <= hi"));
                }
            }
            InitialMeasure::Gaussian { mean, sd } => {
                if mean.len() != self.domain.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.domain.dim(),
                        got: mean.len(),
                    });
                }
                if !(*sd > 0.0) {
                    return Err(Error::invalid("initial.sd", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// The step grid `0 = t_0 < ... < t_M = T` with constant step `dt`
    /// except possibly a short final step; consecutive differences telescope
    /// to exactly `T`.
    pub fn time_grid(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        let mut n = 1u64;
        let tol = 1e-9 * self.horizon.max(1.0);
        loop {
            let t = n as f64 * self.dt;
            if t >= self.horizon - tol {
                break;
            }
            times.push(t);
            n += 1;
        }
        times.push(self.horizon);
        times
    }

    pub fn effective_snapshot_stride(&self, n_steps: usize) -> usize {
        if self.snapshot_stride > 0 {
            self.snapshot_stride
        } else {
            (n_steps / 200).max(1)
        }
    }

    /// Sample the initial ensemble; deterministic in the seed, regardless of
    /// rejection retries.
    pub fn sample_initial(&self) -> Result<ParticleEnsemble> {
        let dim = self.domain.dim();
        let rng = CounterRng::new(self.seed, stream::INIT);
        let mut positions = Vec::with_capacity(self.n_particles * dim);
        match &self.initial {
            InitialMeasure::Dirac { point } => {
                for _ in 0..self.n_particles {
                    positions.extend_from_slice(point);
                }
            }
            InitialMeasure::UniformBox { lo, hi } => {
                for p in 0..self.n_particles as u64 {
                    let r = rng.at(p);
                    let mut accepted = None;
                    for attempt in 0..10_000u64 {
                        let x: Vec<f64> = (0..dim)
                            .map(|j| {
                                lo[j] + r.uniform(attempt, j as u64) * (hi[j] - lo[j])
                            })
                            .collect();
                        if self.domain.contains_fast(&x) {
                            accepted = Some(x);
                            break;
                        }
                    }
                    let x = accepted.ok_or_else(|| Error::Unconverged {
                        what: "initial rejection sampling (uniform box)".into(),
                    })?;
                    positions.extend_from_slice(&x);
                }
            }
            InitialMeasure::Gaussian { mean, sd } => {
                for p in 0..self.n_particles as u64 {
                    let r = rng.at(p);
                    let mut accepted = None;
                    for attempt in 0..10_000u64 {
                        let x: Vec<f64> = (0..dim)
                            .map(|j| mean[j] + sd * r.normal(attempt, j as u64))
                            .collect();
                        if self.domain.contains_fast(&x) {
                            accepted = Some(x);
                            break;
                        }
                    }
                    let x = accepted.ok_or_else(|| Error::Unconverged {
                        what: "initial rejection sampling (gaussian)".into(),
                    })?;
                    positions.extend_from_slice(&x);
                }
            }
        }
        ParticleEnsemble::new(dim, positions)
    }

    /// Initial law as an explicit measure (the sampled atoms).
    pub fn initial_measure(&self) -> Result<EmpiricalMeasure> {
        Ok(self.sample_initial()?.empirical())
    }
}
