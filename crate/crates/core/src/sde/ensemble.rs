//! Particle ensemble state.

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::measures::EmpiricalMeasure;

/// N particles with their accumulated local times. `rng_ids` are the
/// per-particle noise keys; relabeling particles together with their keys
/// permutes trajectories exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub time: f64,
    dim: usize,
    positions: Vec<f64>,
    local_time: Vec<f64>,
    tilde_local_time: Vec<f64>,
    rng_ids: Vec<u64>,
    steps_taken: u64,
}

impl ParticleEnsemble {
    pub fn new(dim: usize, positions: Vec<f64>) -> Result<Self> {
        if dim == 0 || positions.is_empty() || positions.len() % dim != 0 {
            return Err(Error::invalid("positions", "flat length must be a positive multiple of dim"));
        }
        if !positions.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { what: "positions".into() });
        }
        let n = positions.len() / dim;
        Ok(ParticleEnsemble {
            time: 0.0,
            dim,
            positions,
            local_time: vec![0.0; n],
            tilde_local_time: vec![0.0; n],
            rng_ids: (0..n as u64).collect(),
            steps_taken: 0,
        })
    }

    pub fn from_measure(mu: &EmpiricalMeasure) -> Result<Self> {
        if !mu.is_uniform() {
            return Err(Error::invalid("measure", "ensemble initials must be uniform atoms"));
        }
        Self::new(mu.dim(), mu.atoms_flat().to_vec())
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn local_time(&self) -> &[f64] {
        &self.local_time
    }

    pub fn tilde_local_time(&self) -> &[f64] {
        &self.tilde_local_time
    }

    pub fn rng_ids(&self) -> &[u64] {
        &self.rng_ids
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (&mut Vec<f64>, &mut Vec<f64>, &mut Vec<f64>, &[u64]) {
        (
            &mut self.positions,
            &mut self.local_time,
            &mut self.tilde_local_time,
            &self.rng_ids,
        )
    }

    pub(crate) fn advance_clock(&mut self, dt: f64) {
        self.time += dt;
        self.steps_taken += 1;
    }

    /// Empirical law of the current positions.
    pub fn empirical(&self) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform(self.dim, self.positions.clone()).expect("valid ensemble")
    }

    pub fn validate_in(&self, domain: &Domain) -> Result<()> {
        if domain.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: self.dim });
        }
        for i in 0..self.len() {
            if !domain.contains_fast(self.position(i)) {
                return Err(Error::invalid(
                    "positions",
                    format!("particle {i} at {:?} is outside the domain", self.position(i)),
                ));
            }
        }
        for i in 0..self.len() {
            if self.tilde_local_time[i] > self.local_time[i] + 1e-12 {
                return Err(Error::invalid("local_time", "tilde exceeds total"));
            }
        }
        Ok(())
    }

    /// Relabel particles (positions, local times and noise keys together).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        if perm.len() != n {
            return Err(Error::invalid("perm", "length mismatch"));
        }
        let mut out = self.clone();
        for (new_i, &old_i) in perm.iter().enumerate() {
            out.positions[new_i * self.dim..(new_i + 1) * self.dim]
                .copy_from_slice(self.position(old_i));
            out.local_time[new_i] = self.local_time[old_i];
            out.tilde_local_time[new_i] = self.tilde_local_time[old_i];
            out.rng_ids[new_i] = self.rng_ids[old_i];
        }
        Ok(out)
    }
}
