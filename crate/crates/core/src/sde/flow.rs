//! Time-indexed flows of empirical measures.

use crate::error::{Error, Result};
use crate::measures::EmpiricalMeasure;

/// A measure-valued path on a strictly increasing time grid. All snapshots
/// carry the same number of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFlow {
    times: Vec<f64>,
    snapshots: Vec<EmpiricalMeasure>,
}

impl MeasureFlow {
    pub fn new() -> Self {
        MeasureFlow { times: Vec::new(), snapshots: Vec::new() }
    }

    /// Flow that is constant in time.
    pub fn constant(times: &[f64], snapshot: EmpiricalMeasure) -> Result<Self> {
        let mut flow = MeasureFlow::new();
        for &t in times {
            flow.push(t, snapshot.clone())?;
        }
        Ok(flow)
    }

    pub fn push(&mut self, t: f64, snapshot: EmpiricalMeasure) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::GridMismatch {
                    reason: format!("time {t} does not extend grid ending at {last}"),
                });
            }
        }
        if let Some(first) = self.snapshots.first() {
            if first.len() != snapshot.len() || first.dim() != snapshot.dim() {
                return Err(Error::GridMismatch {
                    reason: "snapshot atom count or dimension changed".into(),
                });
            }
        }
        self.times.push(t);
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshot(&self, i: usize) -> &EmpiricalMeasure {
        &self.snapshots[i]
    }

    pub fn terminal(&self) -> &EmpiricalMeasure {
        self.snapshots.last().expect("nonempty flow")
    }

    /// Latest snapshot at or before `t` (piecewise-constant interpolation).
    pub fn snapshot_at_or_before(&self, t: f64) -> Result<&EmpiricalMeasure> {
        if self.times.is_empty() || t < self.times[0] - 1e-12 {
            return Err(Error::GridMismatch { reason: format!("time {t} precedes the flow") });
        }
        let idx = self.times.partition_point(|&s| s <= t + 1e-12);
        Ok(&self.snapshots[idx - 1])
    }

    /// Snapshot index whose time matches `t` within `tol`.
    pub fn index_of_time(&self, t: f64, tol: f64) -> Option<usize> {
        let idx = self.times.partition_point(|&s| s < t - tol);
        if idx < self.times.len() && (self.times[idx] - t).abs() <= tol {
            Some(idx)
        } else {
            None
        }
    }

    pub fn same_grid(&self, other: &MeasureFlow) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
    }
}

impl Default for MeasureFlow {
    fn default() -> Self {
        Self::new()
    }
}
