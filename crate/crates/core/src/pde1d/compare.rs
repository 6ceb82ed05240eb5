//! Particle-vs-density cross validation: `L^1` distance between the
//! histogram of a particle flow and the finite-volume density, per time.

use super::grid::DensityGrid;
use crate::error::{Error, Result};
use crate::sde::MeasureFlow;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub l1: f64,
}

/// For every snapshot time of `flow`, find the matching stored density (the
/// grids must share times) and report the `L^1` distance between the
/// particle histogram on the PDE cells and the density.
pub fn compare_particle_pde(
    flow: &MeasureFlow,
    pde: &[DensityGrid],
) -> Result<Vec<ComparisonRow>> {
    if pde.is_empty() || flow.is_empty() {
        return Err(Error::invalid("inputs", "empty flow or trajectory"));
    }
    let mut rows = Vec::new();
    for (i, &t) in flow.times().iter().enumerate() {
        let grid = pde
            .iter()
            .find(|g| (g.time - t).abs() <= 1e-9 * t.max(1.0))
            .ok_or_else(|| Error::GridMismatch {
                reason: format!("no stored density at t = {t}"),
            })?;
        let snap = flow.snapshot(i);
        if snap.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: snap.dim() });
        }
        let g = grid.cells();
        let dx = grid.dx();
        let mut hist = vec![0.0f64; g];
        for p in 0..snap.len() {
            let x = snap.atom(p)[0];
            let idx = (((x - grid.a) / dx).floor() as isize).clamp(0, g as isize - 1);
            hist[idx as usize] += 1.0;
        }
        let inv = 1.0 / (snap.len() as f64 * dx);
        let l1 = hist
            .iter()
            .zip(&grid.rho)
            .map(|(h, r)| (h * inv - r).abs() * dx)
            .sum();
        rows.push(ComparisonRow { t, l1 });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::EmpiricalMeasure;

    #[test]
    fn uniform_against_uniform_is_noise_level() {
        let grid = DensityGrid::new(0.0, 1.0, 20).unwrap();
        let rng = crate::rng::CounterRng::new(2, crate::rng::stream::SCRATCH);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|i| rng.uniform(i as u64, 0)).collect();
        let mut flow = MeasureFlow::new();
        flow.push(0.0, EmpiricalMeasure::from_samples_1d(&xs).unwrap()).unwrap();
        let rows = compare_particle_pde(&flow, &[grid]).unwrap();
        assert!(rows[0].l1 < 0.02, "noise floor exceeded: {}", rows[0].l1);
    }

    #[test]
    fn mismatched_grids_error() {
        let grid = DensityGrid::new(0.0, 1.0, 20).unwrap();
        let mut flow = MeasureFlow::new();
        flow.push(0.5, EmpiricalMeasure::dirac(&[0.5]).unwrap()).unwrap();
        assert!(matches!(
            compare_particle_pde(&flow, &[grid]),
            Err(Error::GridMismatch { .. })
        ));
    }
}
