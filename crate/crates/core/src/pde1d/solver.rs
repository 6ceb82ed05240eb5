//! Explicit conservative finite-volume steps.

use super::grid::{DensityGrid, DensityGrid2};
use crate::error::{Error, Result};
use crate::measures::EmpiricalMeasure;
use crate::sde::{mean_field_drift, CoefficientSpec, Diffusion};

const CFL_FACTOR: f64 = 0.4;

/// `a(x) = (sigma sigma^*)(x)` as a scalar (1D / isotropic coefficients).
pub(crate) fn a_coef(coeffs: &CoefficientSpec, x: f64) -> Result<f64> {
    Ok(match &coeffs.diffusion {
        Diffusion::Scalar { value } => value * value,
        Diffusion::Constant { matrix } => {
            if matrix.dim() != (1, 1) {
                return Err(Error::invalid("diffusion", "1D solver needs a 1x1 matrix"));
            }
            matrix.rows[0][0] * matrix.rows[0][0]
        }
        Diffusion::StateDependent { name } => {
            let f = crate::sde::state_sigma_by_name(name)?;
            let s = f(&[x]);
            s * s
        }
    })
}

/// Grid density as a weighted atomic measure for the mean-field drift.
pub(crate) fn grid_measure(grid: &DensityGrid) -> Result<EmpiricalMeasure> {
    let dx = grid.dx();
    let atoms: Vec<f64> = (0..grid.cells()).map(|i| grid.center(i)).collect();
    let raw: Vec<f64> = grid.rho.iter().map(|r| (r * dx).max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("density", "no mass"));
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    EmpiricalMeasure::weighted(1, atoms, weights)
}

/// A stable explicit step size for the given grid and coefficients.
pub fn stable_dt(grid: &DensityGrid, coeffs: &CoefficientSpec) -> Result<f64> {
    let dx = grid.dx();
    let mu = grid_measure(grid)?;
    let mut a_max: f64 = 0.0;
    let mut v_max: f64 = 0.0;
    for i in 0..=grid.cells() {
        let x = grid.a + i as f64 * dx;
        a_max = a_max.max(a_coef(coeffs, x)?);
        let b = mean_field_drift(coeffs, &[x], &mu, grid.time)?;
        v_max = v_max.max(b[0].abs());
    }
    let diff = if a_max > 0.0 { 0.25 * dx * dx / a_max } else { f64::INFINITY };
    let adv = if v_max > 0.0 { 0.5 * dx / v_max } else { f64::INFINITY };
    Ok(diff.min(adv))
}

/// One explicit conservative update with zero total flux at the boundary
/// faces. Errors when the diffusive CFL bound `h_t <= 0.4 dx^2 / max(a)` is
/// violated or the update produces densities below `-1e-12`.
pub fn fp_step(grid: &DensityGrid, coeffs: &CoefficientSpec, h_t: f64) -> Result<DensityGrid> {
    if !(h_t > 0.0) {
        return Err(Error::invalid("h_t", "must be positive"));
    }
    let g = grid.cells();
    let dx = grid.dx();
    let mu = grid_measure(grid)?;
    let t = grid.time;

    // face coefficients (faces 0..=g; boundary fluxes stay zero)
    let mut a_max: f64 = 0.0;
    let mut flux = vec![0.0f64; g + 1];
    for j in 0..=g {
        let x = grid.a + j as f64 * dx;
        a_max = a_max.max(a_coef(coeffs, x)?);
    }
    let limit = CFL_FACTOR * dx * dx / a_max.max(1e-300);
    if a_max > 0.0 && h_t > limit {
        return Err(Error::CflViolation { dt: h_t, limit });
    }
    for j in 1..g {
        let x = grid.a + j as f64 * dx;
        let d = 0.5 * a_coef(coeffs, x)?;
        let v = mean_field_drift(coeffs, &[x], &mu, t)?[0];
        let upwind = if v > 0.0 { grid.rho[j - 1] } else { grid.rho[j] };
        flux[j] = v * upwind - d * (grid.rho[j] - grid.rho[j - 1]) / dx;
    }

    let mut out = grid.clone();
    for i in 0..g {
        out.rho[i] = grid.rho[i] - h_t * (flux[i + 1] - flux[i]) / dx;
        if out.rho[i] < -1e-12 {
            return Err(Error::NegativeDensity { cell: i, value: out.rho[i] });
        }
    }
    out.time = grid.time + h_t;
    Ok(out)
}

/// March the density to `t_end`, storing every `store_every`-th state (the
/// initial and final states are always kept).
pub fn fp_run(
    grid0: &DensityGrid,
    coeffs: &CoefficientSpec,
    t_end: f64,
    h_t: f64,
    store_every: usize,
) -> Result<Vec<DensityGrid>> {
    if !(t_end > grid0.time) {
        return Err(Error::invalid("t_end", "must exceed the initial time"));
    }
    let keep = store_every.max(1);
    let mut traj = vec![grid0.clone()];
    let mut cur = grid0.clone();
    let mut n = 0usize;
    while cur.time < t_end - 1e-12 * t_end.max(1.0) {
        let dt = h_t.min(t_end - cur.time);
        cur = fp_step(&cur, coeffs, dt)?;
        n += 1;
        if n % keep == 0 {
            traj.push(cur.clone());
        }
    }
    if traj.last().map(|g| g.time) != Some(cur.time) {
        traj.push(cur.clone());
    }
    Ok(traj)
}

/// March the density so that a state is stored at every time in `times`
/// (strictly increasing, starting at or after the initial time). The step
/// size is capped by the stability bound recomputed at every target.
pub fn fp_run_to_times(
    grid0: &DensityGrid,
    coeffs: &CoefficientSpec,
    times: &[f64],
    h_t: f64,
) -> Result<Vec<DensityGrid>> {
    let mut cur = grid0.clone();
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < cur.time - 1e-12 {
            return Err(Error::GridMismatch {
                reason: format!("target time {target} precedes current time {}", cur.time),
            });
        }
        let dt_cap = h_t.min(stable_dt(&cur, coeffs)?);
        while cur.time < target - 1e-12 * target.max(1.0) {
            let dt = dt_cap.min(target - cur.time);
            cur = fp_step(&cur, coeffs, dt)?;
        }
        let mut stored = cur.clone();
        stored.time = target;
        out.push(stored);
    }
    Ok(out)
}

/// One explicit conservative step on a 2D tensor grid; isotropic diffusion
/// only (`sigma sigma^*` parallel to the identity).
pub fn fp_step_2d(
    grid: &DensityGrid2,
    coeffs: &CoefficientSpec,
    h_t: f64,
) -> Result<DensityGrid2> {
    let [gx, gy] = grid.cells;
    let [dx, dy] = grid.dx();
    // density as a 2D weighted measure
    let mut atoms = Vec::with_capacity(gx * gy * 2);
    let mut raw = Vec::with_capacity(gx * gy);
    for ix in 0..gx {
        for iy in 0..gy {
            let c = grid.center(ix, iy);
            atoms.extend_from_slice(&c);
            raw.push((grid.rho[grid.idx(ix, iy)] * dx * dy).max(0.0));
        }
    }
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mu = EmpiricalMeasure::weighted(2, atoms, weights)?;

    let a_of = |x: &[f64]| -> Result<f64> {
        Ok(match &coeffs.diffusion {
            Diffusion::Scalar { value } => value * value,
            Diffusion::Constant { matrix } => {
                // isotropy requirement: sigma sigma^* = s^2 I
                let m = &matrix.rows;
                let s2 = m[0][0] * m[0][0] + m[0][1] * m[0][1];
                let t2 = m[1][0] * m[1][0] + m[1][1] * m[1][1];
                let cross = m[0][0] * m[1][0] + m[0][1] * m[1][1];
                if (s2 - t2).abs() > 1e-12 || cross.abs() > 1e-12 {
                    return Err(Error::invalid("diffusion", "2D solver needs isotropic sigma"));
                }
                s2
            }
            Diffusion::StateDependent { name } => {
                let f = crate::sde::state_sigma_by_name(name)?;
                let s = f(x);
                s * s
            }
        })
    };

    let a_max = a_of(&[0.5 * (grid.lo[0] + grid.hi[0]), 0.5 * (grid.lo[1] + grid.hi[1])])?;
    let limit = CFL_FACTOR * dx.min(dy).powi(2) / (2.0 * a_max.max(1e-300));
    if a_max > 0.0 && h_t > limit {
        return Err(Error::CflViolation { dt: h_t, limit });
    }

    let mut out = grid.clone();
    // x-direction fluxes
    let mut div = vec![0.0f64; gx * gy];
    for iy in 0..gy {
        for jx in 1..gx {
            let xf = [grid.lo[0] + jx as f64 * dx, grid.lo[1] + (iy as f64 + 0.5) * dy];
            let d = 0.5 * a_of(&xf)?;
            let b = mean_field_drift(coeffs, &xf, &mu, grid.time)?;
            let left = grid.rho[grid.idx(jx - 1, iy)];
            let right = grid.rho[grid.idx(jx, iy)];
            let upwind = if b[0] > 0.0 { left } else { right };
            let f = b[0] * upwind - d * (right - left) / dx;
            div[grid.idx(jx - 1, iy)] += f / dx;
            div[grid.idx(jx, iy)] -= f / dx;
        }
    }
    // y-direction fluxes
    for ix in 0..gx {
        for jy in 1..gy {
            let xf = [grid.lo[0] + (ix as f64 + 0.5) * dx, grid.lo[1] + jy as f64 * dy];
            let d = 0.5 * a_of(&xf)?;
            let b = mean_field_drift(coeffs, &xf, &mu, grid.time)?;
            let low = grid.rho[grid.idx(ix, jy - 1)];
            let high = grid.rho[grid.idx(ix, jy)];
            let upwind = if b[1] > 0.0 { low } else { high };
            let f = b[1] * upwind - d * (high - low) / dy;
            div[grid.idx(ix, jy - 1)] += f / dy;
            div[grid.idx(ix, jy)] -= f / dy;
        }
    }
    for (o, d) in out.rho.iter_mut().zip(&div) {
        *o -= h_t * d;
        if *o < -1e-12 {
            return Err(Error::NegativeDensity { cell: 0, value: *o });
        }
    }
    out.time += h_t;
    Ok(out)
}
