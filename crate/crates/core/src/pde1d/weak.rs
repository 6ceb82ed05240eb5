//! Certification of the solver against the weak formulation: for test
//! functions with vanishing normal derivative at the boundary,
//! `mu_t(f) = mu_0(f) + int_0^t mu_s(L_s f) ds` must hold up to quadrature
//! error, where `L_s f = (a/2) f'' + b_s f'` and `b_s` is the mean-field
//! drift against the density at time `s`.

use super::grid::DensityGrid;
use super::solver::{a_coef, grid_measure};
use crate::error::{Error, Result};
use crate::sde::{mean_field_drift, CoefficientSpec};

/// Twice-differentiable 1D test functions. The built-ins satisfy the Neumann
/// condition on `[a, b]` by construction.
#[derive(Debug, Clone)]
pub enum TestFn1d {
    Constant,
    /// `cos(k pi (x - a)/(b - a))`
    CosMode { k: usize, a: f64, b: f64 },
    /// `(x - a)^2 (x - b)^2`, scaled to unit sup norm
    QuarticBump { a: f64, b: f64 },
}

impl TestFn1d {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFn1d::Constant => 1.0,
            TestFn1d::CosMode { k, a, b } => {
                (*k as f64 * std::f64::consts::PI * (x - a) / (b - a)).cos()
            }
            TestFn1d::QuarticBump { a, b } => {
                let s = (b - a) / 2.0;
                (x - a).powi(2) * (x - b).powi(2) / s.powi(4)
            }
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            TestFn1d::Constant => 0.0,
            TestFn1d::CosMode { k, a, b } => {
                let w = *k as f64 * std::f64::consts::PI / (b - a);
                -w * (w * (x - a)).sin()
            }
            TestFn1d::QuarticBump { a, b } => {
                let s = (b - a) / 2.0;
                (2.0 * (x - a) * (x - b).powi(2) + 2.0 * (x - a).powi(2) * (x - b)) / s.powi(4)
            }
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            TestFn1d::Constant => 0.0,
            TestFn1d::CosMode { k, a, b } => {
                let w = *k as f64 * std::f64::consts::PI / (b - a);
                -w * w * (w * (x - a)).cos()
            }
            TestFn1d::QuarticBump { a, b } => {
                let s = (b - a) / 2.0;
                (2.0 * (x - b).powi(2) + 8.0 * (x - a) * (x - b) + 2.0 * (x - a).powi(2))
                    / s.powi(4)
            }
        }
    }
}

/// Residual `|mu_T(f) - mu_0(f) - int_0^T mu_s(L_s f) ds|` per test
/// function, over a stored trajectory. Test functions must satisfy the
/// Neumann condition at the endpoints.
pub fn weak_form_residual(
    traj: &[DensityGrid],
    coeffs: &CoefficientSpec,
    fns: &[TestFn1d],
) -> Result<Vec<f64>> {
    if traj.len() < 2 {
        return Err(Error::invalid("traj", "need at least two stored states"));
    }
    let first = &traj[0];
    let (a, b) = (first.a, first.b);
    for f in fns {
        let scale = 1.0 + (0..first.cells())
            .map(|i| f.d1(first.center(i)).abs())
            .fold(0.0f64, f64::max);
        if f.d1(a).abs() > 1e-8 * scale || f.d1(b).abs() > 1e-8 * scale {
            return Err(Error::invalid(
                "test function",
                "normal derivative does not vanish at the boundary",
            ));
        }
    }

    // mu_s(L_s f) for each stored time
    let mut integrands: Vec<Vec<f64>> = vec![Vec::with_capacity(traj.len()); fns.len()];
    for grid in traj {
        let dx = grid.dx();
        let mu = grid_measure(grid)?;
        for (fi, f) in fns.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..grid.cells() {
                let x = grid.center(i);
                let drift = mean_field_drift(coeffs, &[x], &mu, grid.time)?[0];
                let a_x = a_coef(coeffs, x)?;
                let lf = 0.5 * a_x * f.d2(x) + drift * f.d1(x);
                acc += lf * grid.rho[i] * dx;
            }
            integrands[fi].push(acc);
        }
    }

    let moment = |grid: &DensityGrid, f: &TestFn1d| -> f64 {
        let dx = grid.dx();
        (0..grid.cells()).map(|i| f.eval(grid.center(i)) * grid.rho[i] * dx).sum()
    };

    let mut residuals = Vec::with_capacity(fns.len());
    for (fi, f) in fns.iter().enumerate() {
        let lhs = moment(traj.last().unwrap(), f) - moment(first, f);
        // trapezoid in time over the stored grid
        let mut integral = 0.0;
        for s in 1..traj.len() {
            let dt = traj[s].time - traj[s - 1].time;
            integral += 0.5 * dt * (integrands[fi][s] + integrands[fi][s - 1]);
        }
        residuals.push((lhs - integral).abs());
    }
    Ok(residuals)
}
