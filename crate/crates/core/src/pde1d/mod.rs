//! Finite-volume solver for the nonlinear Fokker-Planck equation with
//! zero-flux (Neumann) boundary, used as a density oracle for particle runs.
//!
//! The density solves `d rho/dt = d/dx [ d/dx (a rho / 2) - b rho ]` in
//! conservative form; for the granular-media coefficients this is
//! `d rho/dt = D rho'' + (rho V' + rho (W' * rho))'`. Fluxes vanish at the
//! boundary faces, so mass is conserved to rounding. Explicit time stepping
//! with upwinded advection and central diffusion under a CFL bound; the
//! mean-field convolution is a direct quadrature over the grid.

mod compare;
mod grid;
mod solver;
mod weak;

pub use compare::{compare_particle_pde, ComparisonRow};
pub use grid::{DensityGrid, DensityGrid2};
pub use solver::{fp_run, fp_run_to_times, fp_step, fp_step_2d, stable_dt};
pub use weak::{weak_form_residual, TestFn1d};
