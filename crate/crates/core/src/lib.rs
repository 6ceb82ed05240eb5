//! Particle simulation and verification toolkit for reflected mean-field SDEs.
//!
//! The crate simulates interacting particle systems of the form
//!
//! ```text
//! dX_t = b_t(X_t, mu_t) dt + sigma_t(X_t) dW_t + n(X_t) dl_t
//! ```
//!
//! where `mu_t` is the empirical law of the particles, the process is
//! constrained to a closed domain by normal reflection, and `l_t` is the
//! boundary local time. On top of the simulator sit:
//!
//! * [`geometry`] — domains, signed distances, inward normals and one-step
//!   reflection with local-time accounting,
//! * [`measures`] — empirical measures, exact optimal-transport distances,
//!   weighted variation norms and histogram entropy,
//! * [`sde`] — coefficient specifications, the interacting simulator, the
//!   frozen-flow map and its Picard iteration, and the bridging coupling of
//!   two solutions,
//! * [`verify`] — statistical checks (moment bounds, local-time exponential
//!   moments, Wasserstein contraction, entropy-cost shape, gradient bounds,
//!   occupation functionals) with bootstrap confidence intervals,
//! * [`pde1d`] — a finite-volume solver for the matching nonlinear
//!   Fokker-Planck equation with zero-flux boundary, used as a density oracle.

pub mod error;
pub mod geometry;
pub mod measures;
pub mod pde1d;
pub mod rng;
pub mod sde;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Domain, DomainKind, ReflectionOutcome};
pub use measures::{EmpiricalMeasure, Histogram, PsiFunction};
pub use sde::{CoefficientSpec, MeasureFlow, ParticleEnsemble, SimConfig};
pub use verify::VerificationReport;
