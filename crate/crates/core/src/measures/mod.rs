//! Empirical measures and the metric layer: exact optimal-transport
//! distances, weighted variation norms, moment norms, and histogram entropy.
//!
//! Distances are exact, not entropic approximations:
//! * 1D with cost exponent `k >= 1`: monotone (sorted/quantile) coupling;
//! * equal-weight, equal-size inputs: exact assignment via shortest
//!   augmenting paths;
//! * general weights: transportation network simplex, limited to 256 atoms
//!   per side.

mod assignment;
mod empirical;
mod histogram;
mod netsimplex;
mod psi;
mod sorted1d;
mod wasserstein;

pub use assignment::solve_assignment;
pub use empirical::EmpiricalMeasure;
pub use histogram::{freedman_diaconis_bins, relative_entropy, variation_norm, Histogram};
pub use netsimplex::transport_cost;
pub use psi::{psi_class_check, PsiClassReport, PsiFunction, PsiKind};
pub use wasserstein::{
    moment_norm, variation_norm_atomic, wasserstein_k, wasserstein_psi, weighted_var_norm,
};
