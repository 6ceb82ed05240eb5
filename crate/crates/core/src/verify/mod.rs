//! Statistical verification harness: each check runs simulations, forms a
//! point estimate with a bootstrap confidence interval, and applies a stated
//! pass rule. Two-law comparisons always run under common random numbers
//! (shared seed, shared particle keys), which keeps distance estimators
//! low-variance and gives coupled runs common atomic supports.

mod checks;
mod report;
mod testfn;

pub use checks::{
    check_gradient_estimate, check_local_time_moments, check_log_harnack, check_moment_bound,
    check_w2_contraction, occupation_integral,
};
pub use report::{bootstrap_mean_ci, VerificationReport};
pub use testfn::TestFunction;
