//! Transport distances and variation norms on empirical measures.

use super::assignment::{solve_assignment, MAX_ASSIGNMENT_SIZE};
use super::empirical::EmpiricalMeasure;
use super::netsimplex::transport_cost;
use super::psi::PsiFunction;
use super::sorted1d::monotone_cost_1d;
use crate::error::{Error, Result};

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn equal_uniform(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> bool {
    mu.is_uniform() && nu.is_uniform() && mu.len() == nu.len()
}

/// Optimal transport cost under `cost(|x - y|)`; routes to the cheapest exact
/// solver that is valid for the inputs. `convex_gap` declares that the cost
/// is convex in the gap, enabling the 1D monotone coupling.
fn optimal_cost(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    convex_gap: bool,
    cost: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    if mu.dim() == 1 && convex_gap {
        return Ok(monotone_cost_1d(mu, nu, cost));
    }
    if equal_uniform(mu, nu) && mu.len() <= MAX_ASSIGNMENT_SIZE {
        let n = mu.len();
        let table: Vec<f64> = (0..n * n)
            .map(|k| cost(euclid(mu.atom(k / n), nu.atom(k % n))))
            .collect();
        let (_, total) = solve_assignment(&table, n)?;
        return Ok(total / n as f64);
    }
    transport_cost(mu, nu, |x, y| cost(euclid(x, y)))
}

/// The `L^k`-Wasserstein distance `W_k = (inf E|X - Y|^k)^{1/(1 v k)}` for
/// `k > 0`; `k = 0` is half the total variation between the atomic measures
/// on their merged support.
pub fn wasserstein_k(k: f64, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::invalid("k", "must be nonnegative"));
    }
    if k == 0.0 {
        let support = mu.merged_support(nu)?;
        return Ok(0.5 * support.iter().map(|(_, a, b)| (a - b).abs()).sum::<f64>());
    }
    let cost = optimal_cost(mu, nu, k >= 1.0, &|r: f64| r.powf(k))?;
    Ok(cost.powf(1.0 / k.max(1.0)))
}

/// Transport cost under `psi(|x - y|)`. No outer root is applied: this is a
/// cost, not a metric, and for concave `psi` the triangle inequality is not
/// asserted anywhere in the crate.
pub fn wasserstein_psi(
    psi: &PsiFunction,
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
) -> Result<f64> {
    optimal_cost(mu, nu, psi.convex_in_gap(), &|r: f64| psi.eval(r))
}

/// Weighted variation norm `sup_{|f| <= 1 + |x|^k} |mu(f) - nu(f)|`, exact on
/// the merged atomic support.
pub fn weighted_var_norm(k: f64, mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::invalid("k", "must be positive"));
    }
    let support = mu.merged_support(nu)?;
    Ok(support
        .iter()
        .map(|(z, a, b)| {
            let zk = z.iter().map(|x| x * x).sum::<f64>().sqrt().powf(k);
            (a - b).abs() * (1.0 + zk)
        })
        .sum())
}

/// Plain total variation `sup_{|f| <= 1} |mu(f) - nu(f)|` on the merged
/// support (twice the measure-theoretic TV distance).
pub fn variation_norm_atomic(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    let support = mu.merged_support(nu)?;
    Ok(support.iter().map(|(_, a, b)| (a - b).abs()).sum())
}

/// Moment norm `(int |x|^k dmu)^{1/k}`; by convention 1 for `k = 0`.
pub fn moment_norm(k: f64, mu: &EmpiricalMeasure) -> f64 {
    assert!(k >= 0.0, "moment_norm: k must be nonnegative");
    if k == 0.0 {
        return 1.0;
    }
    mu.integrate(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(k))
        .powf(1.0 / k)
}
