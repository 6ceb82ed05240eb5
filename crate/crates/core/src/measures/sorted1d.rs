//! Exact 1D optimal transport by monotone (quantile) coupling.
//!
//! The monotone coupling is optimal for costs `c(x, y) = |x - y|^k` with
//! `k >= 1` (convexity in the gap); concave exponents are routed to the
//! assignment or network-simplex paths instead.

use super::empirical::EmpiricalMeasure;

/// Transport cost under `cost(|x - y|)` for two 1D measures coupled
/// monotonically. `mu` and `nu` may have different sizes and weights.
pub fn monotone_cost_1d(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    mut cost: impl FnMut(f64) -> f64,
) -> f64 {
    debug_assert_eq!(mu.dim(), 1);
    debug_assert_eq!(nu.dim(), 1);
    let mut a: Vec<(f64, f64)> = (0..mu.len()).map(|i| (mu.atom(i)[0], mu.weight(i))).collect();
    let mut b: Vec<(f64, f64)> = (0..nu.len()).map(|i| (nu.atom(i)[0], nu.weight(i))).collect();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    b.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut total = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let mut wa = if a.is_empty() { 0.0 } else { a[0].1 };
    let mut wb = if b.is_empty() { 0.0 } else { b[0].1 };
    while i < a.len() && j < b.len() {
        let m = wa.min(wb);
        if m > 0.0 {
            total += m * cost((a[i].0 - b[j].0).abs());
        }
        wa -= m;
        wb -= m;
        if wa <= 1e-15 {
            i += 1;
            if i < a.len() {
                wa = a[i].1;
            }
        }
        if wb <= 1e-15 {
            j += 1;
            if j < b.len() {
                wb = b[j].1;
            }
        }
    }
    total
}
