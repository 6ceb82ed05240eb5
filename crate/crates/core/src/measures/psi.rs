//! Concave-type cost profiles `psi` and the class membership check
//! `psi(0) = 0`, `psi' > 0`, `psi'` bounded, and
//! `r psi'(r) + r^2 (psi'')^+(r) <= kappa psi(r)` on a grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsiKind {
    /// `psi(r) = r`
    Identity,
    /// `psi(r) = scale * r^k`
    Power { k: f64, scale: f64 },
    /// `psi(r) = 1 - exp(-r)`
    BoundedConcave,
}

/// A cost profile together with the constant `kappa` it claims to satisfy
/// the class inequality with.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PsiFunction {
    pub kind: PsiKind,
    pub kappa: f64,
}

impl PsiFunction {
    pub fn new(kind: PsiKind, kappa: f64) -> Self {
        PsiFunction { kind, kappa }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => r,
            PsiKind::Power { k, scale } => scale * r.powf(*k),
            PsiKind::BoundedConcave => 1.0 - (-r).exp(),
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => 1.0,
            PsiKind::Power { k, scale } => scale * k * r.powf(k - 1.0),
            PsiKind::BoundedConcave => (-r).exp(),
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => 0.0,
            PsiKind::Power { k, scale } => scale * k * (k - 1.0) * r.powf(k - 2.0),
            PsiKind::BoundedConcave => -(-r).exp(),
        }
    }

    /// Whether `psi(|x - y|)` is convex in the gap, enabling the 1D monotone
    /// coupling as an exact transport solver.
    pub fn convex_in_gap(&self) -> bool {
        match &self.kind {
            PsiKind::Identity => true,
            PsiKind::Power { k, .. } => *k >= 1.0,
            PsiKind::BoundedConcave => false,
        }
    }
}

/// Outcome of the grid check of the class inequalities.
#[derive(Debug, Clone)]
pub struct PsiClassReport {
    pub pass: bool,
    pub psi_at_zero: f64,
    pub min_derivative: f64,
    pub max_derivative: f64,
    /// Worst value of `kappa psi - (r psi' + r^2 (psi'')^+)` over the grid.
    pub kappa_margin: f64,
    /// Set when the derivative keeps growing beyond the grid (or blows up
    /// near zero), i.e. `||psi'||_inf` is not finite.
    pub derivative_unbounded: bool,
}

/// Check class membership on a grid of `n_grid >= 1000` points over
/// `(0, r_max]`. Boundedness of the derivative is probed by evaluating far
/// outside the grid on both ends.
pub fn psi_class_check(psi: &PsiFunction, r_max: f64, n_grid: usize) -> Result<PsiClassReport> {
    if n_grid < 1000 {
        return Err(Error::invalid("n_grid", "need at least 1000 grid points"));
    }
    if !(r_max > 0.0) {
        return Err(Error::invalid("r_max", "must be positive"));
    }
    let psi0 = psi.eval(0.0);
    let mut min_d1 = f64::INFINITY;
    let mut max_d1 = f64::NEG_INFINITY;
    let mut kappa_margin = f64::INFINITY;
    for i in 1..=n_grid {
        let r = r_max * i as f64 / n_grid as f64;
        let d1 = psi.d1(r);
        min_d1 = min_d1.min(d1);
        max_d1 = max_d1.max(d1);
        let curv = psi.d2(r).max(0.0);
        kappa_margin = kappa_margin.min(psi.kappa * psi.eval(r) - r * d1 - r * r * curv);
    }
    // probe unboundedness beyond the grid and toward zero
    let probe_hi = psi.d1(100.0 * r_max);
    let probe_lo = psi.d1(r_max / n_grid as f64 * 1e-3);
    let derivative_unbounded = !probe_hi.is_finite()
        || !probe_lo.is_finite()
        || probe_hi > 2.0 * max_d1.max(1e-300)
        || probe_lo > 2.0 * max_d1.max(1e-300);

    let pass = psi0.abs() <= 1e-12
        && min_d1 > 0.0
        && max_d1.is_finite()
        && !derivative_unbounded
        && kappa_margin >= -1e-9 * psi.kappa.max(1.0);
    Ok(PsiClassReport {
        pass,
        psi_at_zero: psi0,
        min_derivative: min_d1,
        max_derivative: max_d1,
        kappa_margin,
        derivative_unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes_kappa_one() {
        let psi = PsiFunction::new(PsiKind::Identity, 1.0);
        let rep = psi_class_check(&psi, 10.0, 2000).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn square_fails_any_kappa() {
        // psi' = 2r is unbounded regardless of how large kappa is
        for kappa in [1.0, 4.0, 100.0] {
            let psi = PsiFunction::new(PsiKind::Power { k: 2.0, scale: 1.0 }, kappa);
            let rep = psi_class_check(&psi, 10.0, 2000).unwrap();
            assert!(!rep.pass, "kappa={kappa}: {rep:?}");
            assert!(rep.derivative_unbounded);
        }
    }

    // Analytic oracle: r e^{-r} <= 1 - e^{-r} for r > 0 (i.e. e^r >= 1 + r),
    // so the bounded concave profile is in the class with kappa = 1.
    #[test]
    fn bounded_concave_passes() {
        let psi = PsiFunction::new(PsiKind::BoundedConcave, 1.0);
        let rep = psi_class_check(&psi, 20.0, 4000).unwrap();
        assert!(rep.pass, "{rep:?}");
        for i in 1..1000 {
            let r = i as f64 * 0.02;
            assert!(r.exp() >= 1.0 + r - 1e-12);
        }
    }

    #[test]
    fn sub_linear_power_has_unbounded_derivative_at_zero() {
        let psi = PsiFunction::new(PsiKind::Power { k: 0.5, scale: 1.0 }, 1.0);
        let rep = psi_class_check(&psi, 10.0, 2000).unwrap();
        assert!(rep.derivative_unbounded);
        assert!(!rep.pass);
    }
}
