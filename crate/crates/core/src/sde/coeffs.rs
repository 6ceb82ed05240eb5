//! Drift and diffusion coefficient specifications.
//!
//! The built-in drift families:
//! * `GranularMedia { v, w }`: `b(x, mu) = -grad V(x) - grad(W * mu)(x)`
//!   with `(W * mu)(x) = int W(x - z) mu(dz)`,
//! * `LinearMeanField { a, b }`: `b(x, mu) = A x + B mean(mu)`,
//! * `Custom { name }`: a built-in registry entry (no runtime code loading).
//!
//! The per-step evaluator specializes structured kernels to exact algebraic
//! rewrites of the direct sum (mean statistic for quadratic interactions,
//! sorted prefix sums for the cubic kernel in 1D) so that large ensembles
//! stay tractable; the rewrites are tested against the direct sum.

use serde::{Deserialize, Serialize};

use super::super::measures::EmpiricalMeasure;
use crate::error::{Error, Result};

/// Dense matrix with row-major storage, sized for state dimensions ≤ 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix {
    pub rows: Vec<Vec<f64>>,
}

impl Matrix {
    pub fn scalar(v: f64) -> Self {
        Matrix { rows: vec![vec![v]] }
    }

    pub fn identity(d: usize) -> Self {
        Matrix {
            rows: (0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows.len(), self.rows.first().map_or(0, |r| r.len()))
    }

    pub fn is_square(&self) -> bool {
        let (r, c) = self.dim();
        r == c && r > 0 && self.rows.iter().all(|row| row.len() == c)
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn matvec_add(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Gauss-Jordan inverse; errors when singular.
    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::invalid("matrix", "inverse needs a square matrix"));
        }
        let n = self.rows.len();
        let mut a: Vec<Vec<f64>> = self.rows.clone();
        let mut inv = Matrix::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            if a[pivot][col].abs() < 1e-14 {
                return Err(Error::invalid("matrix", "singular"));
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col];
            for j in 0..n {
                a[col][j] /= p;
                inv[col][j] /= p;
            }
            for i in 0..n {
                if i != col {
                    let f = a[i][col];
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
        Ok(Matrix { rows: inv })
    }
}

/// Confining potential `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// `V(x) = coeff |x|^2 / 2`, so `grad V = coeff x`.
    Quadratic { coeff: f64 },
}

impl Potential {
    #[inline]
    pub fn grad_add(&self, x: &[f64], factor: f64, out: &mut [f64]) {
        match self {
            Potential::Zero => {}
            Potential::Quadratic { coeff } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += factor * coeff * xi;
                }
            }
        }
    }
}

/// Pair interaction kernel `W`; `grad W(0) = 0` by convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InteractionKernel {
    Zero,
    /// `W(x) = scale |x|^2`, `grad W = 2 scale x`.
    Quadratic { scale: f64 },
    /// `W(x) = scale |x|^3`, `grad W = 3 scale |x| x`.
    Cubic { scale: f64 },
}

impl InteractionKernel {
    /// `grad W(x - z)` accumulated into `out` with the given factor.
    #[inline]
    pub fn grad_gap_add(&self, x: &[f64], z: &[f64], factor: f64, out: &mut [f64]) {
        match self {
            InteractionKernel::Zero => {}
            InteractionKernel::Quadratic { scale } => {
                for i in 0..out.len() {
                    out[i] += factor * 2.0 * scale * (x[i] - z[i]);
                }
            }
            InteractionKernel::Cubic { scale } => {
                let gap_norm = x
                    .iter()
                    .zip(z)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                for i in 0..out.len() {
                    out[i] += factor * 3.0 * scale * gap_norm * (x[i] - z[i]);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    GranularMedia { v: Potential, w: InteractionKernel },
    LinearMeanField { a: Matrix, b: Matrix },
    Custom { name: String },
}

/// Signature of registry drift functions.
pub type CustomDriftFn = fn(t: f64, x: &[f64], mu: &EmpiricalMeasure, out: &mut [f64]);

fn custom_drift_zero(_t: f64, _x: &[f64], _mu: &EmpiricalMeasure, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
}

pub fn custom_drift(name: &str) -> Result<CustomDriftFn> {
    match name {
        "zero" => Ok(custom_drift_zero),
        _ => Err(Error::UnknownName { registry: "drift".into(), name: name.into() }),
    }
}

/// Signature of registry state-dependent diffusion scales.
pub type StateSigmaFn = fn(x: &[f64]) -> f64;

fn sigma_affine_abs(x: &[f64]) -> f64 {
    0.2 + 0.1 * x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn state_sigma(name: &str) -> Result<StateSigmaFn> {
    match name {
        "affine_abs" => Ok(sigma_affine_abs),
        _ => Err(Error::UnknownName { registry: "diffusion".into(), name: name.into() }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diffusion {
    /// Constant square matrix sigma.
    Constant { matrix: Matrix },
    /// `sigma(x) = value * I`.
    Scalar { value: f64 },
    /// Isotropic state-dependent scale from the registry.
    StateDependent { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    /// Drift sees the live empirical law of the interacting ensemble.
    #[default]
    Empirical,
    /// Drift sees a supplied frozen measure flow.
    FrozenFlow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub drift: Drift,
    pub diffusion: Diffusion,
    #[serde(default)]
    pub measure_mode: MeasureMode,
}

impl CoefficientSpec {
    pub fn granular(v: Potential, w: InteractionKernel, sigma: f64) -> Self {
        CoefficientSpec {
            drift: Drift::GranularMedia { v, w },
            diffusion: Diffusion::Scalar { value: sigma },
            measure_mode: MeasureMode::Empirical,
        }
    }

    pub fn linear_mean_field(a: Matrix, b: Matrix, sigma: f64) -> Self {
        CoefficientSpec {
            drift: Drift::LinearMeanField { a, b },
            diffusion: Diffusion::Scalar { value: sigma },
            measure_mode: MeasureMode::Empirical,
        }
    }

    /// Structural validation against the state dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match &self.drift {
            Drift::LinearMeanField { a, b } => {
                if a.dim() != (dim, dim) || b.dim() != (dim, dim) {
                    return Err(Error::invalid("drift", "A and B must be dim x dim"));
                }
            }
            Drift::Custom { name } => {
                custom_drift(name)?;
            }
            Drift::GranularMedia { .. } => {}
        }
        match &self.diffusion {
            Diffusion::Constant { matrix } => {
                if matrix.dim() != (dim, dim) || !matrix.is_square() {
                    return Err(Error::invalid("diffusion", "matrix must be dim x dim"));
                }
            }
            Diffusion::StateDependent { name } => {
                state_sigma(name)?;
            }
            Diffusion::Scalar { value } => {
                if !value.is_finite() {
                    return Err(Error::NonFinite { what: "diffusion scalar".into() });
                }
            }
        }
        Ok(())
    }

    /// Whether `sigma sigma^*` is (uniformly) invertible on the sampled
    /// states; required by the bridging coupling, advisory elsewhere.
    pub fn elliptic_on(&self, states: &[Vec<f64>]) -> bool {
        match &self.diffusion {
            Diffusion::Scalar { value } => value.abs() > 1e-12,
            Diffusion::Constant { matrix } => matrix.inverse().is_ok(),
            Diffusion::StateDependent { name } => match state_sigma(name) {
                Ok(f) => states.iter().all(|x| f(x).abs() > 1e-12),
                Err(_) => false,
            },
        }
    }

    /// Add `sigma(x) z * sqrt_dt` to `out`.
    #[inline]
    pub fn diffuse_add(&self, x: &[f64], z: &[f64], sqrt_dt: f64, out: &mut [f64]) {
        match &self.diffusion {
            Diffusion::Scalar { value } => {
                for (o, zi) in out.iter_mut().zip(z) {
                    *o += value * sqrt_dt * zi;
                }
            }
            Diffusion::Constant { matrix } => {
                for (i, row) in matrix.rows.iter().enumerate() {
                    out[i] += sqrt_dt * row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            Diffusion::StateDependent { name } => {
                let s = state_sigma(name).expect("validated");
                let v = s(x);
                for (o, zi) in out.iter_mut().zip(z) {
                    *o += v * sqrt_dt * zi;
                }
            }
        }
    }
}

/// Mean-field drift `b_t(x, mu)`; the direct `O(N)` evaluation.
pub fn mean_field_drift(
    coeffs: &CoefficientSpec,
    x: &[f64],
    mu: &EmpiricalMeasure,
    t: f64,
) -> Result<Vec<f64>> {
    if x.len() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: x.len() });
    }
    let mut out = vec![0.0; x.len()];
    match &coeffs.drift {
        Drift::GranularMedia { v, w } => {
            v.grad_add(x, -1.0, &mut out);
            if !matches!(w, InteractionKernel::Zero) {
                for j in 0..mu.len() {
                    w.grad_gap_add(x, mu.atom(j), -mu.weight(j), &mut out);
                }
            }
        }
        Drift::LinearMeanField { a, b } => {
            a.matvec_add(x, &mut out);
            b.matvec_add(&mu.mean(), &mut out);
        }
        Drift::Custom { name } => {
            custom_drift(name)?(t, x, mu, &mut out);
        }
    }
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { what: "drift".into() });
    }
    Ok(out)
}

/// Per-step drift evaluator over a fixed measure snapshot, with exact fast
/// paths for structured kernels.
pub enum DriftEval<'a> {
    Granular {
        v: &'a Potential,
        w: &'a InteractionKernel,
        dim: usize,
        atoms: &'a [f64],
        weights: Option<&'a [f64]>,
        fast: Option<GranularFast>,
    },
    Linear {
        a: &'a Matrix,
        drive: Vec<f64>, // B * mean(mu)
    },
    Custom {
        f: CustomDriftFn,
        mu: EmpiricalMeasure,
    },
}

/// Precomputed sufficient statistics for structured kernels.
pub enum GranularFast {
    /// no interaction term at all
    NoInteraction,
    /// quadratic kernel: `grad(W*mu)(x) = 2 s (x - mean)`
    Quadratic { two_scale: f64, mean: Vec<f64> },
    /// cubic kernel in 1D via sorted prefix sums
    Cubic1d { three_scale: f64, sorted: Vec<f64>, pref1: Vec<f64>, pref2: Vec<f64> },
}

impl<'a> DriftEval<'a> {
    /// Build the evaluator for one step. `atoms` is the flat pre-step
    /// position array of the measure the drift sees; `weights` is `None`
    /// for the uniform case.
    pub fn new(
        coeffs: &'a CoefficientSpec,
        dim: usize,
        atoms: &'a [f64],
        weights: Option<&'a [f64]>,
        t: f64,
    ) -> Result<Self> {
        let n = atoms.len() / dim;
        match &coeffs.drift {
            Drift::GranularMedia { v, w } => {
                let fast = match w {
                    InteractionKernel::Zero => Some(GranularFast::NoInteraction),
                    InteractionKernel::Quadratic { scale } if weights.is_none() => {
                        let mut mean = vec![0.0; dim];
                        for chunk in atoms.chunks_exact(dim) {
                            for (m, c) in mean.iter_mut().zip(chunk) {
                                *m += c;
                            }
                        }
                        mean.iter_mut().for_each(|m| *m /= n as f64);
                        Some(GranularFast::Quadratic { two_scale: 2.0 * scale, mean })
                    }
                    InteractionKernel::Cubic { scale } if dim == 1 && weights.is_none() => {
                        let mut sorted = atoms.to_vec();
                        sorted.sort_by(|a, b| a.total_cmp(b));
                        let mut pref1 = Vec::with_capacity(n + 1);
                        let mut pref2 = Vec::with_capacity(n + 1);
                        pref1.push(0.0);
                        pref2.push(0.0);
                        let (mut s1, mut s2) = (0.0, 0.0);
                        for &z in &sorted {
                            s1 += z;
                            s2 += z * z;
                            pref1.push(s1);
                            pref2.push(s2);
                        }
                        Some(GranularFast::Cubic1d {
                            three_scale: 3.0 * scale,
                            sorted,
                            pref1,
                            pref2,
                        })
                    }
                    _ => None,
                };
                Ok(DriftEval::Granular { v, w, dim, atoms, weights, fast })
            }
            Drift::LinearMeanField { a, b } => {
                let mut mean = vec![0.0; dim];
                for (i, chunk) in atoms.chunks_exact(dim).enumerate() {
                    let wt = weights.map_or(1.0 / n as f64, |w| w[i]);
                    for (m, c) in mean.iter_mut().zip(chunk) {
                        *m += wt * c;
                    }
                }
                let mut drive = vec![0.0; dim];
                b.matvec(&mean, &mut drive);
                Ok(DriftEval::Linear { a, drive })
            }
            Drift::Custom { name } => {
                let f = custom_drift(name)?;
                let mu = match weights {
                    None => EmpiricalMeasure::uniform(dim, atoms.to_vec())?,
                    Some(w) => EmpiricalMeasure::weighted(dim, atoms.to_vec(), w.to_vec())?,
                };
                let _ = t;
                Ok(DriftEval::Custom { f, mu })
            }
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        match self {
            DriftEval::Granular { v, w, dim, atoms, weights, fast } => {
                v.grad_add(x, -1.0, out);
                match fast {
                    Some(GranularFast::NoInteraction) => {}
                    Some(GranularFast::Quadratic { two_scale, mean }) => {
                        for i in 0..out.len() {
                            out[i] -= two_scale * (x[i] - mean[i]);
                        }
                    }
                    Some(GranularFast::Cubic1d { three_scale, sorted, pref1, pref2 }) => {
                        let n = sorted.len();
                        let xv = x[0];
                        let c = sorted.partition_point(|z| *z <= xv);
                        let below = c as f64 * xv * xv - 2.0 * xv * pref1[c] + pref2[c];
                        let above = (n - c) as f64 * xv * xv - 2.0 * xv * (pref1[n] - pref1[c])
                            + (pref2[n] - pref2[c]);
                        out[0] -= three_scale * (below - above) / n as f64;
                    }
                    None => {
                        let n = atoms.len() / dim;
                        for (j, z) in atoms.chunks_exact(*dim).enumerate() {
                            let wt = weights.map_or(1.0 / n as f64, |w| w[j]);
                            w.grad_gap_add(x, z, -wt, out);
                        }
                    }
                }
            }
            DriftEval::Linear { a, drive } => {
                a.matvec(x, out);
                for (o, d) in out.iter_mut().zip(drive) {
                    *o += d;
                }
            }
            DriftEval::Custom { f, mu } => f(t, x, mu, out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_1d(xs: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_samples_1d(xs).unwrap()
    }

    #[test]
    fn quadratic_interaction_pulls_to_mean() {
        // V = 0, W = |x|^2: drift = -2 (x - mean)
        let coeffs = CoefficientSpec::granular(
            Potential::Zero,
            InteractionKernel::Quadratic { scale: 1.0 },
            1.0,
        );
        let mu = uniform_1d(&[0.0, 1.0, 2.0]);
        let b = mean_field_drift(&coeffs, &[2.5], &mu, 0.0).unwrap();
        assert!((b[0] - (-2.0 * (2.5 - 1.0))).abs() < 1e-12);
    }

    #[test]
    fn quadratic_potential_restoring() {
        let coeffs = CoefficientSpec::granular(
            Potential::Quadratic { coeff: 1.0 },
            InteractionKernel::Zero,
            1.0,
        );
        let mu = uniform_1d(&[0.0]);
        let b = mean_field_drift(&coeffs, &[3.0], &mu, 0.0).unwrap();
        assert!((b[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_kernel_symmetry() {
        // W = |x|^3, atoms {-1, 1}, x = 0: contributions cancel
        let coeffs = CoefficientSpec::granular(
            Potential::Zero,
            InteractionKernel::Cubic { scale: 1.0 },
            1.0,
        );
        let mu = uniform_1d(&[-1.0, 1.0]);
        let b = mean_field_drift(&coeffs, &[0.0], &mu, 0.0).unwrap();
        assert!(b[0].abs() < 1e-12);
        // brute-force sum at x = 0.5: 3|x-z|(x-z) averaged
        let x = 0.5f64;
        let brute = -0.5 * (3.0 * (x + 1.0).abs() * (x + 1.0) + 3.0 * (x - 1.0).abs() * (x - 1.0));
        let b = mean_field_drift(&coeffs, &[x], &mu, 0.0).unwrap();
        assert!((b[0] - brute).abs() < 1e-12);
    }

    #[test]
    fn fast_paths_match_direct_sum() {
        let rng = crate::rng::CounterRng::new(17, crate::rng::stream::SCRATCH);
        let n = 257;
        let atoms: Vec<f64> = (0..n).map(|i| rng.uniform(i as u64, 0) * 4.0 - 2.0).collect();
        let mu = uniform_1d(&atoms);
        for w in [
            InteractionKernel::Quadratic { scale: 0.7 },
            InteractionKernel::Cubic { scale: 1.3 },
        ] {
            let coeffs =
                CoefficientSpec::granular(Potential::Quadratic { coeff: 0.5 }, w, 1.0);
            let eval = DriftEval::new(&coeffs, 1, &atoms, None, 0.0).unwrap();
            match &eval {
                DriftEval::Granular { fast, .. } => assert!(fast.is_some()),
                _ => unreachable!(),
            }
            let mut out = [0.0];
            for k in 0..50 {
                let x = [-2.5 + 5.0 * k as f64 / 49.0];
                eval.eval(0.0, &x, &mut out);
                let direct = mean_field_drift(&coeffs, &x, &mu, 0.0).unwrap();
                assert!(
                    (out[0] - direct[0]).abs() < 1e-9 * (1.0 + direct[0].abs()),
                    "fast path diverged at {x:?}: {} vs {}",
                    out[0],
                    direct[0]
                );
            }
        }
    }

    #[test]
    fn linear_mean_field_drive() {
        let coeffs = CoefficientSpec::linear_mean_field(
            Matrix::scalar(-1.0),
            Matrix::scalar(0.5),
            0.0,
        );
        let mu = uniform_1d(&[2.0, 4.0]);
        let b = mean_field_drift(&coeffs, &[1.0], &mu, 0.0).unwrap();
        assert!((b[0] - (-1.0 + 0.5 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn matrix_inverse_round_trip() {
        let m = Matrix { rows: vec![vec![2.0, 1.0], vec![1.0, 3.0]] };
        let inv = m.inverse().unwrap();
        let mut out = [0.0, 0.0];
        inv.matvec(&[2.0 * 1.5 + 1.0 * (-0.5), 1.0 * 1.5 + 3.0 * (-0.5)], &mut out);
        assert!((out[0] - 1.5).abs() < 1e-12 && (out[1] + 0.5).abs() < 1e-12);
        let sing = Matrix { rows: vec![vec![1.0, 2.0], vec![2.0, 4.0]] };
        assert!(sing.inverse().is_err());
    }

    #[test]
    fn ellipticity_flags() {
        let c = CoefficientSpec::granular(Potential::Zero, InteractionKernel::Zero, 0.0);
        assert!(!c.elliptic_on(&[vec![0.0]]));
        let c = CoefficientSpec::granular(Potential::Zero, InteractionKernel::Zero, 0.5);
        assert!(c.elliptic_on(&[vec![0.0]]));
    }
}
