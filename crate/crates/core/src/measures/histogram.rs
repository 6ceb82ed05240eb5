//! Regular-grid histograms (1D and 2D) and discrete relative entropy.

use crate::error::{Error, Result};

/// A normalized histogram on a regular grid over a box. Only one- and
/// two-dimensional grids are supported; the KL estimator is hopeless at
/// desk scale beyond that.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    bins: Vec<usize>,
    probs: Vec<f64>,
    n_samples: usize,
}

impl Histogram {
    /// Bin `points` (flat, row-major, `dim` in {1, 2}) over `[lo, hi]` with
    /// `bins` cells per axis. Points outside the box are clamped into the
    /// edge cells.
    pub fn from_points(
        dim: usize,
        points: &[f64],
        lo: &[f64],
        hi: &[f64],
        bins: &[usize],
    ) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::invalid("dim", "histograms support d in {1, 2}"));
        }
        if lo.len() != dim || hi.len() != dim || bins.len() != dim {
            return Err(Error::invalid("bins", "lo/hi/bins must have length dim"));
        }
        if bins.iter().any(|&b| b == 0) || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
            return Err(Error::invalid("bins", "empty box or zero bins"));
        }
        if points.is_empty() || points.len() % dim != 0 {
            return Err(Error::invalid("points", "flat length must be a positive multiple of dim"));
        }
        let total_bins: usize = bins.iter().product();
        let mut counts = vec![0.0f64; total_bins];
        let n = points.len() / dim;
        for p in 0..n {
            let mut idx = 0usize;
            for a in 0..dim {
                let x = points[p * dim + a];
                let w = (hi[a] - lo[a]) / bins[a] as f64;
                let i = (((x - lo[a]) / w).floor() as isize).clamp(0, bins[a] as isize - 1);
                idx = idx * bins[a] + i as usize;
            }
            counts[idx] += 1.0;
        }
        let inv = 1.0 / n as f64;
        counts.iter_mut().for_each(|c| *c *= inv);
        Ok(Histogram {
            dim,
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            bins: bins.to_vec(),
            probs: counts,
            n_samples: n,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Cell width per axis.
    pub fn cell_widths(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|a| (self.hi[a] - self.lo[a]) / self.bins[a] as f64)
            .collect()
    }

    fn same_binning(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.bins == other.bins
            && self
                .lo
                .iter()
                .zip(&other.lo)
                .all(|(a, b)| (a - b).abs() < 1e-12)
            && self
                .hi
                .iter()
                .zip(&other.hi)
                .all(|(a, b)| (a - b).abs() < 1e-12)
    }
}

/// Relative entropy `Ent(nu | mu) = sum nu_i log(nu_i / mu_i)` with the
/// convention `0 log 0 = 0`. Bins where `nu` has mass but `mu` does not make
/// the entropy infinite; that is returned as `f64::INFINITY` rather than an
/// error so callers can report it.
pub fn relative_entropy(nu: &Histogram, mu: &Histogram) -> Result<f64> {
    if !nu.same_binning(mu) {
        return Err(Error::BinningMismatch { reason: "grids differ".into() });
    }
    let mut ent = 0.0;
    for (p, q) in nu.probs.iter().zip(&mu.probs) {
        if *p > 0.0 {
            if *q == 0.0 {
                return Ok(f64::INFINITY);
            }
            ent += p * (p / q).ln();
        }
    }
    // nonnegative up to rounding; clamp the float dust
    Ok(ent.max(0.0))
}

/// Variation norm `sum_i |nu_i - mu_i|` (the `sup_{|f|<=1}` form, twice the
/// sup-over-sets distance).
pub fn variation_norm(nu: &Histogram, mu: &Histogram) -> Result<f64> {
    if !nu.same_binning(mu) {
        return Err(Error::BinningMismatch { reason: "grids differ".into() });
    }
    Ok(nu.probs.iter().zip(&mu.probs).map(|(p, q)| (p - q).abs()).sum())
}

/// Freedman-Diaconis bin count for 1D samples: width `2 IQR n^{-1/3}`.
pub fn freedman_diaconis_bins(samples: &[f64], lo: f64, hi: f64) -> usize {
    let n = samples.len();
    if n < 4 {
        return 1;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| sorted[((n - 1) as f64 * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    if iqr <= 0.0 {
        return 1;
    }
    let width = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
    (((hi - lo) / width).ceil() as usize).clamp(1, 4096)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bin(p: f64) -> Histogram {
        Histogram {
            dim: 1,
            lo: vec![0.0],
            hi: vec![1.0],
            bins: vec![2],
            probs: vec![p, 1.0 - p],
            n_samples: 100,
        }
    }

    #[test]
    fn identical_histograms_zero_entropy() {
        let h = two_bin(0.3);
        assert_eq!(relative_entropy(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn two_bin_closed_form() {
        let nu = two_bin(1.0);
        let mu = two_bin(0.5);
        let e = relative_entropy(&nu, &mu).unwrap();
        assert!((e - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((e - 0.6931).abs() < 1e-4);
    }

    #[test]
    fn empty_mu_bin_is_infinite() {
        let nu = two_bin(0.5);
        let mu = two_bin(1.0);
        assert!(relative_entropy(&nu, &mu).unwrap().is_infinite());
    }

    #[test]
    fn binning_mismatch_rejected() {
        let a = two_bin(0.5);
        let b = Histogram {
            bins: vec![3],
            probs: vec![0.2, 0.3, 0.5],
            ..two_bin(0.5)
        };
        assert!(relative_entropy(&a, &b).is_err());
    }

    // Pinsker: 0.5 * var^2 <= entropy for discrete pairs.
    #[test]
    fn pinsker_on_random_pairs() {
        let rng = crate::rng::CounterRng::new(8, crate::rng::stream::SCRATCH);
        for case in 0..200u64 {
            let r = rng.at(case);
            let b = 8;
            let mut p: Vec<f64> = (0..b).map(|i| r.uniform(0, i as u64) + 1e-3).collect();
            let mut q: Vec<f64> = (0..b).map(|i| r.uniform(1, i as u64) + 1e-3).collect();
            let sp: f64 = p.iter().sum();
            let sq: f64 = q.iter().sum();
            p.iter_mut().for_each(|x| *x /= sp);
            q.iter_mut().for_each(|x| *x /= sq);
            let mk = |probs: Vec<f64>| Histogram {
                dim: 1,
                lo: vec![0.0],
                hi: vec![1.0],
                bins: vec![b],
                probs,
                n_samples: 1,
            };
            let nu = mk(p);
            let mu = mk(q);
            let ent = relative_entropy(&nu, &mu).unwrap();
            let var = variation_norm(&nu, &mu).unwrap();
            assert!(ent >= 0.0);
            assert!(0.5 * var * var <= ent + 1e-12, "Pinsker violated");
        }
    }

    #[test]
    fn from_points_normalizes() {
        let pts = [0.1, 0.4, 0.6, 0.9];
        let h = Histogram::from_points(1, &pts, &[0.0], &[1.0], &[2]).unwrap();
        assert_eq!(h.probs(), &[0.5, 0.5]);
        let h2 = Histogram::from_points(2, &[0.1, 0.1, 0.9, 0.9], &[0.0, 0.0], &[1.0, 1.0], &[2, 2])
            .unwrap();
        assert_eq!(h2.probs(), &[0.5, 0.0, 0.0, 0.5]);
    }
}
