//! Sampling-based certification of the interior-cone inequality
//! `<y - x, n(x)> >= -|y - x|^2 / (2 r0)` over boundary points `x` and domain
//! points `y`, plus the convex-case inequality `<y - x, n(x)> >= 0`.
//!
//! This is an empirical certificate: it reports the worst sampled margin, not
//! a proof. There is no constructive way to verify the uniform cone condition
//! exactly, so sampling with a reported margin is the deliberate compromise.

use super::domain::{dot, Domain, DomainKind};
use super::EPS_GEO;
use crate::error::{Error, Result};
use crate::rng::{stream, CounterRng};

/// Result of `Domain::certify_interior_cone`.
#[derive(Debug, Clone)]
pub struct ConeCertificate {
    pub pass: bool,
    pub n_samples: usize,
    pub r0: f64,
    /// Worst sampled value of `<y-x, n(x)> + |y-x|^2/(2 r0)`.
    pub worst_cone_margin: f64,
    /// Worst sampled value of `<y-x, n(x)>`; checked against zero only for
    /// convex domains.
    pub worst_convex_margin: f64,
    pub violations: usize,
}

impl Domain {
    /// Sample `n_samples` pairs `(x, y)` with `x` on the boundary and `y` in
    /// the domain, and certify the interior-cone inequality for the given
    /// `r0`. Convex domains are additionally held to the zero lower bound,
    /// which they satisfy for every `r0 > 0`.
    pub fn certify_interior_cone(
        &self,
        n_samples: usize,
        r0: f64,
        seed: u64,
    ) -> Result<ConeCertificate> {
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be at least 1"));
        }
        if !(r0 > 0.0) {
            return Err(Error::invalid("r0", "must be positive"));
        }
        let rng = CounterRng::new(seed, stream::CERTIFY);
        let mut worst_cone = f64::INFINITY;
        let mut worst_cvx = f64::INFINITY;
        let mut violations = 0usize;
        for i in 0..n_samples {
            let x = self.sample_boundary(&rng, i as u64)?;
            let n = self.inward_normal(&x)?;
            let y = self.sample_point(&rng, i as u64)?;
            let gap: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let inner = dot(&gap, &n);
            let quad = gap.iter().map(|g| g * g).sum::<f64>() / (2.0 * r0);
            let margin = inner + quad;
            worst_cone = worst_cone.min(margin);
            worst_cvx = worst_cvx.min(inner);
            if margin < -EPS_GEO || (self.convex() && inner < -EPS_GEO) {
                violations += 1;
            }
        }
        let pass = worst_cone >= -EPS_GEO && (!self.convex() || worst_cvx >= -EPS_GEO);
        Ok(ConeCertificate {
            pass,
            n_samples,
            r0,
            worst_cone_margin: worst_cone,
            worst_convex_margin: worst_cvx,
            violations,
        })
    }

    /// Draw a point on the boundary, indexed deterministically by `i`.
    pub fn sample_boundary(&self, rng: &CounterRng, i: u64) -> Result<Vec<f64>> {
        let r = rng.at(i);
        match self.kind() {
            DomainKind::Interval { a, b } => {
                let mut ends = Vec::new();
                if a.is_finite() {
                    ends.push(*a);
                }
                if b.is_finite() {
                    ends.push(*b);
                }
                if ends.is_empty() {
                    return Err(Error::EmptyNormalCone { reason: "boundary is empty".into() });
                }
                Ok(vec![ends[r.index(0, 0, ends.len())]])
            }
            DomainKind::HalfSpace { normal, offset } => {
                // anchor + tangential jitter within the reference scale
                let scale = 10.0 * self.reference_scale();
                let mut x: Vec<f64> = normal.iter().map(|n| n * offset).collect();
                let mut tang = vec![0.0; x.len()];
                for (j, t) in tang.iter_mut().enumerate() {
                    *t = (r.uniform(1, j as u64) - 0.5) * 2.0 * scale;
                }
                let along = dot(&tang, normal);
                for j in 0..x.len() {
                    x[j] += tang[j] - along * normal[j];
                }
                Ok(x)
            }
            DomainKind::Box { lo, hi } => {
                let d = lo.len();
                let face = r.index(0, 0, 2 * d);
                let axis = face / 2;
                let mut x = vec![0.0; d];
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = lo[j] + r.uniform(1, j as u64) * (hi[j] - lo[j]);
                }
                x[axis] = if face % 2 == 0 { lo[axis] } else { hi[axis] };
                Ok(x)
            }
            DomainKind::Ball { center, radius } => {
                Ok(sphere_point(&r, center, *radius, center.len()))
            }
            DomainKind::Annulus { center, r_in, r_out } => {
                // pick the sphere proportional to its circumference
                let w_in = r_in / (r_in + r_out);
                let radius = if r.uniform(0, 0) < w_in { *r_in } else { *r_out };
                Ok(sphere_point(&r, center, radius, center.len()))
            }
            DomainKind::Sdf(shape) => {
                // march from an interior anchor toward a random direction and
                // bisect the signed distance to land on the boundary
                let d = shape.dim;
                let dir = {
                    let mut v: Vec<f64> = (0..d).map(|j| r.normal(2, j as u64)).collect();
                    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    v.iter_mut().for_each(|x| *x /= n);
                    v
                };
                let anchor = vec![0.0; d];
                let scale = self.reference_scale() * 2.0;
                let sd_at = |t: f64| {
                    let p: Vec<f64> =
                        anchor.iter().zip(&dir).map(|(a, u)| a + t * u).collect();
                    self.signed_distance_unchecked(&p)
                };
                let mut lo = 0.0;
                let mut hi = scale;
                if sd_at(lo) <= 0.0 {
                    return Err(Error::ProjectionFailed { iterations: 0, residual: sd_at(lo) });
                }
                let mut grow = 0;
                while sd_at(hi) > 0.0 {
                    hi *= 2.0;
                    grow += 1;
                    if grow > 60 {
                        return Err(Error::ProjectionFailed { iterations: grow, residual: hi });
                    }
                }
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if sd_at(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(anchor.iter().zip(&dir).map(|(a, u)| a + lo * u).collect())
            }
        }
    }

    /// Draw a point of the closed domain, indexed deterministically by `i`.
    /// Uses rejection from the bounding box for shapes without a direct
    /// sampler; attempts advance the draw counter, so the result is still a
    /// pure function of `(rng, i)`.
    pub fn sample_point(&self, rng: &CounterRng, i: u64) -> Result<Vec<f64>> {
        let r = rng.at(i ^ 0x8000_0000_0000_0000);
        match self.kind() {
            DomainKind::Interval { .. } | DomainKind::HalfSpace { .. } | DomainKind::Box { .. } => {
                let scale = 10.0 * self.reference_scale();
                let (lo, hi) = self.bounding_box(scale);
                for attempt in 0..10_000u64 {
                    let x: Vec<f64> = (0..lo.len())
                        .map(|j| lo[j] + r.uniform(attempt, j as u64) * (hi[j] - lo[j]))
                        .collect();
                    if self.contains_fast(&x) {
                        return Ok(x);
                    }
                }
                Err(Error::Unconverged { what: "interior rejection sampling".into() })
            }
            DomainKind::Ball { center, radius } => {
                let d = center.len();
                let dir = sphere_point(&r, &vec![0.0; d], 1.0, d);
                let u = r.uniform(1, 0);
                let rad = radius * u.powf(1.0 / d as f64);
                Ok(center.iter().zip(&dir).map(|(c, v)| c + rad * v).collect())
            }
            DomainKind::Annulus { center, r_in, r_out } => {
                let d = center.len();
                let dir = sphere_point(&r, &vec![0.0; d], 1.0, d);
                // radius from the area-weighted CDF on [r_in, r_out]
                let u = r.uniform(1, 0);
                let p = d as f64;
                let rad = (r_in.powf(p) + u * (r_out.powf(p) - r_in.powf(p))).powf(1.0 / p);
                Ok(center.iter().zip(&dir).map(|(c, v)| c + rad * v).collect())
            }
            DomainKind::Sdf(shape) => {
                let (lo, hi) = (shape.bbox.0, shape.bbox.1);
                for attempt in 0..10_000u64 {
                    let x: Vec<f64> = (0..lo.len())
                        .map(|j| lo[j] + r.uniform(attempt, j as u64) * (hi[j] - lo[j]))
                        .collect();
                    if self.contains_fast(&x) {
                        return Ok(x);
                    }
                }
                Err(Error::Unconverged { what: "interior rejection sampling".into() })
            }
        }
    }
}

fn sphere_point(r: &CounterRng, center: &[f64], radius: f64, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|j| r.normal(3, j as u64)).collect();
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for (j, x) in v.iter_mut().enumerate() {
        *x = center[j] + radius * *x / n;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_domains_pass_any_r0() {
        for d in [
            Domain::ball(vec![0.0, 0.0], 1.0).unwrap(),
            Domain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
        ] {
            for r0 in [0.1, 1.0, 25.0] {
                let c = d.certify_interior_cone(5_000, r0, 7).unwrap();
                assert!(c.pass, "{:?} r0={r0}: {:?}", d.kind(), c);
            }
        }
    }

    // The inner circle of Annulus(0.5, 1.0) has curvature radius 0.5, so the
    // cone inequality holds iff r0 <= 0.5. Brute-force pairs on dense grids
    // locate the same threshold.
    #[test]
    fn annulus_threshold() {
        let d = Domain::annulus(vec![0.0, 0.0], 0.5, 1.0).unwrap();
        let fail = d.certify_interior_cone(10_000, 1.0, 11).unwrap();
        assert!(!fail.pass, "{fail:?}");
        let pass = d.certify_interior_cone(10_000, 0.4, 11).unwrap();
        assert!(pass.pass, "{pass:?}");
    }

    #[test]
    fn annulus_threshold_brute_force() {
        // densely scan x on the inner circle, y on both circles and interior rays
        let check = |r0: f64| -> f64 {
            let mut worst = f64::INFINITY;
            let m = 720;
            for i in 0..m {
                let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                let x = [0.5 * th.cos(), 0.5 * th.sin()];
                let n = [th.cos(), th.sin()]; // away from the hole
                for j in 0..m {
                    let ph = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    for rr in [0.5, 0.6, 0.75, 0.9, 1.0] {
                        let y = [rr * ph.cos(), rr * ph.sin()];
                        let g = [y[0] - x[0], y[1] - x[1]];
                        let margin =
                            g[0] * n[0] + g[1] * n[1] + (g[0] * g[0] + g[1] * g[1]) / (2.0 * r0);
                        worst = worst.min(margin);
                    }
                }
            }
            worst
        };
        assert!(check(1.0) < -1e-3);
        assert!(check(0.4) >= -1e-12);
        assert!(check(0.5) >= -1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = Domain::ball(vec![0.0], 1.0).unwrap();
        assert!(d.certify_interior_cone(0, 1.0, 1).is_err());
        assert!(d.certify_interior_cone(10, -1.0, 1).is_err());
    }
}
