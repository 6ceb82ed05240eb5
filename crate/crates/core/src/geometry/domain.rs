//! Domain representation: containment, signed distance, inward normals.

use serde::{Deserialize, Serialize};

use super::sdf::{self, SdfShape};
use super::EPS_GEO;
use crate::error::{Error, Result};

/// The supported domain shapes. `HalfSpace { normal, offset }` is the closed
/// set `{ x : <normal, x> >= offset }` with `normal` the unit inward normal.
#[derive(Debug, Clone)]
pub enum DomainKind {
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// 1D interval `[a, b]`; either end may be infinite.
    Interval { a: f64, b: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r_in: f64, r_out: f64 },
    Sdf(SdfShape),
}

/// Predicate selecting the boundary subset that accrues the restricted local
/// time. Defaults to the whole boundary.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySubset {
    #[default]
    All,
    None,
    /// Boundary points within `radius` of `center` belong to the subset.
    /// With the center of an annulus this selects its inner sphere.
    WithinBall { center: Vec<f64>, radius: f64 },
}

impl BoundarySubset {
    #[inline]
    pub fn matches(&self, x: &[f64]) -> bool {
        match self {
            BoundarySubset::All => true,
            BoundarySubset::None => false,
            BoundarySubset::WithinBall { center, radius } => {
                let mut d2 = 0.0;
                for (xi, ci) in x.iter().zip(center) {
                    d2 += (xi - ci) * (xi - ci);
                }
                d2.sqrt() <= *radius + EPS_GEO
            }
        }
    }
}

/// Serializable description of a domain, as it appears in JSON configs under
/// the `"domain"` key.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    Interval {
        #[serde(default)]
        a: Option<f64>,
        #[serde(default)]
        b: Option<f64>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Annulus {
        center: Vec<f64>,
        r_in: f64,
        r_out: f64,
    },
    Sdf {
        name: String,
    },
}

/// Extra fields shared by all kinds in the JSON form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainConfig {
    #[serde(flatten)]
    pub spec: DomainSpec,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub boundary_subset: Option<BoundarySubset>,
}

/// The closed domain the reflected process lives in.
#[derive(Debug, Clone)]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    convex: bool,
    r0: Option<f64>,
    boundary_subset: BoundarySubset,
}

fn require_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what: name.into() })
    }
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || !(a < b) {
            return Err(Error::invalid("interval", format!("need a < b, got [{a}, {b}]")));
        }
        Ok(Domain {
            kind: DomainKind::Interval { a, b },
            dim: 1,
            convex: true,
            r0: None,
            boundary_subset: BoundarySubset::All,
        })
    }

    pub fn half_space(normal: Vec<f64>, offset: f64) -> Result<Self> {
        require_finite("half_space.normal", &normal)?;
        if !offset.is_finite() {
            return Err(Error::NonFinite { what: "half_space.offset".into() });
        }
        let n2: f64 = normal.iter().map(|x| x * x).sum();
        if n2 <= 0.0 {
            return Err(Error::invalid("half_space.normal", "zero vector"));
        }
        let inv = 1.0 / n2.sqrt();
        let dim = normal.len();
        Ok(Domain {
            kind: DomainKind::HalfSpace {
                normal: normal.iter().map(|x| x * inv).collect(),
                offset: offset * inv,
            },
            dim,
            convex: true,
            r0: None,
            boundary_subset: BoundarySubset::All,
        })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        require_finite("box.lo", &lo)?;
        require_finite("box.hi", &hi)?;
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid("box", "lo and hi must have equal positive length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::invalid("box", "need lo < hi per axis"));
        }
        let dim = lo.len();
        Ok(Domain {
            kind: DomainKind::Box { lo, hi },
            dim,
            convex: true,
            r0: None,
            boundary_subset: BoundarySubset::All,
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        require_finite("ball.center", &center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("ball.radius", "must be positive and finite"));
        }
        let dim = center.len();
        Ok(Domain {
            kind: DomainKind::Ball { center, radius },
            dim,
            convex: true,
            r0: None,
            boundary_subset: BoundarySubset::All,
        })
    }

    pub fn annulus(center: Vec<f64>, r_in: f64, r_out: f64) -> Result<Self> {
        require_finite("annulus.center", &center)?;
        if !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
            return Err(Error::invalid("annulus", "need 0 < r_in < r_out < inf"));
        }
        let dim = center.len();
        Ok(Domain {
            kind: DomainKind::Annulus { center, r_in, r_out },
            dim,
            convex: false,
            r0: None,
            boundary_subset: BoundarySubset::All,
        })
    }

    pub fn sdf(name: &str) -> Result<Self> {
        let shape = sdf::lookup(name).ok_or_else(|| Error::UnknownName {
            registry: "sdf".into(),
            name: name.into(),
        })?;
        Ok(Domain {
            dim: shape.dim,
            convex: shape.convex,
            kind: DomainKind::Sdf(shape),
            r0: None,
            boundary_subset: BoundarySubset::All,
        })
    }

    pub fn from_config(cfg: &DomainConfig) -> Result<Self> {
        let mut d = match &cfg.spec {
            DomainSpec::HalfSpace { normal, offset } => Self::half_space(normal.clone(), *offset)?,
            DomainSpec::Interval { a, b } => {
                Self::interval(a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))?
            }
            DomainSpec::Box { lo, hi } => Self::boxed(lo.clone(), hi.clone())?,
            DomainSpec::Ball { center, radius } => Self::ball(center.clone(), *radius)?,
            DomainSpec::Annulus { center, r_in, r_out } => {
                Self::annulus(center.clone(), *r_in, *r_out)?
            }
            DomainSpec::Sdf { name } => Self::sdf(name)?,
        };
        if let Some(r0) = cfg.r0 {
            d = d.with_r0(r0)?;
        }
        if let Some(bs) = &cfg.boundary_subset {
            d = d.with_boundary_subset(bs.clone());
        }
        Ok(d)
    }

    /// Interior-cone constant; see `certify_interior_cone`.
    pub fn with_r0(mut self, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::invalid("r0", "must be positive"));
        }
        self.r0 = Some(r0);
        Ok(self)
    }

    pub fn with_boundary_subset(mut self, subset: BoundarySubset) -> Self {
        self.boundary_subset = subset;
        self
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn convex(&self) -> bool {
        self.convex
    }

    pub fn r0(&self) -> Option<f64> {
        self.r0
    }

    pub fn boundary_subset(&self) -> &BoundarySubset {
        &self.boundary_subset
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got: x.len() })
        }
    }

    /// Membership in the closed domain, with tolerance `EPS_GEO` at the
    /// boundary. Errors on dimension mismatch or non-finite input.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "contains.x".into() });
        }
        Ok(self.contains_fast(x))
    }

    #[inline]
    pub(crate) fn contains_fast(&self, x: &[f64]) -> bool {
        self.signed_distance_unchecked(x) >= -EPS_GEO
    }

    /// Signed distance to the boundary: positive inside, zero on the
    /// boundary, negative outside. Exact for the analytic kinds; delegates to
    /// the shape function for `Sdf`. Panics on dimension mismatch.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "signed_distance: dimension mismatch");
        self.signed_distance_unchecked(x)
    }

    #[inline]
    pub(crate) fn signed_distance_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                let da = if a.is_finite() { x[0] - a } else { f64::INFINITY };
                let db = if b.is_finite() { b - x[0] } else { f64::INFINITY };
                da.min(db)
            }
            DomainKind::HalfSpace { normal, offset } => dot(normal, x) - offset,
            DomainKind::Box { lo, hi } => {
                let mut inside = f64::INFINITY;
                let mut out2 = 0.0;
                for i in 0..x.len() {
                    let d_lo = x[i] - lo[i];
                    let d_hi = hi[i] - x[i];
                    inside = inside.min(d_lo.min(d_hi));
                    let viol = (-d_lo).max(-d_hi).max(0.0);
                    out2 += viol * viol;
                }
                if out2 > 0.0 {
                    -out2.sqrt()
                } else {
                    inside
                }
            }
            DomainKind::Ball { center, radius } => radius - dist(center, x),
            DomainKind::Annulus { center, r_in, r_out } => {
                let r = dist(center, x);
                (r - r_in).min(r_out - r)
            }
            DomainKind::Sdf(shape) => (shape.sd)(x),
        }
    }

    /// Unit inward normal at a boundary point. At non-smooth convex corners
    /// returns the normalized sum of the adjacent face normals, a valid
    /// element of the inward normal cone.
    pub fn inward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let sd = self.signed_distance_unchecked(x);
        if sd.abs() > EPS_GEO {
            return Err(Error::NotOnBoundary { sd });
        }
        match &self.kind {
            DomainKind::Interval { a, b } => {
                let near_a = a.is_finite() && (x[0] - a).abs() <= EPS_GEO;
                let near_b = b.is_finite() && (b - x[0]).abs() <= EPS_GEO;
                match (near_a, near_b) {
                    (true, false) => Ok(vec![1.0]),
                    (false, true) => Ok(vec![-1.0]),
                    _ => Err(Error::EmptyNormalCone {
                        reason: "ambiguous interval endpoint".into(),
                    }),
                }
            }
            DomainKind::HalfSpace { normal, .. } => Ok(normal.clone()),
            DomainKind::Box { lo, hi } => {
                let mut n = vec![0.0; x.len()];
                let mut any = false;
                for i in 0..x.len() {
                    if (x[i] - lo[i]).abs() <= EPS_GEO {
                        n[i] += 1.0;
                        any = true;
                    }
                    if (hi[i] - x[i]).abs() <= EPS_GEO {
                        n[i] -= 1.0;
                        any = true;
                    }
                }
                if !any {
                    return Err(Error::NotOnBoundary { sd });
                }
                normalize(&mut n).map_err(|_| Error::EmptyNormalCone {
                    reason: "opposite box faces cancel".into(),
                })?;
                Ok(n)
            }
            DomainKind::Ball { center, .. } => {
                let mut n: Vec<f64> = center.iter().zip(x).map(|(c, xi)| c - xi).collect();
                normalize(&mut n).map_err(|_| Error::EmptyNormalCone {
                    reason: "ball center is not a boundary point".into(),
                })?;
                Ok(n)
            }
            DomainKind::Annulus { center, r_in, r_out } => {
                let r = dist(center, x);
                let outward_inner = (r - r_in).abs() <= (r_out - r).abs();
                let mut n: Vec<f64> = if outward_inner {
                    // inner sphere: normal points away from the hole
                    x.iter().zip(center).map(|(xi, c)| xi - c).collect()
                } else {
                    x.iter().zip(center).map(|(xi, c)| c - xi).collect()
                };
                normalize(&mut n).map_err(|_| Error::EmptyNormalCone {
                    reason: "annulus center".into(),
                })?;
                Ok(n)
            }
            DomainKind::Sdf(shape) => {
                let mut g = vec![0.0; x.len()];
                (shape.grad)(x, &mut g);
                normalize(&mut g).map_err(|_| Error::EmptyNormalCone {
                    reason: "signed-distance gradient vanishes".into(),
                })?;
                Ok(g)
            }
        }
    }

    /// A finite length scale of the domain: the diameter when bounded, or a
    /// unit reference scale for unbounded kinds.
    pub fn reference_scale(&self) -> f64 {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                if a.is_finite() && b.is_finite() {
                    b - a
                } else {
                    1.0
                }
            }
            DomainKind::HalfSpace { .. } => 1.0,
            DomainKind::Box { lo, hi } => dist(lo, hi),
            DomainKind::Ball { radius, .. } => 2.0 * radius,
            DomainKind::Annulus { r_out, .. } => 2.0 * r_out,
            DomainKind::Sdf(shape) => dist(shape.bbox.0, shape.bbox.1),
        }
    }

    /// Axis-aligned box enclosing the domain (clipped to `scale` around the
    /// anchor for unbounded kinds), used by samplers and histograms.
    pub fn bounding_box(&self, scale: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                let lo = if a.is_finite() { *a } else { b.min(0.0) - scale };
                let hi = if b.is_finite() { *b } else { a.max(0.0) + scale };
                (vec![lo], vec![hi])
            }
            DomainKind::HalfSpace { normal, offset } => {
                // box of side 2*scale centred on the boundary anchor offset*n
                let lo: Vec<f64> = normal.iter().map(|n| n * offset - scale).collect();
                let hi: Vec<f64> = normal.iter().map(|n| n * offset + scale).collect();
                (lo, hi)
            }
            DomainKind::Box { lo, hi } => (lo.clone(), hi.clone()),
            DomainKind::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            DomainKind::Annulus { center, r_out, .. } => (
                center.iter().map(|c| c - r_out).collect(),
                center.iter().map(|c| c + r_out).collect(),
            ),
            DomainKind::Sdf(shape) => (shape.bbox.0.to_vec(), shape.bbox.1.to_vec()),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn normalize(v: &mut [f64]) -> std::result::Result<(), ()> {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-14 {
        return Err(());
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_interval() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        assert!(d.contains(&[0.5]).unwrap());
        assert!(d.contains(&[0.0]).unwrap());
        assert!(d.contains(&[1.0]).unwrap());
        assert!(!d.contains(&[1.0 + 1e-9]).unwrap());
        assert!(d.contains(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn contains_ball_exterior() {
        let d = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(!d.contains(&[1.1, 0.0]).unwrap());
        assert!(d.contains(&[1.0, 0.0]).unwrap());
    }

    #[test]
    fn signed_distance_examples() {
        let i = Domain::interval(0.0, 1.0).unwrap();
        assert!((i.signed_distance(&[0.3]) - 0.3).abs() < 1e-15);
        let b = Domain::ball(vec![0.0], 1.0).unwrap();
        assert!((b.signed_distance(&[0.0]) - 1.0).abs() < 1e-15);
        let a = Domain::annulus(vec![0.0, 0.0], 0.5, 1.0).unwrap();
        assert!((a.signed_distance(&[0.75, 0.0]) - 0.25).abs() < 1e-15);
    }

    // Signed distance of the annulus against brute-force minimization over
    // densely sampled boundary points.
    #[test]
    fn annulus_distance_brute_force() {
        let a = Domain::annulus(vec![0.0, 0.0], 0.5, 1.0).unwrap();
        let m = 20_000;
        for &p in &[[0.75, 0.0], [0.6, 0.1], [0.2, 0.2], [1.3, -0.4]] {
            let mut best = f64::INFINITY;
            for i in 0..m {
                let th = 2.0 * std::f64::consts::PI * (i as f64) / m as f64;
                for r in [0.5, 1.0] {
                    let bx = r * th.cos();
                    let by = r * th.sin();
                    best = best.min(((p[0] - bx).powi(2) + (p[1] - by).powi(2)).sqrt());
                }
            }
            let inside = {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                (0.5..=1.0).contains(&r)
            };
            let expect = if inside { best } else { -best };
            assert!(
                (a.signed_distance(&p) - expect).abs() < 1e-6,
                "sd mismatch at {p:?}"
            );
        }
    }

    #[test]
    fn normals() {
        let hs = Domain::half_space(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(hs.inward_normal(&[0.0, 3.7]).unwrap(), vec![1.0, 0.0]);

        let b = Domain::ball(vec![0.0, 0.0], 2.0).unwrap();
        let n = b.inward_normal(&[2.0, 0.0]).unwrap();
        assert!((n[0] + 1.0).abs() < 1e-12 && n[1].abs() < 1e-12);

        let bx = Domain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let n = bx.inward_normal(&[0.0, 0.0]).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((n[0] - s).abs() < 1e-12 && (n[1] - s).abs() < 1e-12);

        assert!(bx.inward_normal(&[0.5, 0.5]).is_err());
    }

    // Corner normal is a valid element of the normal cone: <y - x, n> >= 0
    // for a grid of y in the box.
    #[test]
    fn corner_normal_in_cone() {
        let bx = Domain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let n = bx.inward_normal(&[0.0, 0.0]).unwrap();
        let g = 50;
        for i in 0..=g {
            for j in 0..=g {
                let y = [i as f64 / g as f64, j as f64 / g as f64];
                let inner = y[0] * n[0] + y[1] * n[1];
                assert!(inner >= -1e-15, "cone violated at {y:?}");
            }
        }
    }

    // <inward normal, grad signed_distance> > 0 at smooth boundary points.
    #[test]
    fn normal_aligns_with_distance_gradient() {
        let domains = [
            Domain::ball(vec![0.2, -0.3], 1.5).unwrap(),
            Domain::annulus(vec![0.0, 0.0], 0.5, 1.0).unwrap(),
            Domain::half_space(vec![0.6, 0.8], -0.2).unwrap(),
        ];
        let h = 1e-6;
        for d in &domains {
            for k in 0..32 {
                let th = 2.0 * std::f64::consts::PI * (k as f64) / 32.0;
                // march from a ray to the boundary by bisection on sd
                let dir = [th.cos(), th.sin()];
                let mut lo = 0.0;
                let mut hi = 10.0;
                let anchor = [0.2, -0.1];
                let sd_at = |t: f64| {
                    d.signed_distance(&[anchor[0] + t * dir[0], anchor[1] + t * dir[1]])
                };
                if sd_at(lo) < 0.0 || sd_at(hi) > 0.0 {
                    continue;
                }
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if sd_at(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x = [anchor[0] + lo * dir[0], anchor[1] + lo * dir[1]];
                if d.signed_distance(&x).abs() > EPS_GEO {
                    continue;
                }
                let n = d.inward_normal(&x).unwrap();
                let gx = (d.signed_distance(&[x[0] + h, x[1]])
                    - d.signed_distance(&[x[0] - h, x[1]]))
                    / (2.0 * h);
                let gy = (d.signed_distance(&[x[0], x[1] + h])
                    - d.signed_distance(&[x[0], x[1] - h]))
                    / (2.0 * h);
                assert!(n[0] * gx + n[1] * gy > 0.5, "normal disagrees with grad sd");
            }
        }
    }
}
