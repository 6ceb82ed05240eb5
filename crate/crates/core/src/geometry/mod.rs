//! Domains, signed distances, inward normals, and one-step reflection.
//!
//! A [`Domain`] is the closed region the particles live in. The reflection
//! resolver [`Domain::reflect_step`] advances one Euler displacement and
//! accounts for the boundary local time it generates: exact specular folding
//! on intervals and half-spaces, nearest-point projection on the other
//! analytic bodies, damped Newton projection for signed-distance domains.

mod certify;
mod domain;
mod reflect;
mod sdf;

pub use certify::ConeCertificate;
pub use domain::{BoundarySubset, Domain, DomainConfig, DomainKind, DomainSpec};
pub use reflect::ReflectionOutcome;
pub use sdf::{sdf_registry_names, SdfShape};

/// Tolerance for geometric predicates (boundary membership, containment).
pub const EPS_GEO: f64 = 1e-12;
