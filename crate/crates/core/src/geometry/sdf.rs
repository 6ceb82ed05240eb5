//! Built-in signed-distance shapes.
//!
//! Config files may only reference these by name; there is no runtime code
//! loading. A shape provides an (approximate) signed distance, positive in
//! the interior, and its gradient, which points inward.

/// A named signed-distance shape.
#[derive(Debug, Clone, Copy)]
pub struct SdfShape {
    pub name: &'static str,
    pub dim: usize,
    pub convex: bool,
    /// Axis-aligned bounding box of the closed region, per axis `(lo, hi)`.
    pub bbox: (&'static [f64], &'static [f64]),
    pub sd: fn(&[f64]) -> f64,
    pub grad: fn(&[f64], &mut [f64]),
}

fn disc_sd(x: &[f64]) -> f64 {
    1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt()
}

fn disc_grad(x: &[f64], g: &mut [f64]) {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r < 1e-14 {
        g[0] = 0.0;
        g[1] = 0.0;
    } else {
        g[0] = -x[0] / r;
        g[1] = -x[1] / r;
    }
}

// Level function of the unit squircle x^4 + y^4 <= 1. Not an exact distance,
// which is what the Newton projection path is there to handle.
fn squircle_sd(x: &[f64]) -> f64 {
    1.0 - (x[0].powi(4) + x[1].powi(4)).powf(0.25)
}

fn squircle_grad(x: &[f64], g: &mut [f64]) {
    let q = x[0].powi(4) + x[1].powi(4);
    if q < 1e-56 {
        g[0] = 0.0;
        g[1] = 0.0;
        return;
    }
    let s = q.powf(-0.75);
    g[0] = -x[0].powi(3) * s;
    g[1] = -x[1].powi(3) * s;
}

const UNIT_BOX_LO: [f64; 2] = [-1.0, -1.0];
const UNIT_BOX_HI: [f64; 2] = [1.0, 1.0];

const REGISTRY: &[SdfShape] = &[
    SdfShape {
        name: "unit_disc",
        dim: 2,
        convex: true,
        bbox: (&UNIT_BOX_LO, &UNIT_BOX_HI),
        sd: disc_sd,
        grad: disc_grad,
    },
    SdfShape {
        name: "squircle",
        dim: 2,
        convex: true,
        bbox: (&UNIT_BOX_LO, &UNIT_BOX_HI),
        sd: squircle_sd,
        grad: squircle_grad,
    },
];

pub fn lookup(name: &str) -> Option<SdfShape> {
    REGISTRY.iter().copied().find(|s| s.name == name)
}

pub fn sdf_registry_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|s| s.name).collect()
}
