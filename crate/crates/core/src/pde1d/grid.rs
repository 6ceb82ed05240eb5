//! Density grids.

use crate::error::{Error, Result};
use crate::sde::InitialMeasure;

/// Cell-averaged density on a uniform 1D grid over `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub a: f64,
    pub b: f64,
    pub rho: Vec<f64>,
    pub time: f64,
}

impl DensityGrid {
    pub fn new(a: f64, b: f64, cells: usize) -> Result<Self> {
        if !(a < b) || cells == 0 {
            return Err(Error::invalid("grid", "need a < b and at least one cell"));
        }
        Ok(DensityGrid { a, b, rho: vec![1.0 / (b - a); cells], time: 0.0 })
    }

    pub fn cells(&self) -> usize {
        self.rho.len()
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.rho.len() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.dx()
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dx()
    }

    /// Project an initial law onto the grid (normalized).
    pub fn from_initial(a: f64, b: f64, cells: usize, initial: &InitialMeasure) -> Result<Self> {
        let mut g = DensityGrid::new(a, b, cells)?;
        let dx = g.dx();
        match initial {
            InitialMeasure::Dirac { point } => {
                if point.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: point.len() });
                }
                let i = (((point[0] - a) / dx).floor() as isize).clamp(0, cells as isize - 1);
                g.rho.iter_mut().for_each(|r| *r = 0.0);
                g.rho[i as usize] = 1.0 / dx;
            }
            InitialMeasure::UniformBox { lo, hi } => {
                if lo.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: lo.len() });
                }
                for i in 0..cells {
                    let cl = a + i as f64 * dx;
                    let cr = cl + dx;
                    let overlap = (cr.min(hi[0]) - cl.max(lo[0])).max(0.0);
                    g.rho[i] = overlap / dx / (hi[0] - lo[0]);
                }
            }
            InitialMeasure::Gaussian { mean, sd } => {
                if mean.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: mean.len() });
                }
                for i in 0..cells {
                    let x = g.center(i);
                    g.rho[i] = (-(x - mean[0]) * (x - mean[0]) / (2.0 * sd * sd)).exp();
                }
            }
        }
        let m = g.mass();
        if m <= 0.0 {
            return Err(Error::invalid("initial", "no mass lands on the grid"));
        }
        g.rho.iter_mut().for_each(|r| *r /= m);
        Ok(g)
    }

    /// Mass-conservation / positivity invariant check.
    pub fn validate(&self) -> Result<()> {
        if let Some((i, &v)) = self
            .rho
            .iter()
            .enumerate()
            .find(|(_, &v)| v < -1e-12)
        {
            return Err(Error::NegativeDensity { cell: i, value: v });
        }
        let m = self.mass();
        if (m - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("density", format!("mass drifted to {m}")));
        }
        Ok(())
    }
}

/// Tensor-product 2D density on a box, row-major cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid2 {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub cells: [usize; 2],
    pub rho: Vec<f64>,
    pub time: f64,
}

impl DensityGrid2 {
    pub fn new(lo: [f64; 2], hi: [f64; 2], cells: [usize; 2]) -> Result<Self> {
        if !(lo[0] < hi[0] && lo[1] < hi[1]) || cells[0] == 0 || cells[1] == 0 {
            return Err(Error::invalid("grid2", "degenerate box or zero cells"));
        }
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        Ok(DensityGrid2 {
            lo,
            hi,
            cells,
            rho: vec![1.0 / area; cells[0] * cells[1]],
            time: 0.0,
        })
    }

    pub fn dx(&self) -> [f64; 2] {
        [
            (self.hi[0] - self.lo[0]) / self.cells[0] as f64,
            (self.hi[1] - self.lo[1]) / self.cells[1] as f64,
        ]
    }

    pub fn center(&self, ix: usize, iy: usize) -> [f64; 2] {
        let d = self.dx();
        [self.lo[0] + (ix as f64 + 0.5) * d[0], self.lo[1] + (iy as f64 + 0.5) * d[1]]
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        ix * self.cells[1] + iy
    }

    pub fn mass(&self) -> f64 {
        let d = self.dx();
        self.rho.iter().sum::<f64>() * d[0] * d[1]
    }
}
