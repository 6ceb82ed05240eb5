//! Atomic probability measures.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

/// A finitely supported probability measure on `R^d`. Atoms are stored as a
/// flat row-major array; `weights` is `None` for the uniform `1/N` case.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl EmpiricalMeasure {
    /// Uniformly weighted measure from a flat `n x dim` coordinate array.
    pub fn uniform(dim: usize, atoms: Vec<f64>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() || atoms.len() % dim != 0 {
            return Err(Error::invalid("atoms", "length must be a positive multiple of dim"));
        }
        if !atoms.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { what: "atoms".into() });
        }
        Ok(EmpiricalMeasure { dim, atoms, weights: None })
    }

    /// One-dimensional uniform measure from sample values.
    pub fn from_samples_1d(samples: &[f64]) -> Result<Self> {
        Self::uniform(1, samples.to_vec())
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::uniform(point.len(), point.to_vec())
    }

    /// Weighted measure; weights must be nonnegative and sum to one.
    pub fn weighted(dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let m = Self::uniform(dim, atoms)?;
        if weights.len() != m.len() {
            return Err(Error::invalid("weights", "one weight per atom"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights", "must be nonnegative and finite"));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::invalid("weights", format!("sum {s} != 1")));
        }
        Ok(EmpiricalMeasure { weights: Some(weights), ..m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.is_none()
    }

    #[inline]
    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.len() as f64,
        }
    }

    pub fn atoms_flat(&self) -> &[f64] {
        &self.atoms
    }

    /// Integrate a function over the measure.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * f(self.atom(i))).sum()
    }

    /// Barycenter of the measure.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.len() {
            let w = self.weight(i);
            for (mj, xj) in m.iter_mut().zip(self.atom(i)) {
                *mj += w * xj;
            }
        }
        m
    }

    /// Translate every atom by `shift`.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: shift.len() });
        }
        let mut atoms = self.atoms.clone();
        for chunk in atoms.chunks_mut(self.dim) {
            for (x, s) in chunk.iter_mut().zip(shift) {
                *x += s;
            }
        }
        Ok(EmpiricalMeasure { dim: self.dim, atoms, weights: self.weights.clone() })
    }

    /// Group exactly equal atoms and return `(point, mu_mass, nu_mass)` for
    /// the merged support of `self` and `other`. Equality is bit-exact, which
    /// is the regime produced by common-random-number couplings.
    pub fn merged_support(&self, other: &Self) -> Result<Vec<(Vec<f64>, f64, f64)>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        use std::collections::HashMap;
        let mut table: HashMap<Vec<u64>, (Vec<f64>, f64, f64)> = HashMap::new();
        for i in 0..self.len() {
            let key: Vec<u64> = self.atom(i).iter().map(|x| x.to_bits()).collect();
            let e = table
                .entry(key)
                .or_insert_with(|| (self.atom(i).to_vec(), 0.0, 0.0));
            e.1 += self.weight(i);
        }
        for i in 0..other.len() {
            let key: Vec<u64> = other.atom(i).iter().map(|x| x.to_bits()).collect();
            let e = table
                .entry(key)
                .or_insert_with(|| (other.atom(i).to_vec(), 0.0, 0.0));
            e.2 += other.weight(i);
        }
        let mut support: Vec<(Vec<f64>, f64, f64)> = table.into_values().collect();
        // deterministic order for reproducible sums
        support.sort_by(|a, b| {
            a.0.iter()
                .map(|x| x.to_bits())
                .cmp(b.0.iter().map(|x| x.to_bits()))
        });
        Ok(support)
    }

    /// Write one atom per row: `x_1,...,x_d,weight`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        writeln!(w, "{},weight", header.join(","))?;
        for i in 0..self.len() {
            let coords: Vec<String> = self.atom(i).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{}", coords.join(","), self.weight(i))?;
        }
        Ok(())
    }

    /// Read the format produced by [`EmpiricalMeasure::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        let mut dim = 0usize;
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            if ln == 0 || line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() < 2 {
                return Err(Error::invalid("csv", format!("row {ln}: too few columns")));
            }
            let row_dim = cells.len() - 1;
            if dim == 0 {
                dim = row_dim;
            } else if dim != row_dim {
                return Err(Error::invalid("csv", format!("row {ln}: ragged columns")));
            }
            for c in &cells[..row_dim] {
                atoms.push(c.trim().parse::<f64>().map_err(|e| {
                    Error::invalid("csv", format!("row {ln}: {e}"))
                })?);
            }
            weights.push(cells[row_dim].trim().parse::<f64>().map_err(|e| {
                Error::invalid("csv", format!("row {ln}: {e}"))
            })?);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() <= 1e-9 {
            // renormalize away text round-trip error
            let n = weights.len() as f64;
            if weights.iter().all(|w| (w - 1.0 / n).abs() < 1e-12) {
                return Self::uniform(dim, atoms);
            }
            let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
            Self::weighted(dim, atoms, weights)
        } else {
            Err(Error::invalid("csv", format!("weights sum to {total}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_validated() {
        assert!(EmpiricalMeasure::weighted(1, vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(EmpiricalMeasure::weighted(1, vec![0.0, 1.0], vec![0.5, 0.5]).is_ok());
        assert!(EmpiricalMeasure::weighted(1, vec![0.0, 1.0], vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = EmpiricalMeasure::weighted(
            2,
            vec![0.0, 1.0, 0.5, -2.0, 3.25, 0.125],
            vec![0.25, 0.5, 0.25],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = EmpiricalMeasure::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn merged_support_groups_exact_atoms() {
        let a = EmpiricalMeasure::uniform(1, vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        let b = EmpiricalMeasure::uniform(1, vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        let support = a.merged_support(&b).unwrap();
        assert_eq!(support.len(), 4);
        let at = |x: f64| support.iter().find(|(p, _, _)| p[0] == x).unwrap();
        assert_eq!(at(0.0).1, 0.5);
        assert_eq!(at(0.0).2, 0.25);
        assert_eq!(at(3.0).1, 0.0);
        assert_eq!(at(3.0).2, 0.25);
    }
}
