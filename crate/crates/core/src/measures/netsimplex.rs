//! Exact transportation problem for generally weighted atomic measures:
//! a transportation-simplex solver on the bipartite supply/demand graph.
//!
//! Bland's entering rule (first negative reduced cost in a fixed order) with
//! first-index leaving ties keeps the pivoting finite under degeneracy. The
//! solver is limited to 256 atoms per side; the equal-weight assignment path
//! covers larger inputs.

use super::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};

/// Maximum number of atoms per side accepted by the LP path.
pub const MAX_LP_SIZE: usize = 256;

const MASS_TOL: f64 = 1e-15;
const PIVOT_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy)]
struct Arc {
    s: usize, // supply node index
    d: usize, // demand node index
    flow: f64,
}

/// Minimal transport cost between `mu` and `nu` under `cost(x, y)`.
pub fn transport_cost(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    cost: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    // drop zero-mass atoms
    let sup: Vec<(usize, f64)> =
        (0..mu.len()).map(|i| (i, mu.weight(i))).filter(|(_, w)| *w > 0.0).collect();
    let dem: Vec<(usize, f64)> =
        (0..nu.len()).map(|j| (j, nu.weight(j))).filter(|(_, w)| *w > 0.0).collect();
    let (m, n) = (sup.len(), dem.len());
    if m == 0 || n == 0 {
        return Err(Error::invalid("measure", "no mass"));
    }
    if m > MAX_LP_SIZE || n > MAX_LP_SIZE {
        return Err(Error::SizeLimit {
            what: "transport LP".into(),
            got: m.max(n),
            limit: MAX_LP_SIZE,
        });
    }

    let c = |i: usize, j: usize| cost(mu.atom(sup[i].0), nu.atom(dem[j].0));
    // dense cost table; at most 256x256
    let table: Vec<f64> = (0..m * n).map(|k| c(k / n, k % n)).collect();
    if !table.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { what: "transport cost".into() });
    }
    let scale = table.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-12 * scale;

    // Northwest-corner initial basis: a spanning tree with m+n-1 arcs.
    let mut arcs: Vec<Arc> = Vec::with_capacity(m + n - 1);
    {
        let (mut i, mut j) = (0usize, 0usize);
        let mut ra = sup[0].1;
        let mut rb = dem[0].1;
        loop {
            let t = ra.min(rb).max(0.0);
            arcs.push(Arc { s: i, d: j, flow: t });
            ra -= t;
            rb -= t;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if ra <= MASS_TOL && i < m - 1 {
                i += 1;
                ra = sup[i].1;
            } else {
                j += 1;
                rb = if j < n { dem[j].1 } else { 0.0 };
            }
        }
    }
    debug_assert_eq!(arcs.len(), m + n - 1);

    // node -> incident basic arc indices; nodes 0..m are supplies, m..m+n demands
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n];
    for (k, a) in arcs.iter().enumerate() {
        adj[a.s].push(k);
        adj[m + a.d].push(k);
    }

    let mut u = vec![0.0f64; m];
    let mut v = vec![0.0f64; n];
    let mut seen = vec![false; m + n];
    let mut stack: Vec<usize> = Vec::new();
    let mut parent_arc = vec![usize::MAX; m + n];
    let mut parent_node = vec![usize::MAX; m + n];

    for _pivot in 0..PIVOT_CAP {
        // potentials from the tree
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        stack.push(0);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &k in &adj[node] {
                let a = arcs[k];
                let other = if node == a.s { m + a.d } else { a.s };
                if !seen[other] {
                    seen[other] = true;
                    if other >= m {
                        v[other - m] = table[a.s * n + a.d] - u[a.s];
                    } else {
                        u[other] = table[a.s * n + a.d] - v[a.d];
                    }
                    stack.push(other);
                }
            }
        }

        // Bland: first arc with negative reduced cost
        let mut entering: Option<(usize, usize)> = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if table[i * n + j] - u[i] - v[j] < -tol {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let (ei, ej) = match entering {
            Some(e) => e,
            None => {
                let total = arcs.iter().map(|a| a.flow * table[a.s * n + a.d]).sum();
                return Ok(total);
            }
        };

        // unique tree path from supply ei to demand node m+ej
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        stack.push(ei);
        seen[ei] = true;
        parent_arc[ei] = usize::MAX;
        while let Some(node) = stack.pop() {
            if node == m + ej {
                break;
            }
            for &k in &adj[node] {
                let a = arcs[k];
                let other = if node == a.s { m + a.d } else { a.s };
                if !seen[other] {
                    seen[other] = true;
                    parent_arc[other] = k;
                    parent_node[other] = node;
                    stack.push(other);
                }
            }
        }
        debug_assert!(seen[m + ej], "basis is not connected");

        // Walk back m+ej -> ei. The entering arc pushes theta extra mass
        // into demand ej, so the tree arc leaving m+ej sheds theta, the next
        // one gains it, and so on: arcs crossed demand->supply (in walk
        // direction node -> parent) lose flow, supply->demand arcs gain.
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        let mut node = m + ej;
        while node != ei {
            let k = parent_arc[node];
            let a = arcs[k];
            let from = parent_node[node];
            let loses = node == m + a.d && from == a.s;
            debug_assert!(loses || (node == a.s && from == m + a.d));
            if loses && a.flow < theta {
                theta = a.flow;
                leaving = k;
            }
            node = from;
        }
        // Degenerate tree paths can have no losing arc only if the entering
        // arc closes a cycle of aligned arcs, which cannot happen in a
        // bipartite tree; guard anyway.
        if leaving == usize::MAX {
            return Err(Error::Unconverged { what: "transport simplex lost the cycle".into() });
        }
        let theta = theta.max(0.0);

        // apply the flow change along the walk
        let mut node = m + ej;
        while node != ei {
            let k = parent_arc[node];
            let from = parent_node[node];
            let loses = node == m + arcs[k].d && from == arcs[k].s;
            if loses {
                arcs[k].flow = (arcs[k].flow - theta).max(0.0);
            } else {
                arcs[k].flow += theta;
            }
            node = from;
        }

        // replace leaving with the entering arc
        let old = arcs[leaving];
        adj[old.s].retain(|&k| k != leaving);
        adj[m + old.d].retain(|&k| k != leaving);
        arcs[leaving] = Arc { s: ei, d: ej, flow: theta };
        adj[ei].push(leaving);
        adj[m + ej].push(leaving);
    }
    Err(Error::Unconverged { what: "transport simplex pivot cap".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::assignment::solve_assignment;
    use crate::rng::{stream, CounterRng};

    fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    #[test]
    fn dirac_pair() {
        let mu = EmpiricalMeasure::dirac(&[0.0, 0.0]).unwrap();
        let nu = EmpiricalMeasure::dirac(&[3.0, 4.0]).unwrap();
        let c = transport_cost(&mu, &nu, sq_dist).unwrap();
        assert!((c - 25.0).abs() < 1e-12);
    }

    // Dual route: the LP must agree with the assignment solver on
    // equal-weight instances.
    #[test]
    fn agrees_with_assignment() {
        let rng = CounterRng::new(31, stream::SCRATCH);
        for case in 0..20u64 {
            let n = 3 + (case % 10) as usize;
            let r = rng.at(case);
            let xs: Vec<f64> = (0..2 * n).map(|k| r.uniform(0, k as u64) * 4.0).collect();
            let ys: Vec<f64> = (0..2 * n).map(|k| r.uniform(1, k as u64) * 4.0).collect();
            let mu = EmpiricalMeasure::uniform(2, xs).unwrap();
            let nu = EmpiricalMeasure::uniform(2, ys).unwrap();
            let lp = transport_cost(&mu, &nu, sq_dist).unwrap();
            let cost: Vec<f64> = (0..n * n)
                .map(|k| sq_dist(mu.atom(k / n), nu.atom(k % n)))
                .collect();
            let (_, asg) = solve_assignment(&cost, n).unwrap();
            assert!(
                (lp - asg / n as f64).abs() < 1e-9,
                "case {case}: lp {lp} vs assignment {}",
                asg / n as f64
            );
        }
    }

    #[test]
    fn unbalanced_sizes_with_weights() {
        // mass q moved distance 4 with cost |x-y|^2: exactly q*16
        let q = 4.0f64.powi(-3);
        let mu = EmpiricalMeasure::dirac(&[0.0]).unwrap();
        let nu = EmpiricalMeasure::weighted(1, vec![0.0, 4.0], vec![1.0 - q, q]).unwrap();
        let c = transport_cost(&mu, &nu, sq_dist).unwrap();
        assert_eq!(c, 0.25);
    }

    #[test]
    fn size_limit() {
        let big = EmpiricalMeasure::uniform(1, (0..300).map(|i| i as f64).collect()).unwrap();
        let err = transport_cost(&big, &big, sq_dist);
        assert!(matches!(err, Err(Error::SizeLimit { .. })));
    }
}
