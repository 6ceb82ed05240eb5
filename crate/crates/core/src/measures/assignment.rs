//! Exact linear assignment by shortest augmenting paths (the
//! Jonker-Volgenant scheme with dual potentials). Dense costs, `O(n^3)`.

use crate::error::{Error, Result};

const UNASSIGNED: usize = usize::MAX;

/// Maximum number of atoms accepted by the assignment path.
pub const MAX_ASSIGNMENT_SIZE: usize = 2048;

/// Solve the square assignment problem for the dense row-major `cost`
/// matrix. Returns `(col_of_row, total_cost)`.
pub fn solve_assignment(cost: &[f64], n: usize) -> Result<(Vec<usize>, f64)> {
    if n == 0 {
        return Err(Error::invalid("n", "assignment needs at least one row"));
    }
    if n > MAX_ASSIGNMENT_SIZE {
        return Err(Error::SizeLimit {
            what: "assignment".into(),
            got: n,
            limit: MAX_ASSIGNMENT_SIZE,
        });
    }
    if cost.len() != n * n {
        return Err(Error::invalid("cost", "must be n*n"));
    }
    if !cost.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite { what: "assignment cost".into() });
    }

    let mut u = vec![0.0f64; n]; // row potentials
    let mut v = vec![0.0f64; n]; // column potentials
    let mut col_of_row = vec![UNASSIGNED; n];
    let mut row_of_col = vec![UNASSIGNED; n];

    let mut shortest = vec![0.0f64; n];
    let mut path = vec![0usize; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        // Dijkstra over columns for an augmenting path starting at cur_row.
        let mut min_val = 0.0f64;
        let mut i = cur_row;
        let mut sink = UNASSIGNED;
        remaining.clear();
        for j in 0..n {
            remaining.push(j);
            shortest[j] = f64::INFINITY;
            path[j] = cur_row;
        }
        let mut scanned_rows: Vec<usize> = Vec::new();
        let mut scanned_cols: Vec<usize> = Vec::new();
        while sink == UNASSIGNED {
            scanned_rows.push(i);
            let mut lowest = f64::INFINITY;
            let mut lowest_pos = 0usize;
            for (pos, &j) in remaining.iter().enumerate() {
                let r = min_val + cost[i * n + j] - u[i] - v[j];
                if r < shortest[j] {
                    shortest[j] = r;
                    path[j] = i;
                }
                if shortest[j] < lowest || (shortest[j] == lowest && row_of_col[j] == UNASSIGNED) {
                    lowest = shortest[j];
                    lowest_pos = pos;
                }
            }
            if lowest.is_infinite() {
                return Err(Error::Unconverged { what: "assignment infeasible".into() });
            }
            min_val = lowest;
            let j = remaining.swap_remove(lowest_pos);
            scanned_cols.push(j);
            if row_of_col[j] == UNASSIGNED {
                sink = j;
            } else {
                i = row_of_col[j];
            }
        }
        // dual updates
        u[cur_row] += min_val;
        for &r in &scanned_rows {
            if r != cur_row {
                u[r] += min_val - shortest[col_of_row[r]];
            }
        }
        for &j in &scanned_cols {
            v[j] -= min_val - shortest[j];
        }
        // augment along the alternating path
        let mut j = sink;
        loop {
            let i = path[j];
            row_of_col[j] = i;
            std::mem::swap(&mut col_of_row[i], &mut j);
            if i == cur_row {
                break;
            }
        }
    }

    let total = (0..n).map(|i| cost[i * n + col_of_row[i]]).sum();
    Ok((col_of_row, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, CounterRng};

    fn brute_force(cost: &[f64], n: usize) -> f64 {
        fn rec(cost: &[f64], n: usize, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(cost, n, row + 1, used, acc + cost[row * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
        best
    }

    #[test]
    fn matches_brute_force_small() {
        let rng = CounterRng::new(99, stream::SCRATCH);
        for case in 0..60u64 {
            let n = 2 + (case % 6) as usize;
            let cost: Vec<f64> =
                (0..n * n).map(|k| rng.at(case).uniform(k as u64, 0) * 10.0).collect();
            let (_, total) = solve_assignment(&cost, n).unwrap();
            let expect = brute_force(&cost, n);
            assert!((total - expect).abs() < 1e-10, "case {case}: {total} vs {expect}");
        }
    }

    #[test]
    fn permutation_is_valid() {
        let rng = CounterRng::new(5, stream::SCRATCH);
        let n = 40;
        let cost: Vec<f64> = (0..n * n).map(|k| rng.uniform(k as u64, 1)).collect();
        let (perm, _) = solve_assignment(&cost, n).unwrap();
        let mut seen = vec![false; n];
        for &j in &perm {
            assert!(!seen[j]);
            seen[j] = true;
        }
    }

    #[test]
    fn size_limit_enforced() {
        let n = MAX_ASSIGNMENT_SIZE + 1;
        let err = solve_assignment(&vec![0.0; 4], n);
        assert!(matches!(err, Err(Error::SizeLimit { .. })));
    }
}
