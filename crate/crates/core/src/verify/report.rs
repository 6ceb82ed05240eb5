//! Verification reports and bootstrap confidence intervals.

use std::io::Write;

use crate::error::Result;
use crate::rng::{stream, CounterRng};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Outcome of one statistical check. The pass flag is a pure function of the
/// estimate, interval and the stated rule; reruns with the same seed
/// reproduce the report bit-exactly.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub name: String,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Human-readable pass rule with its numbers pinned.
    pub rule: String,
    pub pass: bool,
    /// `(key, value)` diagnostics: run parameters and per-point numbers.
    pub metadata: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn new(name: &str, estimate: f64, ci: (f64, f64), rule: &str, pass: bool) -> Self {
        // the interval always contains the point estimate
        let lo = ci.0.min(estimate);
        let hi = ci.1.max(estimate);
        VerificationReport {
            name: name.to_string(),
            estimate,
            ci_low: lo,
            ci_high: hi,
            rule: rule.to_string(),
            pass,
            metadata: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// One CSV row per report: `name,estimate,ci_low,ci_high,pass,rule`.
    pub fn write_csv_rows<W: Write>(reports: &[Self], mut w: W) -> Result<()> {
        writeln!(w, "name,estimate,ci_low,ci_high,pass,rule")?;
        for r in reports {
            writeln!(
                w,
                "{},{},{},{},{},{:?}",
                r.name, r.estimate, r.ci_low, r.ci_high, r.pass, r.rule
            )?;
        }
        Ok(())
    }

    /// Multi-line human-readable block.
    pub fn render_text(&self) -> String {
        let mut s = format!(
            "[{}] {}\n  estimate: {:.6e}  ci: [{:.6e}, {:.6e}]\n  rule: {}\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.estimate,
            self.ci_low,
            self.ci_high,
            self.rule,
        );
        for (k, v) in &self.metadata {
            s.push_str(&format!("  {k}: {v}\n"));
        }
        s
    }
}

/// Percentile bootstrap CI (2.5%..97.5%) for the mean of `values`, with
/// `BOOTSTRAP_RESAMPLES` resamples drawn from the dedicated stream.
pub fn bootstrap_mean_ci(values: &[f64], seed: u64) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    if values.len() == 1 {
        return (values[0], values[0]);
    }
    let rng = CounterRng::new(seed, stream::BOOTSTRAP);
    let n = values.len();
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES as u64)
        .map(|r| {
            let rr = rng.at(r);
            let mut acc = 0.0;
            for i in 0..n as u64 {
                acc += values[rr.index(i, 0, n)];
            }
            acc / n as f64
        })
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    let lo = means[(0.025 * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize];
    let hi = means[(0.975 * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize];
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_contains_estimate_by_construction() {
        let r = VerificationReport::new("x", 5.0, (6.0, 7.0), "rule", true);
        assert!(r.ci_low <= r.estimate && r.estimate <= r.ci_high);
    }

    #[test]
    fn bootstrap_brackets_the_mean() {
        let rng = CounterRng::new(4, stream::SCRATCH);
        let vals: Vec<f64> = (0..2000).map(|i| rng.normal(i, 0) + 3.0).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let (lo, hi) = bootstrap_mean_ci(&vals, 9);
        assert!(lo < mean && mean < hi);
        assert!(hi - lo < 0.3, "CI too wide: [{lo}, {hi}]");
        // deterministic
        assert_eq!(bootstrap_mean_ci(&vals, 9), (lo, hi));
    }
}
