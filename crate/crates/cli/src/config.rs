//! JSON run configuration.
//!
//! Top-level keys: `domain`, `coefficients`, `sim` (T, h, N, seed, k),
//! `initial`, and the optional per-command sections `verify`, `pde`,
//! `picard`, `couple`. See the repository README for the full schema.

use serde::Deserialize;

use rsde_core::geometry::{Domain, DomainConfig};
use rsde_core::sde::{CoefficientSpec, InitialMeasure, SimConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub domain: DomainConfig,
    pub coefficients: CoefficientSpec,
    pub sim: SimSection,
    pub initial: InitialMeasure,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub pde: Option<PdeSection>,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub couple: Option<CoupleSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(rename = "T")]
    pub t: f64,
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default)]
    pub snapshot_stride: usize,
}

fn default_k() -> f64 {
    2.0
}

/// Per-check parameters, under `verify.tolerances`. Every field has a
/// default so `cmd_verify` can run any check out of the box; `nu_shift`
/// fields define the second initial law as a translate of `initial`.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default)]
    pub tolerances: CheckParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckParams {
    pub moment_k: f64,
    pub moment_xs: Vec<Vec<f64>>,
    pub local_time_ks: Vec<f64>,
    pub w2_nu_shift: Vec<f64>,
    pub w2_t_grid: Vec<f64>,
    pub w2_strongly_monotone: bool,
    pub log_harnack_nu_shift: Vec<f64>,
    pub log_harnack_t_grid: Vec<f64>,
    pub log_harnack_bins: usize,
    pub gradient_f: String,
    pub gradient_eps: Vec<f64>,
    pub gradient_direction: Vec<f64>,
    pub gradient_t_grid: Vec<f64>,
    pub occupation_f: String,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            moment_k: 2.0,
            moment_xs: vec![vec![0.0], vec![2.0], vec![4.0]],
            local_time_ks: vec![1.0, 2.0],
            w2_nu_shift: vec![1.0],
            w2_t_grid: vec![0.5, 1.0, 2.0],
            w2_strongly_monotone: false,
            log_harnack_nu_shift: vec![0.5],
            log_harnack_t_grid: vec![0.05, 0.1, 0.2, 0.4, 0.8],
            log_harnack_bins: 64,
            gradient_f: "sin".to_string(),
            gradient_eps: vec![0.05, 0.025],
            gradient_direction: vec![1.0],
            gradient_t_grid: vec![0.25, 1.0],
            occupation_f: "one".to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    /// `[a, b]` bounds of the solver grid (must match the domain interval).
    pub grid: [f64; 2],
    /// Cell count.
    #[serde(rename = "G")]
    pub cells: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardSection {
    pub max_iter: usize,
    pub tol: f64,
    pub lambda: f64,
}

impl Default for PicardSection {
    fn default() -> Self {
        PicardSection { max_iter: 20, tol: 1e-2, lambda: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleSection {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub t0: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl FileConfig {
    /// Build the validated runtime configuration.
    pub fn to_sim_config(
        &self,
        seed_override: Option<u64>,
        threads: usize,
    ) -> Result<SimConfig, String> {
        let domain = Domain::from_config(&self.domain).map_err(|e| format!("domain: {e}"))?;
        let mut cfg = SimConfig::new(
            domain,
            self.coefficients.clone(),
            self.initial.clone(),
            self.sim.t,
            self.sim.h,
            self.sim.n,
            seed_override.unwrap_or(self.sim.seed),
        );
        cfg.moment_index = self.sim.k;
        cfg.snapshot_stride = self.sim.snapshot_stride;
        cfg.threads = threads.max(1);
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

pub fn load(path: &std::path::Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))
}
