//! `rsde`: batch front-end for the reflected mean-field SDE toolkit.
//!
//! Exit codes: 0 success, 1 at least one requested verification check
//! failed, 2 configuration error, 3 runtime error.

mod config;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rsde_core::geometry::DomainKind;
use rsde_core::pde1d::{compare_particle_pde, fp_run_to_times, DensityGrid};
use rsde_core::sde::{couple_pair, picard_solve, simulate_mckean};
use rsde_core::verify::{
    check_gradient_estimate, check_local_time_moments, check_log_harnack, check_moment_bound,
    check_w2_contraction, occupation_integral, TestFunction, VerificationReport,
};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "rsde", version, about = "Particle simulator and verification harness for reflected mean-field SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; affects speed only, never results.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the interacting particle simulation and write the measure flow.
    Simulate(CommonArgs),
    /// Run named verification checks (exit nonzero if any fails).
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated check names: moment_bound, local_time_moments,
        /// w2_contraction, log_harnack, gradient_estimate, occupation.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Fixed-point iteration of the frozen-flow map.
    Picard(CommonArgs),
    /// Bridging coupling of two solutions.
    Couple(CommonArgs),
    /// Cross-validate the particle law against the finite-volume density.
    PdeCompare(CommonArgs),
}

enum Failure {
    Config(String),
    Runtime(String),
    ChecksFailed,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::ChecksFailed => 1,
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => run_simulate(c),
        Command::Verify { common, checks } => run_verify(common, checks),
        Command::Picard(c) => run_picard(c),
        Command::Couple(c) => run_couple(c),
        Command::PdeCompare(c) => run_pde_compare(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Runtime(m) => eprintln!("runtime error: {m}"),
                Failure::ChecksFailed => eprintln!("one or more checks failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn prepare(
    common: &CommonArgs,
    command: &str,
) -> Result<(config::FileConfig, rsde_core::sde::SimConfig, Manifest), Failure> {
    let file = config::load(&common.config).map_err(Failure::Config)?;
    let cfg = file
        .to_sim_config(common.seed, common.threads)
        .map_err(Failure::Config)?;
    let manifest = Manifest::start(command, &common.config, &common.out, cfg.seed, cfg.threads)
        .map_err(|e| Failure::Runtime(format!("cannot create output directory: {e}")))?;
    Ok((file, cfg, manifest))
}

fn run_simulate(common: &CommonArgs) -> Result<(), Failure> {
    let (_file, cfg, manifest) = prepare(common, "simulate")?;
    let out = simulate_mckean(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    output::write_flow_csv(&out, &common.out.join("flow.csv"))
        .and_then(|_| output::write_stats_csv(&out, &common.out.join("stats.csv")))
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    manifest
        .finalize("complete")
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(())
}

fn run_verify(common: &CommonArgs, checks: &[String]) -> Result<(), Failure> {
    if checks.is_empty() {
        return Err(Failure::Config("no checks requested (use --checks)".into()));
    }
    let (file, cfg, manifest) = prepare(common, "verify")?;
    let p = &file.verify.tolerances;

    let mut reports: Vec<VerificationReport> = Vec::new();
    for name in checks {
        let report = match name.as_str() {
            "moment_bound" => check_moment_bound(&cfg, p.moment_k, &p.moment_xs),
            "local_time_moments" => check_local_time_moments(&cfg, &p.local_time_ks),
            "w2_contraction" => {
                let nu = cfg
                    .initial
                    .translated(&p.w2_nu_shift)
                    .map_err(|e| Failure::Config(e.to_string()))?;
                check_w2_contraction(
                    &cfg,
                    &cfg.initial,
                    &nu,
                    &p.w2_t_grid,
                    p.w2_strongly_monotone,
                )
            }
            "log_harnack" => {
                let nu = cfg
                    .initial
                    .translated(&p.log_harnack_nu_shift)
                    .map_err(|e| Failure::Config(e.to_string()))?;
                check_log_harnack(&cfg, &cfg.initial, &nu, &p.log_harnack_t_grid, p.log_harnack_bins)
            }
            "gradient_estimate" => {
                let f = TestFunction::by_name(&p.gradient_f)
                    .map_err(|e| Failure::Config(e.to_string()))?;
                check_gradient_estimate(
                    &cfg,
                    &f,
                    &cfg.initial,
                    &p.gradient_eps,
                    &p.gradient_direction,
                    &p.gradient_t_grid,
                )
            }
            "occupation" => {
                let f = TestFunction::by_name(&p.occupation_f)
                    .map_err(|e| Failure::Config(e.to_string()))?;
                occupation_integral(&cfg, &f)
            }
            other => {
                return Err(Failure::Config(format!("unknown check name {other:?}")));
            }
        }
        .map_err(|e| Failure::Runtime(e.to_string()))?;
        reports.push(report);
    }

    let mut csv = Vec::new();
    VerificationReport::write_csv_rows(&reports, &mut csv)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(common.out.join("reports.csv"), csv)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let summary: String = reports.iter().map(|r| r.render_text()).collect();
    std::fs::write(common.out.join("summary.txt"), &summary)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    print!("{summary}");

    let all_pass = reports.iter().all(|r| r.pass);
    manifest
        .finalize(if all_pass { "complete" } else { "checks_failed" })
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    if all_pass {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn run_picard(common: &CommonArgs) -> Result<(), Failure> {
    let (file, cfg, manifest) = prepare(common, "picard")?;
    let gamma = cfg
        .initial_measure()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let sec = &file.picard;
    let res = picard_solve(&cfg, &gamma, sec.max_iter, sec.tol, sec.lambda)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    output::write_picard_csv(&res, &common.out.join("picard.csv"))
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    // terminal law of the fixed-point flow
    let mut terminal = Vec::new();
    res.flow
        .terminal()
        .write_csv(&mut terminal)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(common.out.join("terminal_measure.csv"), terminal)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    manifest
        .finalize(if res.converged { "complete" } else { "not_converged" })
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(())
}

fn run_couple(common: &CommonArgs) -> Result<(), Failure> {
    let (file, cfg, manifest) = prepare(common, "couple")?;
    let sec = file
        .couple
        .as_ref()
        .ok_or_else(|| Failure::Config("missing \"couple\" section".into()))?;

    // frozen flows for the two marginals, from plain simulations under the
    // shared seed
    let mu_cfg = {
        let mut c = cfg.clone();
        c.initial = rsde_core::sde::InitialMeasure::Dirac { point: sec.x0.clone() };
        c
    };
    let nu_cfg = {
        let mut c = cfg.clone();
        c.initial = rsde_core::sde::InitialMeasure::Dirac { point: sec.y0.clone() };
        c
    };
    let mu_flow = simulate_mckean(&mu_cfg)
        .map_err(|e| Failure::Runtime(e.to_string()))?
        .flow;
    let nu_flow = simulate_mckean(&nu_cfg)
        .map_err(|e| Failure::Runtime(e.to_string()))?
        .flow;
    let rec = couple_pair(&cfg, &sec.x0, &sec.y0, sec.t0, sec.l, &mu_flow, &nu_flow)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    output::write_couple_csv(&rec, &common.out.join("couple.csv"))
        .and_then(|_| output::write_couple_summary(&rec, &common.out.join("couple_summary.csv")))
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    manifest
        .finalize("complete")
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(())
}

fn run_pde_compare(common: &CommonArgs) -> Result<(), Failure> {
    let (file, cfg, manifest) = prepare(common, "pde-compare")?;
    let sec = file
        .pde
        .as_ref()
        .ok_or_else(|| Failure::Config("missing \"pde\" section".into()))?;

    // the solver grid must agree with the simulation domain
    match cfg.domain.kind() {
        DomainKind::Interval { a, b } => {
            if (a - sec.grid[0]).abs() > 1e-12 || (b - sec.grid[1]).abs() > 1e-12 {
                return Err(Failure::Config(format!(
                    "pde grid [{}, {}] does not match the domain interval [{a}, {b}]",
                    sec.grid[0], sec.grid[1]
                )));
            }
        }
        _ => {
            return Err(Failure::Config(
                "pde-compare requires an interval domain".into(),
            ))
        }
    }

    let particles = simulate_mckean(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    let grid0 = DensityGrid::from_initial(sec.grid[0], sec.grid[1], sec.cells, &cfg.initial)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let traj = fp_run_to_times(&grid0, &cfg.coefficients, particles.flow.times(), f64::INFINITY)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let rows = compare_particle_pde(&particles.flow, &traj)
        .map_err(|e| Failure::Runtime(e.to_string()))?;

    output::write_density_csv(&traj, &common.out.join("density.csv"))
        .and_then(|_| output::write_compare_csv(&rows, &common.out.join("compare.csv")))
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    manifest
        .finalize("complete")
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(())
}
