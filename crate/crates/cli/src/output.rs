//! CSV emission. Floats use Rust's shortest-roundtrip formatting, which is
//! deterministic for identical bit patterns.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rsde_core::sde::{CouplingRecord, PicardResult, SimOutput};

pub fn write_flow_csv(out: &SimOutput, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let dim = out.ensemble.dim();
    let coords: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "t,particle_id,{},l,l_tilde", coords.join(","))?;
    for (s, &t) in out.flow.times().iter().enumerate() {
        let snap = out.flow.snapshot(s);
        for i in 0..snap.len() {
            let xs: Vec<String> = snap.atom(i).iter().map(|x| x.to_string()).collect();
            writeln!(
                w,
                "{t},{i},{},{},{}",
                xs.join(","),
                out.snapshot_local_time[s][i],
                out.snapshot_tilde_local_time[s][i]
            )?;
        }
    }
    Ok(())
}

pub fn write_stats_csv(out: &SimOutput, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "particle_id,sup_abs,l_T,l_tilde_T")?;
    for i in 0..out.stats.sup_abs.len() {
        writeln!(
            w,
            "{i},{},{},{}",
            out.stats.sup_abs[i], out.stats.local_time[i], out.stats.tilde_local_time[i]
        )?;
    }
    Ok(())
}

pub fn write_picard_csv(res: &PicardResult, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iteration,sup_distance,weighted_distance,converged")?;
    for it in &res.iterations {
        writeln!(
            w,
            "{},{},{},{}",
            it.iteration, it.sup_distance, it.weighted_distance, res.converged
        )?;
    }
    Ok(())
}

pub fn write_couple_csv(rec: &CouplingRecord, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,mean_gap")?;
    for (t, g) in rec.times.iter().zip(&rec.mean_gap) {
        writeln!(w, "{t},{g}")?;
    }
    Ok(())
}

pub fn write_couple_summary(rec: &CouplingRecord, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "terminal_gap,girsanov_cost,clamped_steps,replicas")?;
    let cost = match rec.girsanov_cost {
        Some(c) => c.to_string(),
        None => "degenerate".to_string(),
    };
    writeln!(w, "{},{},{},{}", rec.terminal_gap, cost, rec.clamped_steps, rec.replicas)?;
    Ok(())
}

pub fn write_density_csv(
    traj: &[rsde_core::pde1d::DensityGrid],
    path: &Path,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,center,value")?;
    for g in traj {
        for i in 0..g.cells() {
            writeln!(w, "{},{},{}", g.time, g.center(i), g.rho[i])?;
        }
    }
    Ok(())
}

pub fn write_compare_csv(
    rows: &[rsde_core::pde1d::ComparisonRow],
    path: &Path,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,l1_distance")?;
    for r in rows {
        writeln!(w, "{},{}", r.t, r.l1)?;
    }
    Ok(())
}
