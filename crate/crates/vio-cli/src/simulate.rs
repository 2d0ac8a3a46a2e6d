use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use vio_core::format::format_sig9;
use vio_core::pipeline::{run, write_trajectory_csv, RunReport};
use vio_core::sim::{write_frames_csv, write_observations_csv};

use crate::config::RunConfig;

/// Drift requirement: the localization error budget per hour of flight.
pub const DRIFT_LIMIT_M: f64 = 900.0;

/// Runs every configured seed, writes per-run artifacts and the aggregate
/// summary. Returns the process exit code: 0 on success, 2 when any frame
/// was flagged (the run still completes).
pub fn cmd_simulate(config: &RunConfig) -> Result<i32> {
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("cannot create output directory {}", config.out_dir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .context("cannot build worker pool")?;

    let single = config.seeds.len() == 1;
    let mut outcomes: Vec<(u64, RunReport)> = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| {
                let dir = seed_dir(&config.out_dir, seed, single);
                let report = run_one(config, seed, &dir)?;
                Ok((seed, report))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    // Workers finish in any order; the summary is sorted by seed.
    outcomes.sort_by_key(|(seed, _)| *seed);

    let summary_path = config.out_dir.join("summary.txt");
    let mut summary = fs::File::create(&summary_path)
        .with_context(|| format!("cannot write {}", summary_path.display()))?;
    write_summary(&mut summary, &outcomes)?;

    let flagged = outcomes
        .iter()
        .any(|(_, r)| r.nonconverged_frames > 0 || r.fallback_frames > 0);
    Ok(if flagged { 2 } else { 0 })
}

fn seed_dir(out_dir: &Path, seed: u64, single: bool) -> PathBuf {
    if single {
        out_dir.to_path_buf()
    } else {
        out_dir.join(format!("seed_{seed}"))
    }
}

fn run_one(config: &RunConfig, seed: u64, dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(dir)?;
    let intrinsics = config.intrinsics();

    let truth = vio_core::sim::gen_trajectory(&config.plan);
    let field = vio_core::sim::gen_landmarks(&truth, &intrinsics, &config.sim, seed)?;
    let frames =
        vio_core::sim::simulate_sensors(&truth, &field, &intrinsics, &config.sim, &config.noise, seed);

    let mut frames_csv = BufWriter::new(fs::File::create(dir.join("frames.csv"))?);
    write_frames_csv(&mut frames_csv, &frames)?;
    frames_csv.flush()?;
    let mut obs_csv = BufWriter::new(fs::File::create(dir.join("obs.csv"))?);
    write_observations_csv(&mut obs_csv, &frames)?;
    obs_csv.flush()?;

    let report = run(
        &config.plan,
        &config.sim,
        &config.noise,
        &config.pipeline,
        &intrinsics,
        seed,
    )?;
    let mut trajectory = BufWriter::new(fs::File::create(dir.join("trajectory.csv"))?);
    write_trajectory_csv(&mut trajectory, &report)?;
    trajectory.flush()?;
    Ok(report)
}

fn write_summary<W: Write>(out: &mut W, outcomes: &[(u64, RunReport)]) -> Result<()> {
    writeln!(out, "runs: {}", outcomes.len())?;
    writeln!(out, "drift_requirement_m: {}", format_sig9(DRIFT_LIMIT_M))?;
    for (seed, report) in outcomes {
        writeln!(out, "\n[seed {seed}]")?;
        writeln!(out, "frames: {}", report.estimated_track.len())?;
        writeln!(out, "final_error_m: {}", format_sig9(report.proposed.final_m))?;
        writeln!(out, "mean_error_m: {}", format_sig9(report.proposed.mean_m))?;
        writeln!(out, "max_error_m: {}", format_sig9(report.proposed.max_m))?;
        writeln!(
            out,
            "drift_m_per_hour: {}",
            format_sig9(report.proposed.drift_m_per_hour)
        )?;
        writeln!(
            out,
            "ins_final_error_m: {}",
            format_sig9(report.ins_baseline.final_m)
        )?;
        let ratio = if report.proposed.final_m > 0.0 {
            report.ins_baseline.final_m / report.proposed.final_m
        } else {
            f64::INFINITY
        };
        writeln!(out, "ins_over_proposed: {}", format_sig9(ratio))?;
        writeln!(out, "singular_frames: {}", report.singular_frames)?;
        writeln!(out, "nonconverged_frames: {}", report.nonconverged_frames)?;
        writeln!(out, "fallback_frames: {}", report.fallback_frames)?;
        writeln!(
            out,
            "meets_requirement: {}",
            report.meets_drift_requirement(DRIFT_LIMIT_M)
        )?;
    }

    let mut finals: Vec<f64> = outcomes.iter().map(|(_, r)| r.proposed.final_m).collect();
    finals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if finals.is_empty() {
        0.0
    } else if finals.len() % 2 == 1 {
        finals[finals.len() / 2]
    } else {
        0.5 * (finals[finals.len() / 2 - 1] + finals[finals.len() / 2])
    };
    writeln!(out, "\n[aggregate]")?;
    writeln!(out, "median_final_error_m: {}", format_sig9(median))?;
    writeln!(
        out,
        "worst_final_error_m: {}",
        format_sig9(finals.last().copied().unwrap_or(0.0))
    )?;
    writeln!(
        out,
        "all_meet_requirement: {}",
        outcomes
            .iter()
            .all(|(_, r)| r.meets_drift_requirement(DRIFT_LIMIT_M))
    )?;
    Ok(())
}
