use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use vio_core::format::format_sig9;

use crate::simulate::DRIFT_LIMIT_M;

#[derive(Debug)]
struct RunSeries {
    name: String,
    t: Vec<f64>,
    err_m: Vec<f64>,
    ins_err_m: Vec<f64>,
}

impl RunSeries {
    fn final_err(&self) -> f64 {
        *self.err_m.last().unwrap()
    }

    fn mean_err(&self) -> f64 {
        self.err_m.iter().sum::<f64>() / self.err_m.len() as f64
    }

    fn drift_per_hour(&self) -> f64 {
        let t_final = *self.t.last().unwrap();
        if t_final > 0.0 {
            self.final_err() * 3600.0 / t_final
        } else {
            0.0
        }
    }

    fn ins_final(&self) -> f64 {
        *self.ins_err_m.last().unwrap()
    }
}

/// Aggregates one or more run directories into a comparison table on stdout
/// and a plot-ready long-format CSV (`t,series,value`).
pub fn cmd_report(run_dirs: &[PathBuf], out_csv: &Path) -> Result<i32> {
    let mut series = Vec::new();
    for dir in run_dirs {
        collect_runs(dir, &mut series)
            .with_context(|| format!("cannot read run directory {}", dir.display()))?;
    }
    if series.is_empty() {
        bail!("no trajectory.csv found under the given run directories");
    }
    series.sort_by(|a, b| a.name.cmp(&b.name));

    println!(
        "{:<24} {:>7} {:>12} {:>12} {:>14} {:>12} {:>8} {:>6}",
        "run", "frames", "final_m", "mean_m", "drift_m_per_h", "ins_final_m", "ratio", "pass"
    );
    let mut finals = Vec::new();
    let mut all_pass = true;
    for s in &series {
        let pass = s.final_err() < DRIFT_LIMIT_M;
        all_pass &= pass;
        finals.push(s.final_err());
        let ratio = if s.final_err() > 0.0 {
            s.ins_final() / s.final_err()
        } else {
            f64::INFINITY
        };
        println!(
            "{:<24} {:>7} {:>12.3} {:>12.3} {:>14.3} {:>12.1} {:>8.1} {:>6}",
            s.name,
            s.t.len(),
            s.final_err(),
            s.mean_err(),
            s.drift_per_hour(),
            s.ins_final(),
            ratio,
            pass,
        );
    }
    finals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if finals.len() % 2 == 1 {
        finals[finals.len() / 2]
    } else {
        0.5 * (finals[finals.len() / 2 - 1] + finals[finals.len() / 2])
    };
    println!(
        "{:<24} {:>7} {:>12.3} {:>12} {:>14} {:>12} {:>8} {:>6}",
        "aggregate(median)",
        series.len(),
        median,
        "-",
        "-",
        "-",
        "-",
        all_pass,
    );

    let mut out = std::io::BufWriter::new(
        fs::File::create(out_csv)
            .with_context(|| format!("cannot write report file {}", out_csv.display()))?,
    );
    writeln!(out, "t,series,value")?;
    for s in &series {
        for ((t, err), ins) in s.t.iter().zip(&s.err_m).zip(&s.ins_err_m) {
            writeln!(out, "{},{}/proposed,{}", format_sig9(*t), s.name, format_sig9(*err))?;
            writeln!(out, "{},{}/ins,{}", format_sig9(*t), s.name, format_sig9(*ins))?;
        }
    }
    Ok(0)
}

fn collect_runs(dir: &Path, series: &mut Vec<RunSeries>) -> Result<()> {
    let direct = dir.join("trajectory.csv");
    if direct.is_file() {
        series.push(parse_trajectory(&direct, run_name(dir))?);
        return Ok(());
    }
    let mut found = false;
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    for sub in entries {
        let candidate = sub.join("trajectory.csv");
        if candidate.is_file() {
            series.push(parse_trajectory(&candidate, run_name(&sub))?);
            found = true;
        }
    }
    if !found {
        bail!("no trajectory.csv in {} or its subdirectories", dir.display());
    }
    Ok(())
}

fn run_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn parse_trajectory(path: &Path, name: String) -> Result<RunSeries> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().context("empty trajectory file")?;
    if header != vio_core::pipeline::TRAJECTORY_HEADER {
        bail!("unexpected trajectory header in {}", path.display());
    }
    let mut t = Vec::new();
    let mut err_m = Vec::new();
    let mut ins_err_m = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            bail!("malformed row {} in {}", i + 2, path.display());
        }
        t.push(fields[1].parse::<f64>().context("bad t field")?);
        err_m.push(fields[6].parse::<f64>().context("bad err_m field")?);
        ins_err_m.push(fields[7].parse::<f64>().context("bad ins_err_m field")?);
    }
    if t.is_empty() {
        bail!("trajectory {} has no rows", path.display());
    }
    Ok(RunSeries {
        name,
        t,
        err_m,
        ins_err_m,
    })
}
