use std::io::Write;

use super::run::RunReport;
use crate::format::format_sig9;

pub const TRAJECTORY_HEADER: &str =
    "frame_id,t,est_x,est_y,truth_x,truth_y,err_m,ins_err_m,singular_flag,solver_iters";

/// Writes the per-frame trajectory comparison. Frames 0 and 1 are the
/// initialization rows: estimate equals truth, zero iterations.
pub fn write_trajectory_csv<W: Write>(out: &mut W, report: &RunReport) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for frame_id in 0..report.estimated_track.len() {
        let t = frame_id as f64 * report.frame_interval_s;
        let est = report.estimated_track[frame_id];
        let truth = report.truth_track[frame_id];
        let err = report.proposed.per_frame_m[frame_id];
        let ins_err = report.ins_baseline.per_frame_m[frame_id];
        let (singular, iters) = if frame_id >= 2 {
            let estimate = &report.estimates[frame_id - 2];
            (estimate.rank_deficient as u8, estimate.solver_iterations)
        } else {
            (0, 0)
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            frame_id,
            format_sig9(t),
            format_sig9(est.0),
            format_sig9(est.1),
            format_sig9(truth.0),
            format_sig9(truth.1),
            format_sig9(err),
            format_sig9(ins_err),
            singular,
            iters,
        )?;
    }
    Ok(())
}
