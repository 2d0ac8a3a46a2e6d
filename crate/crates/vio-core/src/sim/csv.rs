//! CSV export/import of sensor streams, for replay and debugging.
//!
//! Columns are fixed; reals carry 9 significant digits, which is enough for
//! replay-grade reproduction but not bit-identity with the in-process
//! stream.

use std::io::{BufRead, Write};

use nalgebra::Vector3;

use super::flight::TruthFrame;
use super::sensors::{Observation, SensorFrame};
use super::SimError;
use crate::format::format_sig9;

pub const FRAMES_HEADER: &str = "frame_id,alt_reading,d_prev,d_prevprev,truth_x,truth_y,truth_alt";
pub const OBSERVATIONS_HEADER: &str = "frame_id,landmark_id,x_p,y_p";

pub fn write_frames_csv<W: Write>(out: &mut W, frames: &[SensorFrame]) -> std::io::Result<()> {
    writeln!(out, "{FRAMES_HEADER}")?;
    for f in frames {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.frame_id,
            format_sig9(f.altimeter_m),
            format_sig9(f.dist_to_prev_m),
            format_sig9(f.dist_to_prev_prev_m),
            format_sig9(f.truth.position.x),
            format_sig9(f.truth.position.y),
            format_sig9(f.truth.position.z),
        )?;
    }
    Ok(())
}

pub fn write_observations_csv<W: Write>(out: &mut W, frames: &[SensorFrame]) -> std::io::Result<()> {
    writeln!(out, "{OBSERVATIONS_HEADER}")?;
    for f in frames {
        for obs in &f.observations {
            writeln!(
                out,
                "{},{},{},{}",
                f.frame_id,
                obs.landmark_id,
                format_sig9(obs.x_px),
                format_sig9(obs.y_px),
            )?;
        }
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    name: &str,
) -> Result<T, SimError> {
    let token = token.ok_or_else(|| SimError::CsvParse {
        line,
        reason: format!("missing field {name}"),
    })?;
    token.trim().parse().map_err(|_| SimError::CsvParse {
        line,
        reason: format!("invalid {name}: {token:?}"),
    })
}

/// Reads a sensor stream back from its two CSV files. Frame times are
/// reconstructed from the given interval; cumulative distance is not stored
/// and reads back as zero (the estimator does not consume it).
pub fn read_sensor_frames<R1: BufRead, R2: BufRead>(
    frames_csv: R1,
    observations_csv: R2,
    frame_interval_s: f64,
) -> Result<Vec<SensorFrame>, SimError> {
    let mut frames = Vec::new();
    for (idx, line) in frames_csv.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            continue; // header
        }
        let mut fields = line.split(',');
        let frame_id: usize = parse_field(fields.next(), idx + 1, "frame_id")?;
        let altimeter_m = parse_field(fields.next(), idx + 1, "alt_reading")?;
        let dist_to_prev_m = parse_field(fields.next(), idx + 1, "d_prev")?;
        let dist_to_prev_prev_m = parse_field(fields.next(), idx + 1, "d_prevprev")?;
        let truth_x: f64 = parse_field(fields.next(), idx + 1, "truth_x")?;
        let truth_y: f64 = parse_field(fields.next(), idx + 1, "truth_y")?;
        let truth_alt: f64 = parse_field(fields.next(), idx + 1, "truth_alt")?;
        frames.push(SensorFrame {
            frame_id,
            altimeter_m,
            dist_to_prev_m,
            dist_to_prev_prev_m,
            observations: Vec::new(),
            truth: TruthFrame {
                frame_id,
                t: frame_id as f64 * frame_interval_s,
                position: Vector3::new(truth_x, truth_y, truth_alt),
                cumulative_distance: 0.0,
            },
        });
    }

    for (idx, line) in observations_csv.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            continue;
        }
        let mut fields = line.split(',');
        let frame_id: usize = parse_field(fields.next(), idx + 1, "frame_id")?;
        let landmark_id = parse_field(fields.next(), idx + 1, "landmark_id")?;
        let x_px = parse_field(fields.next(), idx + 1, "x_p")?;
        let y_px = parse_field(fields.next(), idx + 1, "y_p")?;
        let frame = frames
            .iter_mut()
            .find(|f| f.frame_id == frame_id)
            .ok_or_else(|| SimError::CsvParse {
                line: idx + 1,
                reason: format!("observation references unknown frame {frame_id}"),
            })?;
        frame.observations.push(Observation {
            landmark_id,
            x_px,
            y_px,
        });
    }
    Ok(frames)
}
