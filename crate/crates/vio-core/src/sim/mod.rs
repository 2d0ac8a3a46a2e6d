//! Synthetic flights, landmark fields and noisy sensor streams, plus the
//! pure-INS dead-reckoning baseline.
//!
//! Everything here is deterministic given `(config, seed)`: the noise
//! channels draw from independent, seed-derived streams, so altering one
//! channel never shifts another. With every noise channel disabled the
//! streams reproduce the generative model exactly, which is what the
//! noiseless round-trip oracles rely on.

mod csv;
mod deadreckon;
mod flight;
mod landmarks;
mod sensors;

pub use csv::{read_sensor_frames, write_frames_csv, write_observations_csv};
pub use deadreckon::ins_dead_reckon;
pub use flight::{gen_trajectory, FlightPlan, GroundTruth, TruthFrame};
pub use landmarks::{gen_landmarks, Landmark, LandmarkField, SimConfig};
pub use sensors::{simulate_sensors, NoiseSpec, Observation, SensorFrame};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid flight plan: {reason}")]
    InvalidPlan { reason: String },
    #[error(
        "landmark coverage too thin at frame {frame_id}: {found} co-visible landmarks, {required} required"
    )]
    InsufficientCoverage {
        frame_id: usize,
        found: usize,
        required: usize,
    },
    #[error("sensor csv parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
