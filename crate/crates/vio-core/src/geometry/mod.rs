//! Per-frame localization model.
//!
//! Each localization step estimates the next camera position from pinhole
//! observations of ground landmarks shared with the two previous frames,
//! altimeter height differences and inertial frame-to-frame distances. The
//! landmark rays yield a linear system in the unknown position, landmark
//! coordinates and landmark heights; in level flight that system loses rank
//! (monocular scale), and the inertial-distance objective resolves the
//! remaining null direction.

mod assemble;
mod camera;
mod layout;
mod objective;
mod reduce;

pub use assemble::{assemble_rows, singularity_indicator, AssembledConstraint, LocalizationProblem};
pub use camera::{project_landmark, CameraIntrinsics, FrameRole, PixelObservation};
pub use layout::StateLayout;
pub use objective::{build_objective, InsRangeObjective};
pub use reduce::{initial_guess, reduce_constraint, ReducedConstraint};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    /// The pinhole model requires the camera strictly above the landmark.
    #[error("landmark is not below the camera (vertical distance {height})")]
    LandmarkAboveCamera { height: f64 },
    #[error("observation references landmark {id} absent from the state layout")]
    UnknownLandmarkId { id: u64 },
    #[error("landmark {id} is not observed in the frame being localized")]
    MissingFramePlusOneObservation { id: u64 },
    #[error("landmark {id} is not observed in either previous frame")]
    MissingPriorObservation { id: u64 },
    /// Every direction of the assembled system fell below the rank tolerance.
    #[error("assembled constraint system is numerically degenerate")]
    DegenerateSystem,
}
