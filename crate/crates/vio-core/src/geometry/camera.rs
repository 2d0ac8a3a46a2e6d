use nalgebra::Vector3;

use super::GeometryError;

/// Pinhole camera intrinsics; distortion is out of scope.
#[derive(Debug, Clone, Copy)]
pub struct CameraIntrinsics {
    focal_px: f64,
}

impl CameraIntrinsics {
    pub fn new(focal_px: f64) -> Self {
        assert!(focal_px > 0.0, "focal length must be positive");
        Self { focal_px }
    }

    pub fn focal_px(&self) -> f64 {
        self.focal_px
    }
}

/// Which of the three frames of a localization step an observation belongs
/// to: the two already-localized frames or the frame being solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameRole {
    PrevPrev,
    Prev,
    Next,
}

/// One matched landmark pixel.
#[derive(Debug, Clone, Copy)]
pub struct PixelObservation {
    pub landmark_id: u64,
    pub frame: FrameRole,
    pub x_px: f64,
    pub y_px: f64,
}

/// Projects a landmark into the image of a nadir-looking camera.
///
/// The sign convention follows the odometer model: the pixel coordinate is
/// proportional to camera-minus-landmark over the vertical distance,
/// `x_p = f·(x_cam − x_l)/h` with `h = alt − z_l`.
pub fn project_landmark(
    camera: &Vector3<f64>,
    landmark: &Vector3<f64>,
    intrinsics: &CameraIntrinsics,
) -> Result<(f64, f64), GeometryError> {
    let height = camera.z - landmark.z;
    if height <= 0.0 {
        return Err(GeometryError::LandmarkAboveCamera { height });
    }
    let f = intrinsics.focal_px();
    Ok((
        f * (camera.x - landmark.x) / height,
        f * (camera.y - landmark.y) / height,
    ))
}
