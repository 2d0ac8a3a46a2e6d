use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::flight::GroundTruth;
use super::SimError;
use crate::geometry::{project_landmark, CameraIntrinsics};

/// One ground landmark. Terrain is not assumed flat: heights are drawn from
/// a relief distribution.
#[derive(Debug, Clone, Copy)]
pub struct Landmark {
    pub id: u64,
    pub position: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct LandmarkField {
    pub landmarks: Vec<Landmark>,
}

/// Scene-generation parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Landmark field density.
    pub landmark_density_per_km2: f64,
    /// Standard deviation of terrain heights around zero.
    pub terrain_relief_sigma_m: f64,
    /// Half extent of the square sensor in pixels; together with the focal
    /// length this fixes the field of view.
    pub sensor_half_extent_px: f64,
    /// Landmarks are kept at least this far below the lowest flight
    /// altitude.
    pub min_clearance_m: f64,
    /// Coverage audited at generation: every localization step needs at
    /// least this many landmarks visible in its frame and in one of the two
    /// previous frames.
    pub required_covisible: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            // ~37 expected co-visible landmarks per frame triple at the
            // reference scenario; keeps the Poisson tail harmless over an
            // hour of frames.
            landmark_density_per_km2: 8.0,
            terrain_relief_sigma_m: 30.0,
            sensor_half_extent_px: 1000.0,
            min_clearance_m: 100.0,
            required_covisible: 5,
        }
    }
}

/// Whether a landmark projects inside the sensor bounds of a camera at
/// `camera` (nadir view).
pub(crate) fn in_view(
    camera: &Vector3<f64>,
    landmark: &Landmark,
    intrinsics: &CameraIntrinsics,
    half_extent_px: f64,
) -> bool {
    match project_landmark(camera, &landmark.position, intrinsics) {
        Ok((x_px, y_px)) => x_px.abs() <= half_extent_px && y_px.abs() <= half_extent_px,
        Err(_) => false,
    }
}

/// Scatters a landmark field over the flight corridor and audits that every
/// frame triple shares enough co-visible landmarks.
pub fn gen_landmarks(
    truth: &GroundTruth,
    intrinsics: &CameraIntrinsics,
    config: &SimConfig,
    seed: u64,
) -> Result<LandmarkField, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xfeed);

    let min_alt = truth
        .frames
        .iter()
        .map(|f| f.position.z)
        .fold(f64::INFINITY, f64::min);
    let max_alt = truth
        .frames
        .iter()
        .map(|f| f.position.z)
        .fold(0.0f64, f64::max);
    // Ground footprint half width at the lowest altitude, conservative.
    let footprint = min_alt * config.sensor_half_extent_px / intrinsics.focal_px();

    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for f in &truth.frames {
        min_x = min_x.min(f.position.x);
        max_x = max_x.max(f.position.x);
        min_y = min_y.min(f.position.y);
        max_y = max_y.max(f.position.y);
    }
    let lo_x = min_x - footprint;
    let hi_x = max_x + footprint;
    let lo_y = min_y - footprint;
    let hi_y = max_y + footprint;

    let area_km2 = (hi_x - lo_x) * (hi_y - lo_y) / 1e6;
    let count = (area_km2 * config.landmark_density_per_km2).ceil() as usize;

    let relief = Normal::new(0.0, config.terrain_relief_sigma_m.max(f64::MIN_POSITIVE)).unwrap();
    let z_cap = min_alt - config.min_clearance_m;
    let mut landmarks: Vec<Landmark> = (0..count)
        .map(|id| {
            let z = if config.terrain_relief_sigma_m > 0.0 {
                relief.sample(&mut rng).min(z_cap)
            } else {
                0.0
            };
            Landmark {
                id: id as u64,
                position: Vector3::new(
                    rng.random_range(lo_x..hi_x),
                    rng.random_range(lo_y..hi_y),
                    z,
                ),
            }
        })
        .collect();
    // Along-track order gives the visibility scan a small window per frame.
    let (dir_x, dir_y) = along_track_direction(truth);
    landmarks.sort_by(|a, b| {
        let sa = a.position.x * dir_x + a.position.y * dir_y;
        let sb = b.position.x * dir_x + b.position.y * dir_y;
        sa.partial_cmp(&sb).unwrap()
    });

    audit_coverage(truth, &landmarks, intrinsics, config, max_alt)?;
    Ok(LandmarkField { landmarks })
}

fn along_track_direction(truth: &GroundTruth) -> (f64, f64) {
    if truth.frames.len() < 2 {
        return (1.0, 0.0);
    }
    let first = truth.frames.first().unwrap().position;
    let last = truth.frames.last().unwrap().position;
    let dx = last.x - first.x;
    let dy = last.y - first.y;
    let norm = (dx * dx + dy * dy).sqrt();
    if norm == 0.0 {
        (1.0, 0.0)
    } else {
        (dx / norm, dy / norm)
    }
}

/// Landmarks plausibly visible from a camera position, by along-track
/// window followed by an exact projection check.
pub(crate) fn visible_window<'a>(
    camera: &Vector3<f64>,
    landmarks: &'a [Landmark],
    intrinsics: &CameraIntrinsics,
    half_extent_px: f64,
    direction: (f64, f64),
    reach: f64,
) -> impl Iterator<Item = &'a Landmark> {
    let s_cam = camera.x * direction.0 + camera.y * direction.1;
    let lo = landmarks.partition_point(|lm| {
        lm.position.x * direction.0 + lm.position.y * direction.1 < s_cam - reach
    });
    let camera = *camera;
    let intrinsics = *intrinsics;
    landmarks[lo..]
        .iter()
        .take_while(move |lm| {
            lm.position.x * direction.0 + lm.position.y * direction.1 <= s_cam + reach
        })
        .filter(move |lm| in_view(&camera, lm, &intrinsics, half_extent_px))
}

fn audit_coverage(
    truth: &GroundTruth,
    landmarks: &[Landmark],
    intrinsics: &CameraIntrinsics,
    config: &SimConfig,
    max_alt: f64,
) -> Result<(), SimError> {
    let direction = along_track_direction(truth);
    let reach = max_alt * config.sensor_half_extent_px / intrinsics.focal_px() * 1.5 + 1.0;
    let frames = &truth.frames;
    for k in 2..frames.len() {
        let found = visible_window(
            &frames[k].position,
            landmarks,
            intrinsics,
            config.sensor_half_extent_px,
            direction,
            reach,
        )
        .filter(|lm| {
            in_view(&frames[k - 1].position, lm, intrinsics, config.sensor_half_extent_px)
                || in_view(&frames[k - 2].position, lm, intrinsics, config.sensor_half_extent_px)
        })
        .count();
        if found < config.required_covisible {
            return Err(SimError::InsufficientCoverage {
                frame_id: frames[k].frame_id,
                found,
                required: config.required_covisible,
            });
        }
    }
    Ok(())
}
