use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::flight::{GroundTruth, TruthFrame};
use super::landmarks::{visible_window, LandmarkField, SimConfig};
use crate::geometry::{project_landmark, CameraIntrinsics};

/// Sensor error budget. Magnitude fields are hard caps; sigma fields are
/// standard deviations. The reference preset pins each to the published
/// performance figures.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    /// Standard deviation of the per-observation line-of-sight angular
    /// error (feature localization and matching).
    pub los_angle_sigma_rad: f64,
    /// Standard deviation of the per-frame common-mode line-of-sight error.
    /// Motion blur smears every landmark of a frame the same way, so this
    /// component does not average out across landmarks; it dominates the
    /// end-to-end drift and is the calibrated channel.
    pub los_frame_sigma_rad: f64,
    /// Hard cap on the total line-of-sight angular error of any observation.
    pub los_angle_max_rad: f64,
    /// Bound on the per-run camera yaw alignment error. The image frames
    /// are aligned by the IMU heading; the slowly-varying residual of that
    /// alignment rotates every observed displacement, so it accumulates as
    /// cross-track drift over the flight. Calibrated well inside the
    /// heading error budget.
    pub camera_yaw_error_rad: f64,
    /// Altimeter random error, one sigma.
    pub altimeter_sigma_m: f64,
    /// Altimeter error proportional to flown distance (cap on |coefficient|;
    /// the per-run coefficient is drawn uniformly inside the cap).
    pub altimeter_distance_coeff: f64,
    /// INS heading error magnitude (constant bias, random sign per run).
    pub ins_heading_error_rad: f64,
    /// INS horizontal attitude error magnitude (random sign per run).
    pub ins_attitude_error_rad: f64,
    /// Fraction of the worst-case gravity coupling of the attitude error
    /// that materializes as along-track acceleration error. Calibration
    /// constant for the dead-reckoning baseline.
    pub attitude_coupling: f64,
    /// Cap on the per-run INS distance scale bias (drawn uniformly inside).
    pub ins_distance_scale_bound: f64,
    /// INS distance random-walk intensity, m/√s.
    pub ins_walk_intensity: f64,
}

impl NoiseSpec {
    /// The published error budget: ≤0.2° line of sight, 1 m altimeter sigma,
    /// 1e-4 distance-coupled altimeter error, <0.4° heading, <0.06° attitude.
    pub fn reference() -> Self {
        Self {
            los_angle_sigma_rad: 0.1f64.to_radians(),
            los_frame_sigma_rad: 0.1f64.to_radians(),
            los_angle_max_rad: 0.2f64.to_radians(),
            camera_yaw_error_rad: 0.03f64.to_radians(),
            altimeter_sigma_m: 1.0,
            altimeter_distance_coeff: 1e-4,
            ins_heading_error_rad: 0.4f64.to_radians(),
            ins_attitude_error_rad: 0.06f64.to_radians(),
            attitude_coupling: 0.115,
            ins_distance_scale_bound: 1e-4,
            ins_walk_intensity: 0.02,
        }
    }

    /// All channels off: sensors reproduce the generative model exactly.
    pub fn disabled() -> Self {
        Self {
            los_angle_sigma_rad: 0.0,
            los_frame_sigma_rad: 0.0,
            los_angle_max_rad: 0.0,
            camera_yaw_error_rad: 0.0,
            altimeter_sigma_m: 0.0,
            altimeter_distance_coeff: 0.0,
            ins_heading_error_rad: 0.0,
            ins_attitude_error_rad: 0.0,
            attitude_coupling: 0.0,
            ins_distance_scale_bound: 0.0,
            ins_walk_intensity: 0.0,
        }
    }
}

/// One noisy landmark pixel, tagged with the landmark identity the matcher
/// would have recovered.
#[derive(Debug, Clone, Copy)]
pub struct Observation {
    pub landmark_id: u64,
    pub x_px: f64,
    pub y_px: f64,
}

/// One synthetic observation bundle; the truth frame is retained for
/// scoring only and must never feed the estimator.
#[derive(Debug, Clone)]
pub struct SensorFrame {
    pub frame_id: usize,
    pub altimeter_m: f64,
    /// Measured distance to the previous frame; zero for frame 0.
    pub dist_to_prev_m: f64,
    /// Measured distance to the frame before that; zero for frames 0 and 1.
    pub dist_to_prev_prev_m: f64,
    pub observations: Vec<Observation>,
    pub truth: TruthFrame,
}

/// Bias-like quantities drawn once per run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RunDraws {
    /// Sign/magnitude of the distance-coupled altimeter term, in [−1, 1].
    pub alt_distance_factor: f64,
    /// Multiplicative INS distance scale, 1 + U(−bound, bound).
    pub ins_scale: f64,
    pub heading_sign: f64,
    pub attitude_sign: f64,
    /// Camera yaw alignment error for the run, in radians.
    pub camera_yaw: f64,
}

const STREAM_RUN_DRAWS: u64 = 1;
const STREAM_LOS: u64 = 2;
const STREAM_ALTIMETER: u64 = 3;
const STREAM_WALK: u64 = 4;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl RunDraws {
    pub(crate) fn from_seed(noise: &NoiseSpec, seed: u64) -> Self {
        let mut rng = stream_rng(seed, STREAM_RUN_DRAWS);
        // Fixed draw order keeps channels stable across noise settings.
        let alt_distance_factor: f64 = rng.random_range(-1.0..1.0);
        let scale_offset: f64 = rng.random_range(-1.0..1.0);
        let heading_sign = if rng.random_range(0..2) == 0 { -1.0 } else { 1.0 };
        let attitude_sign = if rng.random_range(0..2) == 0 { -1.0 } else { 1.0 };
        let yaw_factor: f64 = rng.random_range(-1.0..1.0);
        Self {
            alt_distance_factor,
            ins_scale: 1.0 + scale_offset * noise.ins_distance_scale_bound,
            heading_sign,
            attitude_sign,
            camera_yaw: yaw_factor * noise.camera_yaw_error_rad,
        }
    }
}

/// Per-step random-walk increments of the INS distance channel, shared by
/// the sensor stream and the dead-reckoning baseline.
pub(crate) fn walk_increments(noise: &NoiseSpec, steps: usize, dt: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, STREAM_WALK);
    let sigma = noise.ins_walk_intensity * dt.sqrt();
    let dist = Normal::new(0.0, sigma).expect("walk sigma is finite and nonnegative");
    (0..steps).map(|_| dist.sample(&mut rng)).collect()
}

/// Generates the full sensor stream for a flight.
///
/// Line-of-sight noise displaces each true pixel by `f·tan(θ)` in a uniform
/// random image direction, with `θ = |N(0, σ)|` capped at the budgeted
/// maximum. The altimeter adds Gaussian noise plus a per-run
/// distance-proportional term; inertial distances carry a per-run scale
/// bias plus an accumulated random walk.
pub fn simulate_sensors(
    truth: &GroundTruth,
    field: &LandmarkField,
    intrinsics: &CameraIntrinsics,
    config: &SimConfig,
    noise: &NoiseSpec,
    seed: u64,
) -> Vec<SensorFrame> {
    let draws = RunDraws::from_seed(noise, seed);
    let (yaw_sin, yaw_cos) = draws.camera_yaw.sin_cos();
    let mut rng_los = stream_rng(seed, STREAM_LOS);
    let mut rng_alt = stream_rng(seed, STREAM_ALTIMETER);

    let frames = &truth.frames;
    let dt = if frames.len() > 1 { frames[1].t - frames[0].t } else { 1.0 };
    let increments = walk_increments(noise, frames.len().saturating_sub(1), dt, seed);
    // walk_to[k]: accumulated walk from frame 0 to frame k.
    let mut walk_to = Vec::with_capacity(frames.len());
    walk_to.push(0.0);
    for w in &increments {
        walk_to.push(walk_to.last().unwrap() + w);
    }

    let los_normal = Normal::new(0.0, noise.los_angle_sigma_rad.max(0.0))
        .expect("LOS sigma is finite and nonnegative");
    let frame_normal = Normal::new(0.0, noise.los_frame_sigma_rad.max(0.0))
        .expect("frame LOS sigma is finite and nonnegative");
    let alt_normal = Normal::new(0.0, noise.altimeter_sigma_m.max(0.0))
        .expect("altimeter sigma is finite and nonnegative");

    let direction = {
        let first = frames.first().unwrap().position;
        let last = frames.last().unwrap().position;
        let dx = last.x - first.x;
        let dy = last.y - first.y;
        let norm = (dx * dx + dy * dy).sqrt();
        if norm == 0.0 { (1.0, 0.0) } else { (dx / norm, dy / norm) }
    };
    let max_alt = frames.iter().map(|f| f.position.z).fold(0.0f64, f64::max);
    let reach = max_alt * config.sensor_half_extent_px / intrinsics.focal_px() * 1.5 + 1.0;

    frames
        .iter()
        .enumerate()
        .map(|(k, frame)| {
            let frame_shift = if noise.los_frame_sigma_rad > 0.0 {
                let theta = frame_normal
                    .sample(&mut rng_los)
                    .abs()
                    .min(noise.los_angle_max_rad);
                let phi = rng_los.random_range(0.0..std::f64::consts::TAU);
                let magnitude = intrinsics.focal_px() * theta.tan();
                (magnitude * phi.cos(), magnitude * phi.sin())
            } else {
                (0.0, 0.0)
            };
            let mut observations = Vec::new();
            for lm in visible_window(
                &frame.position,
                &field.landmarks,
                intrinsics,
                config.sensor_half_extent_px,
                direction,
                reach,
            ) {
                let (x_px, y_px) =
                    project_landmark(&frame.position, &lm.position, intrinsics).unwrap();
                // Misaligned image frame: rotate the true pixel by the
                // per-run yaw alignment error.
                let (x_px, y_px) = (
                    x_px * yaw_cos - y_px * yaw_sin,
                    x_px * yaw_sin + y_px * yaw_cos,
                );
                let own_shift = if noise.los_angle_sigma_rad > 0.0 {
                    let theta = los_normal
                        .sample(&mut rng_los)
                        .abs()
                        .min(noise.los_angle_max_rad);
                    let phi = rng_los.random_range(0.0..std::f64::consts::TAU);
                    let magnitude = intrinsics.focal_px() * theta.tan();
                    (magnitude * phi.cos(), magnitude * phi.sin())
                } else {
                    (0.0, 0.0)
                };
                // Total perturbation clipped to the budget cap.
                let mut shift = (frame_shift.0 + own_shift.0, frame_shift.1 + own_shift.1);
                let magnitude = (shift.0 * shift.0 + shift.1 * shift.1).sqrt();
                let cap = intrinsics.focal_px() * noise.los_angle_max_rad.tan();
                if magnitude > cap {
                    shift.0 *= cap / magnitude;
                    shift.1 *= cap / magnitude;
                }
                observations.push(Observation {
                    landmark_id: lm.id,
                    x_px: x_px + shift.0,
                    y_px: y_px + shift.1,
                });
            }

            let altimeter_m = frame.position.z
                + if noise.altimeter_sigma_m > 0.0 {
                    alt_normal.sample(&mut rng_alt)
                } else {
                    0.0
                }
                + draws.alt_distance_factor
                    * noise.altimeter_distance_coeff
                    * frame.cumulative_distance;

            let measured = |from: usize, to: usize| {
                truth.distance(from, to) * draws.ins_scale + (walk_to[to] - walk_to[from])
            };
            SensorFrame {
                frame_id: frame.frame_id,
                altimeter_m,
                dist_to_prev_m: if k >= 1 { measured(k - 1, k) } else { 0.0 },
                dist_to_prev_prev_m: if k >= 2 { measured(k - 2, k) } else { 0.0 },
                observations,
                truth: frame.clone(),
            }
        })
        .collect()
}
