use super::flight::{FlightPlan, GroundTruth};
use super::sensors::{walk_increments, NoiseSpec, RunDraws};

const GRAVITY: f64 = 9.80665;

/// Pure-INS dead-reckoning baseline: integrates the measured speed along the
/// measured heading.
///
/// Error model, calibrated against the published long-flight drift figure:
/// a constant heading bias at the error-budget cap (random sign) bends the
/// track, and the horizontal attitude error couples a fraction
/// (`attitude_coupling`) of its worst-case gravity projection into an
/// along-track acceleration error, so the along-track error grows
/// quadratically. The INS distance scale bias and random walk shared with
/// the distance channel are included for consistency.
pub fn ins_dead_reckon(
    truth: &GroundTruth,
    plan: &FlightPlan,
    noise: &NoiseSpec,
    seed: u64,
) -> Vec<(f64, f64)> {
    let draws = RunDraws::from_seed(noise, seed);
    let frames = &truth.frames;
    if frames.is_empty() {
        return Vec::new();
    }
    let dt = plan.frame_interval_s;
    let walk = walk_increments(noise, frames.len() - 1, dt, seed);

    let heading = plan.heading_rad + draws.heading_sign * noise.ins_heading_error_rad;
    let accel_err = draws.attitude_sign
        * GRAVITY
        * noise.ins_attitude_error_rad.sin()
        * noise.attitude_coupling;

    let mut positions = Vec::with_capacity(frames.len());
    let mut x = frames[0].position.x;
    let mut y = frames[0].position.y;
    positions.push((x, y));
    for k in 1..frames.len() {
        let true_step = frames[k].cumulative_distance - frames[k - 1].cumulative_distance;
        // Velocity error from the attitude coupling grows linearly in time;
        // midpoint integration over the step.
        let t_mid = frames[k - 1].t + 0.5 * dt;
        let step = true_step * draws.ins_scale + walk[k - 1] + accel_err * t_mid * dt;
        x += step * heading.cos();
        y += step * heading.sin();
        positions.push((x, y));
    }
    positions
}
