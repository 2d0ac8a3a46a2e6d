use nalgebra::Vector3;

use super::SimError;

/// Flight scenario parameters.
#[derive(Debug, Clone)]
pub struct FlightPlan {
    pub duration_s: f64,
    /// Horizontal speed over ground.
    pub speed_mps: f64,
    /// Initial altitude.
    pub altitude_m: f64,
    /// Heading in the local level frame, radians from the x axis.
    pub heading_rad: f64,
    pub frame_interval_s: f64,
    /// Vertical speed; zero for level flight.
    pub climb_rate_mps: f64,
}

impl FlightPlan {
    /// The industry reference scenario: one hour of level flight at 1200 m
    /// and 235 m/s, one camera frame per second.
    pub fn reference() -> Self {
        Self {
            duration_s: 3600.0,
            speed_mps: 235.0,
            altitude_m: 1200.0,
            heading_rad: 0.0,
            frame_interval_s: 1.0,
            climb_rate_mps: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration_s >= 0.0
            && self.speed_mps > 0.0
            && self.altitude_m > 0.0
            && self.frame_interval_s > 0.0)
        {
            return Err(SimError::InvalidPlan {
                reason: "duration, speed, altitude and frame interval must be positive".into(),
            });
        }
        Ok(())
    }

    /// Whether speed and altitude sit inside the reference performance
    /// envelope (speed 210–260 m/s, altitude 1000–1500 m).
    pub fn within_reference_envelope(&self) -> bool {
        (210.0..=260.0).contains(&self.speed_mps) && (1000.0..=1500.0).contains(&self.altitude_m)
    }

    pub fn frame_count(&self) -> usize {
        (self.duration_s / self.frame_interval_s).floor() as usize + 1
    }
}

/// True vehicle state at one camera frame.
#[derive(Debug, Clone)]
pub struct TruthFrame {
    pub frame_id: usize,
    pub t: f64,
    pub position: Vector3<f64>,
    /// Path length flown so far.
    pub cumulative_distance: f64,
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub frames: Vec<TruthFrame>,
}

impl GroundTruth {
    /// Straight-line 3D distance between two frames.
    pub fn distance(&self, from: usize, to: usize) -> f64 {
        (self.frames[to].position - self.frames[from].position).norm()
    }
}

/// Samples the deterministic straight-line trajectory at the frame interval.
pub fn gen_trajectory(plan: &FlightPlan) -> GroundTruth {
    let (dir_x, dir_y) = (plan.heading_rad.cos(), plan.heading_rad.sin());
    let path_speed = (plan.speed_mps.powi(2) + plan.climb_rate_mps.powi(2)).sqrt();
    let frames = (0..plan.frame_count())
        .map(|frame_id| {
            let t = frame_id as f64 * plan.frame_interval_s;
            TruthFrame {
                frame_id,
                t,
                position: Vector3::new(
                    plan.speed_mps * t * dir_x,
                    plan.speed_mps * t * dir_y,
                    plan.altitude_m + plan.climb_rate_mps * t,
                ),
                cumulative_distance: path_speed * t,
            }
        })
        .collect();
    GroundTruth { frames }
}
