//! Per-frame visual-inertial odometry loop.
//!
//! Each step builds the localization problem from the *estimated* positions
//! of the two previous frames and the current sensor channels, reduces the
//! assembled vision constraint to a consistent full-row-rank system, and
//! minimizes the inertial-distance objective over its feasible set. Errors
//! compound exactly as they would in flight: ground truth is consulted only
//! to initialize the first two frames and to score the result.

mod csv;
mod metrics;
mod run;

pub use csv::{write_trajectory_csv, TRAJECTORY_HEADER};
pub use metrics::{error_metrics, ErrorSummary};
pub use run::{run, run_over_frames, RunReport};

use nalgebra::Vector3;
use thiserror::Error;

use crate::geometry::{
    assemble_rows, build_objective, reduce_constraint, singularity_indicator,
    CameraIntrinsics, FrameRole, GeometryError, LocalizationProblem, PixelObservation,
};
use crate::sim::{Observation, SensorFrame};
use crate::solver::{minimizer_by_name, ConstrainedMinimizer, SolverOptions, SolverStatus};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("frame {frame_id}: only {found} landmarks co-visible with the previous frames")]
    InsufficientLandmarks { frame_id: usize, found: usize },
    #[error("unknown solver method {name:?}")]
    UnknownMethod { name: String },
    #[error("estimate/truth length mismatch ({estimates} vs {truth})")]
    LengthMismatch { estimates: usize, truth: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

/// Odometer configuration.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Landmarks used per step when more are co-visible.
    pub landmarks_per_step: usize,
    /// Relative rank tolerance of the constraint reduction.
    pub rank_tol: f64,
    pub solver: SolverOptions,
    /// Strategy name resolved through the solver registry.
    pub method: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        // The projected gradient of the range objective moves by roughly
        // 1e5..1e6 per meter of position at the reference geometry, so an
        // absolute tolerance of 1e-3 pins each step to well below 1e-8 m.
        // The adaptive default would loosen with the warm-start quality and
        // let noiseless drift creep over thousands of frames.
        let solver = SolverOptions {
            pg_tol: Some(1e-3),
            ..SolverOptions::default()
        };
        Self {
            landmarks_per_step: 5,
            rank_tol: 1e-3,
            solver,
            method: "semi-implicit".into(),
        }
    }
}

/// Estimate for one localized frame.
#[derive(Debug, Clone)]
pub struct FrameEstimate {
    pub frame_id: usize,
    pub position: (f64, f64),
    pub solver_status: SolverStatus,
    pub solver_iterations: usize,
    /// Smallest singular value of the equilibrated raw system.
    pub singularity: f64,
    /// Directions were dropped by the rank reduction.
    pub rank_deficient: bool,
    pub landmark_count: usize,
    /// A `d² − δh²` range target was negative and clamped.
    pub clamped_range: bool,
    /// Estimate fell back to the inertial prediction.
    pub fallback: bool,
    /// Horizontal error against truth; simulation mode only.
    pub error_m: Option<f64>,
}

#[derive(Debug, Clone)]
struct FrameMemory {
    position: (f64, f64),
    altimeter_m: f64,
    observations: Vec<Observation>,
}

impl FrameMemory {
    fn remember(frame: &SensorFrame, position: (f64, f64)) -> Self {
        Self {
            position,
            altimeter_m: frame.altimeter_m,
            observations: frame.observations.clone(),
        }
    }

    fn pixel_of(&self, landmark_id: u64) -> Option<&Observation> {
        self.observations.iter().find(|o| o.landmark_id == landmark_id)
    }
}

/// Rolling state of the odometer: the two most recent frame estimates and
/// their sensor data.
pub struct OdometerState {
    prev_prev: FrameMemory,
    prev: FrameMemory,
    intrinsics: CameraIntrinsics,
    config: PipelineConfig,
    minimizer: Box<dyn ConstrainedMinimizer>,
}

impl OdometerState {
    /// Starts the odometer from two already-localized frames (ground truth
    /// in simulation; the loop presupposes known prior frames).
    pub fn new(
        config: PipelineConfig,
        intrinsics: CameraIntrinsics,
        frame0: &SensorFrame,
        position0: (f64, f64),
        frame1: &SensorFrame,
        position1: (f64, f64),
    ) -> Result<Self, PipelineError> {
        let minimizer = minimizer_by_name(&config.method, config.solver.clone()).ok_or_else(|| {
            PipelineError::UnknownMethod {
                name: config.method.clone(),
            }
        })?;
        Ok(Self {
            prev_prev: FrameMemory::remember(frame0, position0),
            prev: FrameMemory::remember(frame1, position1),
            intrinsics,
            config,
            minimizer,
        })
    }

    /// Inertial prediction for the next frame: continue the current track
    /// direction by the measured horizontal range.
    fn inertial_prediction(&self, frame: &SensorFrame) -> (f64, f64) {
        let dx = self.prev.position.0 - self.prev_prev.position.0;
        let dy = self.prev.position.1 - self.prev_prev.position.1;
        let len = (dx * dx + dy * dy).sqrt();
        let dir = if len > 1e-9 { (dx / len, dy / len) } else { (1.0, 0.0) };
        let delta_h = frame.altimeter_m - self.prev.altimeter_m;
        let range = (frame.dist_to_prev_m.powi(2) - delta_h.powi(2)).max(0.0).sqrt();
        (
            self.prev.position.0 + dir.0 * range,
            self.prev.position.1 + dir.1 * range,
        )
    }

    /// A-priori state for the solver: position at the inertial prediction,
    /// landmark heights at the altimeter reading of their base frame (zero
    /// terrain prior) and landmark coordinates where the base-frame rays
    /// then put them. Projected onto the feasible set before use; starting
    /// near the physical configuration keeps the quartic objective in the
    /// positive-height basin.
    fn physical_hint(
        &self,
        layout: &crate::geometry::StateLayout,
        prediction: (f64, f64),
    ) -> nalgebra::DVector<f64> {
        let f = self.intrinsics.focal_px();
        let mut hint = nalgebra::DVector::zeros(layout.dim());
        hint[0] = prediction.0;
        hint[1] = prediction.1;
        for (slot, &id) in layout.landmark_ids().iter().enumerate() {
            // Same base-frame precedence as the assembled rows.
            let (memory, obs) = if let Some(obs) = self.prev_prev.pixel_of(id) {
                (&self.prev_prev, obs)
            } else if let Some(obs) = self.prev.pixel_of(id) {
                (&self.prev, obs)
            } else {
                continue;
            };
            let height = memory.altimeter_m.max(1.0);
            hint[layout.landmark_x(slot)] = memory.position.0 - obs.x_px / f * height;
            hint[layout.landmark_y(slot)] = memory.position.1 - obs.y_px / f * height;
            hint[layout.landmark_height(slot)] = height;
        }
        hint
    }

    /// Localizes the next frame and advances the state. Never stalls: if the
    /// problem cannot be solved the estimate falls back to the inertial
    /// prediction and the frame is flagged.
    pub fn step(&mut self, frame: &SensorFrame) -> FrameEstimate {
        let prediction = self.inertial_prediction(frame);
        let estimate = match self.localize(frame, prediction) {
            Ok(estimate) => estimate,
            Err(_) => FrameEstimate {
                frame_id: frame.frame_id,
                position: prediction,
                solver_status: SolverStatus::InfeasibleConstraint,
                solver_iterations: 0,
                singularity: 0.0,
                rank_deficient: false,
                landmark_count: 0,
                clamped_range: false,
                fallback: true,
                error_m: None,
            },
        };
        self.prev_prev = std::mem::replace(
            &mut self.prev,
            FrameMemory::remember(frame, estimate.position),
        );
        estimate
    }

    fn localize(
        &self,
        frame: &SensorFrame,
        prediction: (f64, f64),
    ) -> Result<FrameEstimate, PipelineError> {
        // Simulated matching: a landmark is usable when its id appears in
        // the new frame and in at least one of the two retained frames.
        let candidates: Vec<(u64, (f64, f64))> = frame
            .observations
            .iter()
            .filter(|o| {
                self.prev.pixel_of(o.landmark_id).is_some()
                    || self.prev_prev.pixel_of(o.landmark_id).is_some()
            })
            .map(|o| (o.landmark_id, (o.x_px, o.y_px)))
            .collect();
        if candidates.len() < 2 {
            return Err(PipelineError::InsufficientLandmarks {
                frame_id: frame.frame_id,
                found: candidates.len(),
            });
        }
        let selected = select_by_spread(&candidates, self.config.landmarks_per_step);

        // Each landmark is tied to the new frame and to a single earlier
        // frame (the earliest one observing it), the published two-frame row
        // pattern. Stacking both earlier frames would stereo-lock landmark
        // heights to two disagreeing position estimates and amplify their
        // differential error from step to step; with a single base frame the
        // scale direction stays in the null space, where the inertial
        // distances re-anchor it every frame.
        let mut observations = Vec::new();
        for &id in &selected {
            let next = frame.observations.iter().find(|o| o.landmark_id == id).unwrap();
            observations.push(PixelObservation {
                landmark_id: id,
                frame: FrameRole::Next,
                x_px: next.x_px,
                y_px: next.y_px,
            });
            let base = self
                .prev_prev
                .pixel_of(id)
                .map(|obs| (FrameRole::PrevPrev, obs))
                .or_else(|| self.prev.pixel_of(id).map(|obs| (FrameRole::Prev, obs)));
            let (role, obs) = base.expect("candidate landmarks are co-visible");
            observations.push(PixelObservation {
                landmark_id: id,
                frame: role,
                x_px: obs.x_px,
                y_px: obs.y_px,
            });
        }

        let problem = LocalizationProblem {
            prev_prev_pos: self.prev_prev.position,
            prev_pos: self.prev.position,
            delta_h_from_prev_prev: frame.altimeter_m - self.prev_prev.altimeter_m,
            delta_h_from_prev: frame.altimeter_m - self.prev.altimeter_m,
            dist_from_prev_prev: frame.dist_to_prev_prev_m,
            dist_from_prev: frame.dist_to_prev_m,
            intrinsics: self.intrinsics,
            observations,
        };

        let layout = problem.layout();
        let raw = assemble_rows(&problem, &layout)?;
        let singularity = singularity_indicator(&raw);
        let reduced = reduce_constraint(&raw, self.config.rank_tol)?;
        let objective = build_objective(&problem, &layout);
        let guess = reduced
            .constraint
            .project_feasible(&self.physical_hint(&layout, prediction));
        let result = self
            .minimizer
            .minimize(&objective, &reduced.constraint, &guess);

        // A best iterate is still a valid feasible estimate; only a solver
        // that could not produce one forfeits to the inertial prediction.
        let (position, fallback) = match result.status {
            SolverStatus::Converged | SolverStatus::MaxIterations => {
                ((result.solution[0], result.solution[1]), false)
            }
            SolverStatus::InfeasibleConstraint => (prediction, true),
        };

        Ok(FrameEstimate {
            frame_id: frame.frame_id,
            position,
            solver_status: result.status,
            solver_iterations: result.iterations,
            singularity,
            rank_deficient: reduced.is_rank_deficient(),
            landmark_count: selected.len(),
            clamped_range: objective.clamped_negative_range(),
            fallback,
            error_m: None,
        })
    }

    /// Scores an estimate against the retained truth of a sensor frame.
    pub(crate) fn horizontal_error(estimate: (f64, f64), truth: &Vector3<f64>) -> f64 {
        ((estimate.0 - truth.x).powi(2) + (estimate.1 - truth.y).powi(2)).sqrt()
    }
}

/// Picks `count` landmarks maximizing image-plane spread: start from the
/// farthest pair, then greedily add the candidate with the largest minimum
/// distance to the chosen set. Deterministic; ties resolve to the earliest
/// (lowest-id) candidate.
fn select_by_spread(candidates: &[(u64, (f64, f64))], count: usize) -> Vec<u64> {
    if candidates.len() <= count {
        return candidates.iter().map(|&(id, _)| id).collect();
    }
    let dist_sq = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);

    let mut best = (0, 1);
    let mut best_d = -1.0;
    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            let d = dist_sq(candidates[i].1, candidates[j].1);
            if d > best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    let mut chosen = vec![best.0, best.1];
    while chosen.len() < count {
        let mut next = None;
        let mut next_d = -1.0;
        for (i, candidate) in candidates.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let min_d = chosen
                .iter()
                .map(|&c| dist_sq(candidate.1, candidates[c].1))
                .fold(f64::INFINITY, f64::min);
            if min_d > next_d {
                next_d = min_d;
                next = Some(i);
            }
        }
        chosen.push(next.expect("candidates remain"));
    }
    let mut ids: Vec<u64> = chosen.into_iter().map(|i| candidates[i].0).collect();
    ids.sort_unstable();
    ids
}
