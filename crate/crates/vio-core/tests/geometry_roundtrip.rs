//! End-to-end geometric consistency: noiseless sensor streams must
//! reproduce the generating trajectory through assemble → reduce → minimize,
//! in both the well-posed (climbing) and the singular (level-flight) cases.

mod common;

use nalgebra::DVector;

use vio_core::geometry::{
    assemble_rows, build_objective, initial_guess, reduce_constraint, CameraIntrinsics, FrameRole,
    LocalizationProblem, PixelObservation,
};
use vio_core::pipeline::{run, run_over_frames, OdometerState, PipelineConfig};
use vio_core::sim::{
    gen_landmarks, gen_trajectory, simulate_sensors, FlightPlan, NoiseSpec, SimConfig,
};
use vio_core::solver::{minimize, SolverOptions, SolverStatus};

fn noiseless_problem(delta_h: f64) -> (LocalizationProblem, (f64, f64)) {
    use nalgebra::Vector3;
    use vio_core::geometry::project_landmark;

    let intr = CameraIntrinsics::new(1000.0);
    // Altitude climbs by delta_h per frame; zero means exactly level flight.
    let cams = [
        Vector3::new(-235.0, 12.0, 1200.0 - 2.0 * delta_h),
        Vector3::new(0.0, 5.0, 1200.0 - delta_h),
        Vector3::new(235.0, -3.0, 1200.0),
    ];
    let landmarks = [
        Vector3::new(-140.0, -180.0, 22.0),
        Vector3::new(30.0, 210.0, -15.0),
        Vector3::new(180.0, -90.0, 5.0),
        Vector3::new(320.0, 160.0, 34.0),
        Vector3::new(410.0, -40.0, -8.0),
    ];
    let mut observations = Vec::new();
    for (i, lm) in landmarks.iter().enumerate() {
        let base_frame = if i % 2 == 0 { 0 } else { 1 };
        let role = if base_frame == 0 { FrameRole::PrevPrev } else { FrameRole::Prev };
        let (x_px, y_px) = project_landmark(&cams[base_frame], lm, &intr).unwrap();
        observations.push(PixelObservation {
            landmark_id: i as u64,
            frame: role,
            x_px,
            y_px,
        });
        let (x_px, y_px) = project_landmark(&cams[2], lm, &intr).unwrap();
        observations.push(PixelObservation {
            landmark_id: i as u64,
            frame: FrameRole::Next,
            x_px,
            y_px,
        });
    }
    let problem = LocalizationProblem {
        prev_prev_pos: (cams[0].x, cams[0].y),
        prev_pos: (cams[1].x, cams[1].y),
        delta_h_from_prev_prev: cams[2].z - cams[0].z,
        delta_h_from_prev: cams[2].z - cams[1].z,
        dist_from_prev_prev: (cams[2] - cams[0]).norm(),
        dist_from_prev: (cams[2] - cams[1]).norm(),
        intrinsics: intr,
        observations,
    };
    (problem, (cams[2].x, cams[2].y))
}

fn solve_problem(problem: &LocalizationProblem, rank_tol: f64) -> (f64, f64) {
    let layout = problem.layout();
    let raw = assemble_rows(problem, &layout).unwrap();
    let reduced = reduce_constraint(&raw, rank_tol).unwrap();
    let objective = build_objective(problem, &layout);
    // Dead-reckoning prediction: continue the prior track direction by the
    // measured horizontal range.
    let dx = problem.prev_pos.0 - problem.prev_prev_pos.0;
    let dy = problem.prev_pos.1 - problem.prev_prev_pos.1;
    let len = (dx * dx + dy * dy).sqrt();
    let range = (problem.dist_from_prev.powi(2) - problem.delta_h_from_prev.powi(2))
        .max(0.0)
        .sqrt();
    let prediction = (
        problem.prev_pos.0 + dx / len * range,
        problem.prev_pos.1 + dy / len * range,
    );
    let hint = initial_guess(&reduced, prediction);
    let result = minimize(&objective, &reduced.constraint, &hint, &SolverOptions::default());
    assert_ne!(result.status, SolverStatus::InfeasibleConstraint);
    (result.solution[0], result.solution[1])
}

#[test]
fn single_step_generative_consistency() {
    // Five landmarks, mixed base frames, nonzero altitude differences: the
    // feasible set pins the next position to the generating geometry.
    let (problem, truth) = noiseless_problem(6.0);
    let (x, y) = solve_problem(&problem, 1e-6);
    let err = ((x - truth.0).powi(2) + (y - truth.1).powi(2)).sqrt();
    assert!(err <= 1e-6, "single-step error {err:.3e}");
}

#[test]
fn dense_two_frame_solve_agrees_with_reduction_route() {
    // The square two-landmark system solved densely must agree with the
    // reduce → minimize route when the altitude difference keeps it regular.
    let intr = CameraIntrinsics::new(1000.0);
    use nalgebra::Vector3;
    use vio_core::geometry::project_landmark;
    let prev_cam = Vector3::new(0.0, 0.0, 1200.0);
    let next_cam = Vector3::new(235.0, 8.0, 1212.0);
    let landmarks = [
        Vector3::new(130.0, -90.0, 14.0),
        Vector3::new(340.0, 120.0, -22.0),
    ];
    let mut observations = Vec::new();
    for (i, lm) in landmarks.iter().enumerate() {
        let (x_px, y_px) = project_landmark(&prev_cam, lm, &intr).unwrap();
        observations.push(PixelObservation {
            landmark_id: i as u64,
            frame: FrameRole::Prev,
            x_px,
            y_px,
        });
        let (x_px, y_px) = project_landmark(&next_cam, lm, &intr).unwrap();
        observations.push(PixelObservation {
            landmark_id: i as u64,
            frame: FrameRole::Next,
            x_px,
            y_px,
        });
    }
    let problem = LocalizationProblem {
        prev_prev_pos: (-235.0, 0.0),
        prev_pos: (0.0, 0.0),
        delta_h_from_prev_prev: 12.0,
        delta_h_from_prev: 12.0,
        dist_from_prev_prev: (next_cam - Vector3::new(-235.0, 0.0, 1200.0)).norm(),
        dist_from_prev: (next_cam - prev_cam).norm(),
        intrinsics: intr,
        observations,
    };
    let layout = problem.layout();
    let raw = assemble_rows(&problem, &layout).unwrap();
    assert_eq!(raw.matrix.shape(), (8, 8));
    let dense = raw.matrix.clone().lu().solve(&raw.rhs).unwrap();
    let (x, y) = solve_problem(&problem, 1e-9);
    assert!(
        ((x - dense[0]).powi(2) + (y - dense[1]).powi(2)).sqrt() <= 1e-8,
        "dense and reduced routes disagree"
    );
    assert!((dense[0] - next_cam.x).abs() <= 1e-7);
}

#[test]
fn equilibration_preserves_the_solution() {
    // Rescaling consistent rows by arbitrary positive factors must not move
    // the solution: equilibration normalizes both systems to the same rows.
    let (problem, truth) = noiseless_problem(9.0);
    let layout = problem.layout();
    let raw = assemble_rows(&problem, &layout).unwrap();

    let mut rescaled = raw.clone();
    for i in 0..rescaled.matrix.nrows() {
        let factor = 0.2 + 3.7 * ((i * 13 % 7) as f64) / 7.0;
        rescaled.matrix.row_mut(i).scale_mut(factor);
        rescaled.rhs[i] *= factor;
        rescaled.row_norms[i] = rescaled.matrix.row(i).norm();
    }

    let objective = build_objective(&problem, &layout);
    let solve_raw = |raw: &vio_core::geometry::AssembledConstraint| {
        let reduced = reduce_constraint(raw, 1e-9).unwrap();
        let hint = reduced.constraint.project_feasible(&DVector::zeros(layout.dim()));
        let result = minimize(&objective, &reduced.constraint, &hint, &SolverOptions::default());
        (result.solution[0], result.solution[1])
    };
    let a = solve_raw(&raw);
    let b = solve_raw(&rescaled);
    let err = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    assert!(err <= 1e-7, "row rescaling moved the solution by {err:.3e}");
    let truth_err = ((a.0 - truth.0).powi(2) + (a.1 - truth.1).powi(2)).sqrt();
    assert!(truth_err <= 1e-6);
}

#[test]
fn single_step_level_flight_rescue() {
    let (problem, truth) = noiseless_problem(0.0);
    let layout = problem.layout();
    let raw = assemble_rows(&problem, &layout).unwrap();
    let reduced = reduce_constraint(&raw, 1e-3).unwrap();
    assert!(reduced.is_rank_deficient(), "level flight must lose rank");

    // Physical warm start, as used by the odometer loop: heights at the
    // above-ground prior, landmarks on their base-frame rays, position at
    // the dead-reckoning prediction.
    let f = problem.intrinsics.focal_px();
    let mut hint = DVector::zeros(layout.dim());
    hint[0] = truth.0 + 1.0;
    hint[1] = truth.1 + 0.5;
    for (slot, &id) in layout.landmark_ids().iter().enumerate() {
        let obs = problem
            .observations
            .iter()
            .find(|o| o.landmark_id == id && o.frame != FrameRole::Next)
            .unwrap();
        let base_pos = match obs.frame {
            FrameRole::PrevPrev => problem.prev_prev_pos,
            FrameRole::Prev => problem.prev_pos,
            FrameRole::Next => unreachable!(),
        };
        let height = 1200.0;
        hint[layout.landmark_x(slot)] = base_pos.0 - obs.x_px / f * height;
        hint[layout.landmark_y(slot)] = base_pos.1 - obs.y_px / f * height;
        hint[layout.landmark_height(slot)] = height;
    }
    let start = reduced.constraint.project_feasible(&hint);
    let objective = build_objective(&problem, &layout);
    let result = minimize(&objective, &reduced.constraint, &start, &SolverOptions::default());
    assert_ne!(result.status, SolverStatus::InfeasibleConstraint);
    let err = ((result.solution[0] - truth.0).powi(2) + (result.solution[1] - truth.1).powi(2))
        .sqrt();
    assert!(err <= 1e-4, "rescued step error {err:.3e}");
}

#[test]
fn crafted_level_flight_pipeline_recovers_every_frame() {
    let intr = CameraIntrinsics::new(1000.0);
    let (_, frames) = common::scenes::level_flight_two_landmark_stream(52, &intr);
    let config = PipelineConfig {
        landmarks_per_step: 2,
        ..PipelineConfig::default()
    };
    let mut state = OdometerState::new(
        config,
        intr,
        &frames[0],
        (frames[0].truth.position.x, frames[0].truth.position.y),
        &frames[1],
        (frames[1].truth.position.x, frames[1].truth.position.y),
    )
    .unwrap();
    for frame in &frames[2..] {
        let estimate = state.step(frame);
        assert!(!estimate.fallback, "frame {}", frame.frame_id);
        assert!(estimate.rank_deficient, "two-landmark level flight is singular");
        assert!(estimate.singularity <= 1e-10, "frame {}", frame.frame_id);
        let err = ((estimate.position.0 - frame.truth.position.x).powi(2)
            + (estimate.position.1 - frame.truth.position.y).powi(2))
        .sqrt();
        assert!(err <= 1e-4, "frame {}: error {err:.3e}", frame.frame_id);
    }
}

#[test]
fn replayed_stream_matches_in_process_run() {
    let mut plan = FlightPlan::reference();
    plan.duration_s = 20.0;
    let intr = CameraIntrinsics::new(1000.0);
    let sim_config = SimConfig::default();
    let noise = NoiseSpec::reference();
    let truth = gen_trajectory(&plan);
    let field = gen_landmarks(&truth, &intr, &sim_config, 12).unwrap();
    let frames = simulate_sensors(&truth, &field, &intr, &sim_config, &noise, 12);

    let mut frames_buf = Vec::new();
    let mut obs_buf = Vec::new();
    vio_core::sim::write_frames_csv(&mut frames_buf, &frames).unwrap();
    vio_core::sim::write_observations_csv(&mut obs_buf, &frames).unwrap();
    let replayed = vio_core::sim::read_sensor_frames(
        frames_buf.as_slice(),
        obs_buf.as_slice(),
        plan.frame_interval_s,
    )
    .unwrap();

    let direct = run(&plan, &sim_config, &noise, &PipelineConfig::default(), &intr, 12).unwrap();
    let ins_track = vio_core::sim::ins_dead_reckon(&truth, &plan, &noise, 12);
    let from_csv = run_over_frames(
        &plan,
        &PipelineConfig::default(),
        &intr,
        &replayed,
        ins_track,
        12,
    )
    .unwrap();

    // 9-significant-digit serialization bounds the replay divergence.
    for (a, b) in direct.estimated_track.iter().zip(&from_csv.estimated_track) {
        let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        assert!(d <= 1e-3, "replay diverged by {d:.3e} m");
    }
}
