// Shared between several test binaries; not every binary uses every oracle.
#![allow(dead_code)]

//! Shared oracles for the integration suites. Everything here is
//! deliberately independent of the solver's own code paths: finite
//! differences for derivatives, a dense KKT solve for constrained quadratic
//! minimizers, eigenvalue routines for definiteness and spectral norms.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;

use vio_core::solver::{
    LinearEqualityConstraint, QuadraticObjective, SmoothObjective, SolverOptions, SolverResult,
    SolverStatus,
};

pub fn fd_gradient(obj: &dyn SmoothObjective, s: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_fn(s.len(), |i, _| {
        let mut plus = s.clone();
        let mut minus = s.clone();
        plus[i] += h;
        minus[i] -= h;
        (obj.value(&plus) - obj.value(&minus)) / (2.0 * h)
    })
}

pub fn fd_hessian(obj: &dyn SmoothObjective, s: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let n = s.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut plus = s.clone();
        let mut minus = s.clone();
        plus[i] += h;
        minus[i] -= h;
        let col = (obj.gradient(&plus) - obj.gradient(&minus)) / (2.0 * h);
        out.column_mut(i).copy_from(&col);
    }
    out
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let sym = 0.5 * (m + m.transpose());
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, ev| acc.max(ev.abs()))
}

/// A random convex QP with a full-row-rank equality constraint.
pub struct RandomQp {
    pub objective: QuadraticObjective,
    pub constraint: LinearEqualityConstraint,
    pub hint: DVector<f64>,
}

pub fn random_qp(rng: &mut StdRng, max_dim: usize) -> RandomQp {
    let n = rng.random_range(3..=max_dim);
    let m = rng.random_range(1..n);
    let factor = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let ridge = rng.random_range(0.1..2.0);
    let quad = factor.transpose() * &factor + ridge * DMatrix::identity(n, n);
    let linear = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
    let constraint = loop {
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
        if let Ok(c) = LinearEqualityConstraint::new(a, b, 1e-6) {
            break c;
        }
    };
    RandomQp {
        objective: QuadraticObjective::new(quad, linear),
        constraint,
        hint: DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0)),
    }
}

/// Direct dense solve of the KKT system `[H Aᵀ; A 0]·[s; λ] = [−c; b]`.
pub fn kkt_solve(qp: &RandomQp) -> (DVector<f64>, DVector<f64>) {
    let h = qp.objective.quad();
    let a = qp.constraint.matrix();
    let (n, m) = (h.nrows(), a.nrows());
    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(h);
    kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    kkt.view_mut((n, 0), (m, n)).copy_from(a);
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-qp.objective.linear()));
    rhs.rows_mut(n, m).copy_from(qp.constraint.rhs());
    let sol = kkt.lu().solve(&rhs).expect("KKT system is nonsingular");
    (
        sol.rows(0, n).into_owned(),
        sol.rows(n, m).into_owned(),
    )
}

/// Objective wrapper recording the feasibility of every evaluation point;
/// in this method every evaluation happens at an iterate or trial iterate,
/// all of which must stay on the constraint plane.
pub struct SnoopObjective<'a> {
    pub inner: &'a dyn SmoothObjective,
    pub constraint: &'a LinearEqualityConstraint,
    pub worst_relative_residual: RefCell<f64>,
}

impl<'a> SnoopObjective<'a> {
    pub fn new(inner: &'a dyn SmoothObjective, constraint: &'a LinearEqualityConstraint) -> Self {
        Self {
            inner,
            constraint,
            worst_relative_residual: RefCell::new(0.0),
        }
    }

    fn record(&self, s: &DVector<f64>) {
        let residual = self.constraint.relative_residual(s);
        let mut worst = self.worst_relative_residual.borrow_mut();
        if residual > *worst {
            *worst = residual;
        }
    }
}

impl SmoothObjective for SnoopObjective<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, s: &DVector<f64>) -> f64 {
        self.record(s);
        self.inner.value(s)
    }

    fn gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        self.record(s);
        self.inner.gradient(s)
    }

    fn hessian(&self, s: &DVector<f64>) -> DMatrix<f64> {
        self.record(s);
        self.inner.hessian(s)
    }
}

/// Runs `minimize` with the trace on and asserts the runtime invariants:
/// every evaluation point feasible to 1e-9 relative, strict descent with the
/// acceptance margin on accepted steps, and the predicted-reduction lower
/// bound on every guarded iteration. Returns the result for further checks.
pub fn minimize_with_invariants(
    objective: &dyn SmoothObjective,
    constraint: &LinearEqualityConstraint,
    hint: &DVector<f64>,
    opts: &SolverOptions,
    label: &str,
) -> SolverResult {
    let mut opts = opts.clone();
    opts.record_trace = true;
    let snoop = SnoopObjective::new(objective, constraint);
    let result = vio_core::solver::minimize(&snoop, constraint, hint, &opts);

    let worst = *snoop.worst_relative_residual.borrow();
    assert!(
        worst <= 1e-9,
        "{label}: iterate left the constraint plane (relative residual {worst:.3e})"
    );

    let start = constraint.project_feasible(hint);
    let mut prev_f = objective.value(&start);
    for record in result.trace.as_deref().unwrap_or(&[]) {
        if record.accepted {
            assert!(
                record.objective < prev_f,
                "{label}: accepted step did not decrease f ({} -> {})",
                prev_f,
                record.objective
            );
            if record.predicted_reduction.is_finite() && record.ratio != 1.0 {
                let margin = opts.accept_thresh * record.predicted_reduction;
                assert!(
                    record.objective <= prev_f - margin + 1e-12 * (1.0 + prev_f.abs()),
                    "{label}: descent margin violated"
                );
            }
            prev_f = record.objective;
        }
        if record.pred_lower_bound.is_finite() && record.predicted_reduction.is_finite() {
            assert!(
                record.predicted_reduction
                    >= record.pred_lower_bound - 1e-9 * (1.0 + record.pred_lower_bound),
                "{label}: predicted-reduction lower bound violated \
                 (pred {} < bound {})",
                record.predicted_reduction,
                record.pred_lower_bound
            );
        }
    }

    if result.status == SolverStatus::Converged {
        assert!(
            constraint.relative_residual(&result.solution) <= 1e-9,
            "{label}: converged point infeasible"
        );
    }
    result
}

/// Crafted level-flight sensor stream: exact pixels, exact altimeter, exact
/// inertial distances, and — the point of the construction — every landmark
/// observed in exactly two consecutive frames, so each localization step
/// faces the minimal two-landmark system whose scale direction is singular
/// in level flight.
pub mod scenes {
    use nalgebra::Vector3;
    use vio_core::geometry::{project_landmark, CameraIntrinsics};
    use vio_core::sim::{FlightPlan, Observation, SensorFrame, TruthFrame};

    pub fn level_flight_two_landmark_stream(
        frame_count: usize,
        intrinsics: &CameraIntrinsics,
    ) -> (FlightPlan, Vec<SensorFrame>) {
        let mut plan = FlightPlan::reference();
        plan.duration_s = (frame_count - 1) as f64;
        let altitude = plan.altitude_m;
        let step = plan.speed_mps;

        let camera = |k: usize| Vector3::new(step * k as f64, 0.0, altitude);
        // Two landmarks per consecutive-frame pair, offsets varied so the
        // stacked geometry never degenerates the same way twice.
        let pair = |j: usize| {
            let base = step * j as f64;
            let swing = (j % 5) as f64;
            [
                Vector3::new(base + 60.0 + 15.0 * swing, -150.0 + 20.0 * swing, 8.0 + 3.0 * swing),
                Vector3::new(base + 190.0 - 10.0 * swing, 130.0 + 25.0 * swing, -12.0 + 4.0 * swing),
            ]
        };

        let frames = (0..frame_count)
            .map(|k| {
                let cam = camera(k);
                let mut observations = Vec::new();
                // Pair (k-1, k) and pair (k, k+1) are visible in frame k.
                for j in [k.wrapping_sub(1), k] {
                    if j == usize::MAX || j + 1 >= frame_count {
                        continue;
                    }
                    for (i, lm) in pair(j).iter().enumerate() {
                        let (x_px, y_px) = project_landmark(&cam, lm, intrinsics).unwrap();
                        observations.push(Observation {
                            landmark_id: (2 * j + i) as u64,
                            x_px,
                            y_px,
                        });
                    }
                }
                SensorFrame {
                    frame_id: k,
                    altimeter_m: altitude,
                    dist_to_prev_m: if k >= 1 { step } else { 0.0 },
                    dist_to_prev_prev_m: if k >= 2 { 2.0 * step } else { 0.0 },
                    observations,
                    truth: TruthFrame {
                        frame_id: k,
                        t: k as f64,
                        position: cam,
                        cumulative_distance: step * k as f64,
                    },
                }
            })
            .collect();
        (plan, frames)
    }
}
