//! Minimizer for smooth objectives under linear equality constraints.
//!
//! The method treats the first-order optimality system as a
//! differential-algebraic gradient flow: the iterate follows
//! `ds/dt = −(∇f + Aᵀλ)` while staying on the constraint plane `As = b`.
//! Eliminating the multiplier turns the right-hand side into the projected
//! gradient `p_g = P∇f`, and a semi-implicit Euler step with the Hessian
//! frozen at the current point yields the shifted linear system
//! `((1/Δt)I + G)d = −p_g`. The predictor point is pulled back onto the
//! constraint plane by orthogonal projection, and the time step Δt plays the
//! role of a trust radius: it is adapted from the ratio of actual to
//! model-predicted objective decrease.
//!
//! Two interchangeable strategies expose this problem family behind the
//! [`ConstrainedMinimizer`] trait: the semi-implicit continuation method and
//! a quadratic-penalty baseline kept for conditioning comparisons. See
//! [`registry`] for name-based selection.

mod constraint;
mod objective;
mod options;
mod penalty;
pub mod registry;
mod steps;

pub use constraint::{LinearEqualityConstraint, Projector};
pub use objective::{QuadraticObjective, SmoothObjective};
pub use options::{IterationRecord, SolverOptions, SolverResult, SolverStatus};
pub use penalty::{minimize_penalty_baseline, PenaltyOutcome, PenaltyStage, DEFAULT_PENALTY_WEIGHTS};
pub use registry::{minimizer_by_name, minimizer_names, ConstrainedMinimizer};
pub use steps::{
    corrected_step, measurement_ratio, pd_guard, predicted_reduction, predictor_step,
    update_time_step,
};

use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    /// Numerical rank below the row count at the configured tolerance.
    #[error("constraint matrix is rank deficient (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },
    #[error("dimension mismatch (expected {expected}, got {got})")]
    DimensionMismatch { expected: usize, got: usize },
    /// Factorization failed despite the definiteness guard; the caller
    /// treats the step as rejected.
    #[error("symmetric factorization failed")]
    NumericalFailure,
    #[error("solver options violate the required threshold ordering")]
    InvalidOptions,
}

/// Relative floor under which the predicted reduction is considered zero and
/// the ratio is never formed.
const RATIO_DENOM_FLOOR: f64 = 1e-14;

/// Scale factor for the default projected-gradient tolerance.
const DEFAULT_PG_TOL_SCALE: f64 = 1e-8;

/// Minimizes `objective` over `{s : As = b}` with the semi-implicit
/// continuation method.
///
/// The start hint is projected onto the constraint plane; every later
/// iterate stays there by construction. Termination tests the projected
/// gradient `p_g = ∇f + Aᵀλ` (the quantity the convergence theory controls;
/// the raw gradient need not vanish at a constrained minimizer).
///
/// # Panics
///
/// Panics if `opts.validate()` fails or the dimensions of the objective,
/// constraint and hint disagree.
pub fn minimize(
    objective: &dyn SmoothObjective,
    constraint: &LinearEqualityConstraint,
    start_hint: &DVector<f64>,
    opts: &SolverOptions,
) -> SolverResult {
    opts.validate().expect("invalid solver options");
    let n = constraint.dim();
    assert_eq!(objective.dim(), n, "objective/constraint dimension mismatch");
    assert_eq!(start_hint.len(), n, "start hint dimension mismatch");

    let projector = constraint.projector();
    let rhs_scale = 1.0 + constraint.rhs().norm();

    let mut s = constraint.project_feasible(start_hint);
    let mut trace = opts.record_trace.then(Vec::new);

    if constraint.residual(&s).norm() > opts.feas_tol * rhs_scale {
        let multiplier = constraint.multiplier(&objective.gradient(&s));
        let pg_norm = constraint.projected_gradient(&objective.gradient(&s)).norm();
        return SolverResult {
            objective_value: objective.value(&s),
            solution: s,
            multiplier,
            pg_norm,
            iterations: 0,
            status: SolverStatus::InfeasibleConstraint,
            trace,
        };
    }

    let mut f = objective.value(&s);
    let mut gradient = objective.gradient(&s);
    let mut pg = constraint.projected_gradient(&gradient);
    let mut hessian = objective.hessian(&s);

    let pg_tol = opts
        .pg_tol
        .unwrap_or(DEFAULT_PG_TOL_SCALE * (1.0 + f.abs()));

    let mut dt = opts.dt_init;
    // Ceiling on Δt learned from definiteness-guard failures. Re-expanding
    // straight back to a Δt whose guard just failed would waste every other
    // iteration in a reject/accept cycle; the ceiling relaxes gradually on
    // acceptance so larger steps are re-probed as the curvature changes.
    let mut dt_ceiling = opts.dt_max;
    let mut iterations = 0;
    let mut rejections = 0;
    let status = loop {
        if pg.norm() <= pg_tol {
            break SolverStatus::Converged;
        }
        if iterations >= opts.max_iter || rejections >= opts.max_rejections {
            break SolverStatus::MaxIterations;
        }
        iterations += 1;

        // Attempt one predictor/corrector step; any failure demotes the
        // attempt to the rejection sentinel ρ = −1.
        let mut ratio = -1.0;
        let mut predicted = f64::NAN;
        let mut step_norm = f64::NAN;
        let mut pred_lower_bound = f64::NAN;
        let mut trial: Option<(DVector<f64>, f64)> = None;
        let mut structural_failure = true;

        if steps::pd_guard(dt, &hessian, &projector) {
            if let Ok(d) = steps::predictor_step(dt, &hessian, &pg) {
                structural_failure = false;
                let projected_step = projector.apply(&d);
                step_norm = projected_step.norm();
                predicted = steps::model_reduction(&gradient, &hessian, &projected_step);
                if trace.is_some() {
                    pred_lower_bound = predicted_reduction_bound(&pg, &hessian, step_norm);
                }
                if predicted > 0.0 {
                    let mut candidate = &s + &projected_step;
                    if constraint.residual(&candidate).norm() > 0.5 * opts.feas_tol * rhs_scale {
                        candidate = constraint.project_feasible(&candidate);
                    }
                    let f_candidate = objective.value(&candidate);
                    if predicted > RATIO_DENOM_FLOOR * (1.0 + f.abs()) {
                        ratio = steps::measurement_ratio(f, f_candidate, predicted);
                        trial = Some((candidate, f_candidate));
                    } else if f_candidate < f {
                        // The model predicts a decrease below the rounding
                        // noise of f, so the ratio cannot be measured; trust
                        // the model as long as the step still descends.
                        ratio = 1.0;
                        trial = Some((candidate, f_candidate));
                    }
                }
            }
        }

        if structural_failure {
            dt_ceiling = dt;
        }

        let accepted = ratio > opts.accept_thresh;
        if let (true, Some((candidate, f_candidate))) = (accepted, trial) {
            s = candidate;
            f = f_candidate;
            gradient = objective.gradient(&s);
            pg = constraint.projected_gradient(&gradient);
            hessian = objective.hessian(&s);
            rejections = 0;
            dt_ceiling = (dt_ceiling * opts.expand_factor.sqrt()).min(opts.dt_max);
        } else {
            rejections += 1;
        }

        if let Some(records) = trace.as_mut() {
            records.push(IterationRecord {
                iter: iterations,
                objective: f,
                pg_norm: pg.norm(),
                dt,
                ratio,
                predicted_reduction: predicted,
                step_norm,
                pred_lower_bound,
                accepted,
            });
        }

        dt = steps::update_time_step(dt, ratio, opts).min(dt_ceiling);
    };

    SolverResult {
        multiplier: constraint.multiplier(&gradient),
        objective_value: f,
        pg_norm: pg.norm(),
        solution: s,
        iterations,
        status,
        trace,
    }
}

/// Lower bound `½‖p_g‖·min{‖Pd‖, ‖p_g‖/‖G‖}` on the predicted reduction,
/// valid on iterations where the definiteness guard holds. Recorded in the
/// trace so the invariant suites can check it; `‖G‖` is the spectral norm.
fn predicted_reduction_bound(
    pg: &DVector<f64>,
    hessian: &nalgebra::DMatrix<f64>,
    step_norm: f64,
) -> f64 {
    let spectral = hessian
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, ev| acc.max(ev.abs()));
    let curvature_scale = if spectral > 0.0 {
        pg.norm() / spectral
    } else {
        f64::INFINITY
    };
    0.5 * pg.norm() * step_norm.min(curvature_scale)
}
