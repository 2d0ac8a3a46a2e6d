//! Quadratic-penalty baseline: minimize `f(s) + w‖As − b‖²` over an
//! increasing weight schedule.
//!
//! Kept as a comparison point only. Folding the constraint into the
//! objective drives the effective Hessian condition number up with `w`,
//! which is exactly the ill-conditioning the constrained continuation
//! method avoids; each stage reports that condition number.

use nalgebra::{DMatrix, DVector};

use super::constraint::LinearEqualityConstraint;
use super::objective::SmoothObjective;
use super::options::{SolverOptions, SolverResult, SolverStatus};

/// Default weight schedule, one decade every other step.
pub const DEFAULT_PENALTY_WEIGHTS: [f64; 4] = [1e2, 1e4, 1e6, 1e8];

/// Diagnostics for one penalty weight.
#[derive(Debug, Clone)]
pub struct PenaltyStage {
    pub weight: f64,
    /// Condition number of `∇²f + 2wAᵀA` at the stage solution.
    pub hessian_condition: f64,
    /// `‖As − b‖` at the stage solution.
    pub feasibility_violation: f64,
    pub iterations: usize,
}

/// Result of the penalty continuation together with per-stage diagnostics.
#[derive(Debug, Clone)]
pub struct PenaltyOutcome {
    pub result: SolverResult,
    pub stages: Vec<PenaltyStage>,
}

struct PenalizedObjective<'a> {
    inner: &'a dyn SmoothObjective,
    constraint: &'a LinearEqualityConstraint,
    weight: f64,
}

impl SmoothObjective for PenalizedObjective<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, s: &DVector<f64>) -> f64 {
        self.inner.value(s) + self.weight * self.constraint.residual(s).norm_squared()
    }

    fn gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        self.inner.gradient(s)
            + 2.0 * self.weight * self.constraint.matrix().transpose() * self.constraint.residual(s)
    }

    fn hessian(&self, s: &DVector<f64>) -> DMatrix<f64> {
        let a = self.constraint.matrix();
        self.inner.hessian(s) + 2.0 * self.weight * a.transpose() * a
    }
}

/// Runs the unconstrained continuation on `f + w‖As − b‖²` for each weight
/// in `weights`, warm-starting every stage from the previous solution.
///
/// The embedded [`SolverResult`] describes the final stage; its status is
/// `Converged` only when the final iterate also satisfies the constraint to
/// the solver's feasibility tolerance, which the penalty formulation
/// typically cannot reach — that is the point of the comparison.
pub fn minimize_penalty_baseline(
    objective: &dyn SmoothObjective,
    constraint: &LinearEqualityConstraint,
    start_hint: &DVector<f64>,
    weights: &[f64],
    opts: &SolverOptions,
) -> PenaltyOutcome {
    assert!(!weights.is_empty(), "penalty weight schedule is empty");
    let unconstrained = LinearEqualityConstraint::unconstrained(constraint.dim());
    let mut s = start_hint.clone();
    let mut stages = Vec::with_capacity(weights.len());
    let mut last: Option<SolverResult> = None;

    // The default tolerance must track the scale of the original objective:
    // deriving it from the penalized value would loosen with the weight.
    let mut stage_opts = opts.clone();
    if stage_opts.pg_tol.is_none() {
        stage_opts.pg_tol = Some(1e-8 * (1.0 + objective.value(&s).abs()));
    }

    for &weight in weights {
        let penalized = PenalizedObjective {
            inner: objective,
            constraint,
            weight,
        };
        let result = super::minimize(&penalized, &unconstrained, &s, &stage_opts);
        s = result.solution.clone();
        stages.push(PenaltyStage {
            weight,
            hessian_condition: condition_number(&penalized.hessian(&s)),
            feasibility_violation: constraint.residual(&s).norm(),
            iterations: result.iterations,
        });
        last = Some(result);
    }

    let mut result = last.expect("at least one stage ran");
    // Grade the outcome against the *constrained* problem.
    result.multiplier = constraint.multiplier(&objective.gradient(&result.solution));
    result.pg_norm = constraint
        .projected_gradient(&objective.gradient(&result.solution))
        .norm();
    result.objective_value = objective.value(&result.solution);
    let feasible = constraint.relative_residual(&result.solution) <= opts.feas_tol;
    if !(feasible && result.status == SolverStatus::Converged) {
        result.status = SolverStatus::MaxIterations;
    }
    PenaltyOutcome { result, stages }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let smallest = sv[sv.len() - 1];
    if smallest == 0.0 {
        f64::INFINITY
    } else {
        sv[0] / smallest
    }
}
