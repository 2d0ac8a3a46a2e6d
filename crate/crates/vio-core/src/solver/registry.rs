//! Name-based selection of the constrained-minimization strategies.
//!
//! Both strategies solve the same problem shape — minimize a smooth `f`
//! subject to `As = b` — and are interchangeable behind
//! [`ConstrainedMinimizer`], so the CLI and the pipeline pick one at
//! runtime by name.

use nalgebra::DVector;

use super::constraint::LinearEqualityConstraint;
use super::objective::SmoothObjective;
use super::options::{SolverOptions, SolverResult};
use super::penalty::{minimize_penalty_baseline, DEFAULT_PENALTY_WEIGHTS};

/// A strategy that minimizes a smooth objective over a linear equality
/// constraint set. Strategies carry no shared mutable state, so they are
/// safe to use from any execution context.
pub trait ConstrainedMinimizer: Send + Sync {
    /// Registry name, as accepted by [`minimizer_by_name`].
    fn name(&self) -> &'static str;

    fn minimize(
        &self,
        objective: &dyn SmoothObjective,
        constraint: &LinearEqualityConstraint,
        start_hint: &DVector<f64>,
    ) -> SolverResult;
}

/// The semi-implicit continuation method; the default strategy.
#[derive(Debug, Clone, Default)]
pub struct SemiImplicit {
    pub options: SolverOptions,
}

impl ConstrainedMinimizer for SemiImplicit {
    fn name(&self) -> &'static str {
        "semi-implicit"
    }

    fn minimize(
        &self,
        objective: &dyn SmoothObjective,
        constraint: &LinearEqualityConstraint,
        start_hint: &DVector<f64>,
    ) -> SolverResult {
        super::minimize(objective, constraint, start_hint, &self.options)
    }
}

/// The quadratic-penalty baseline over the default weight schedule.
#[derive(Debug, Clone)]
pub struct PenaltyBaseline {
    pub options: SolverOptions,
    pub weights: Vec<f64>,
}

impl Default for PenaltyBaseline {
    fn default() -> Self {
        Self {
            options: SolverOptions::default(),
            weights: DEFAULT_PENALTY_WEIGHTS.to_vec(),
        }
    }
}

impl ConstrainedMinimizer for PenaltyBaseline {
    fn name(&self) -> &'static str {
        "penalty"
    }

    fn minimize(
        &self,
        objective: &dyn SmoothObjective,
        constraint: &LinearEqualityConstraint,
        start_hint: &DVector<f64>,
    ) -> SolverResult {
        minimize_penalty_baseline(objective, constraint, start_hint, &self.weights, &self.options)
            .result
    }
}

/// Names accepted by [`minimizer_by_name`].
pub fn minimizer_names() -> &'static [&'static str] {
    &["semi-implicit", "penalty"]
}

/// Looks a strategy up by name, configured with `options`.
pub fn minimizer_by_name(name: &str, options: SolverOptions) -> Option<Box<dyn ConstrainedMinimizer>> {
    match name {
        "semi-implicit" => Some(Box::new(SemiImplicit { options })),
        "penalty" => Some(Box::new(PenaltyBaseline {
            options,
            weights: DEFAULT_PENALTY_WEIGHTS.to_vec(),
        })),
        _ => None,
    }
}
