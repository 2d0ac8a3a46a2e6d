use super::SolverError;

/// Tuning constants for the semi-implicit continuation loop.
///
/// The defaults follow the usual trust-region style choices: a step is
/// accepted when the measured-over-predicted reduction ratio clears
/// `accept_thresh`, and the time step grows/holds/shrinks depending on how
/// far the ratio sits from 1.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Initial time step Δt₀.
    pub dt_init: f64,
    /// Acceptance threshold η_a: accept the trial point iff ρ > η_a.
    pub accept_thresh: f64,
    /// η₁: grow the time step when |1 − ρ| ≤ η₁.
    pub expand_thresh: f64,
    /// η₂: shrink the time step when |1 − ρ| ≥ η₂.
    pub shrink_thresh: f64,
    /// γ₁ > 1, growth factor.
    pub expand_factor: f64,
    /// γ₂ ∈ (0, 1), shrink factor.
    pub shrink_factor: f64,
    /// Termination threshold on the projected-gradient norm. `None` resolves
    /// to `1e-8·(1 + |f(s₀)|)` once the start value is known.
    pub pg_tol: Option<f64>,
    pub max_iter: usize,
    /// Time-step clamp, guarding against overflow/underflow loops.
    pub dt_min: f64,
    pub dt_max: f64,
    /// Consecutive-rejection cap; hitting it signals tolerance breakdown and
    /// returns the best iterate with `MaxIterations` status.
    pub max_rejections: usize,
    /// Relative feasibility tolerance for the `Converged` status.
    pub feas_tol: f64,
    /// Relative rank tolerance τ_rank used when constructing constraints
    /// from raw data on behalf of this solver configuration.
    pub rank_tol: f64,
    /// Record the per-iteration trace. Off by default; toggling it does not
    /// change the iterates.
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt_init: 1.0,
            accept_thresh: 1e-6,
            expand_thresh: 0.25,
            shrink_thresh: 0.75,
            expand_factor: 2.0,
            shrink_factor: 0.5,
            pg_tol: None,
            max_iter: 1000,
            dt_min: 1e-12,
            dt_max: 1e8,
            max_rejections: 60,
            feas_tol: 1e-9,
            rank_tol: 1e-3,
            record_trace: false,
        }
    }
}

impl SolverOptions {
    /// Checks the threshold ordering `0 < η_a < η₁ ≤ ½ < η₂ < 1` and
    /// `0 < γ₂ < 1 < γ₁`, plus positivity of the time-step bounds.
    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = 0.0 < self.accept_thresh
            && self.accept_thresh < self.expand_thresh
            && self.expand_thresh <= 0.5
            && 0.5 < self.shrink_thresh
            && self.shrink_thresh < 1.0
            && 0.0 < self.shrink_factor
            && self.shrink_factor < 1.0
            && 1.0 < self.expand_factor
            && self.dt_init > 0.0
            && 0.0 < self.dt_min
            && self.dt_min <= self.dt_init
            && self.dt_init <= self.dt_max
            && self.max_iter > 0
            && self.feas_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidOptions)
        }
    }
}

/// Termination state of a `minimize` call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    /// `‖p_g‖` fell below the tolerance at a feasible point.
    Converged,
    /// Iteration or rejection budget exhausted; the best iterate is returned.
    MaxIterations,
    /// The start point could not be placed on the constraint set.
    InfeasibleConstraint,
}

/// One row of the optional per-iteration trace.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub pg_norm: f64,
    pub dt: f64,
    pub ratio: f64,
    pub predicted_reduction: f64,
    /// ‖P d‖ of the trial step; NaN when the definiteness guard failed.
    pub step_norm: f64,
    /// Lower bound ½‖p_g‖·min{‖Pd‖, ‖p_g‖/‖G‖} on the predicted reduction,
    /// recorded on guarded iterations for invariant checking; NaN otherwise.
    pub pred_lower_bound: f64,
    pub accepted: bool,
}

/// Outcome of a `minimize` call.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub solution: nalgebra::DVector<f64>,
    /// Lagrange multiplier at the returned point.
    pub multiplier: nalgebra::DVector<f64>,
    pub objective_value: f64,
    pub pg_norm: f64,
    /// Attempted iterations (accepted and rejected).
    pub iterations: usize,
    pub status: SolverStatus,
    pub trace: Option<Vec<IterationRecord>>,
}
