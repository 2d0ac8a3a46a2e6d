use nalgebra::{DMatrix, DVector};

use super::assemble::AssembledConstraint;
use super::GeometryError;
use crate::solver::LinearEqualityConstraint;

/// Consistent full-row-rank constraint extracted from the raw stacked rows.
#[derive(Debug)]
pub struct ReducedConstraint {
    pub constraint: LinearEqualityConstraint,
    /// Retained numerical rank.
    pub rank: usize,
    /// Singular values below the rank threshold, largest first.
    pub discarded: Vec<f64>,
}

impl ReducedConstraint {
    /// True when directions fell below the rank threshold — either sensor
    /// noise made the stacked rows inconsistent or the level-flight
    /// degeneracy left landmark heights undetermined.
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.constraint.dim()
    }
}

/// Reduces the raw overdetermined (and, with noisy sensors, inconsistent)
/// system to a consistent full-row-rank constraint.
///
/// Rows are equilibrated to unit norm, the system is factored by SVD and
/// only directions with `σ > rank_tol·σ_max` are kept: `Â = Σ_r V_rᵀ`,
/// `b̂ = U_rᵀ b`. The feasible set of `Â s = b̂` is the set of least-squares
/// solutions of the truncated system, so the reduction distorts the data as
/// little as possible. Directions lost to a vanishing altitude difference
/// migrate into the feasible null space, where the inertial-distance
/// objective resolves them.
pub fn reduce_constraint(
    raw: &AssembledConstraint,
    rank_tol: f64,
) -> Result<ReducedConstraint, GeometryError> {
    let (matrix, rhs) = raw.equilibrated();
    let n = matrix.ncols();
    let svd = matrix.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma = &svd.singular_values;

    let sigma_max = sigma[0];
    let rank = sigma.iter().filter(|&&s| s > rank_tol * sigma_max).count();
    if sigma_max <= 0.0 || rank == 0 {
        return Err(GeometryError::DegenerateSystem);
    }

    let mut reduced_matrix = DMatrix::zeros(rank, n);
    for i in 0..rank {
        reduced_matrix.row_mut(i).copy_from(&(sigma[i] * v_t.row(i)));
    }
    let reduced_rhs = DVector::from_fn(rank, |i, _| u.column(i).dot(&rhs));

    Ok(ReducedConstraint {
        constraint: LinearEqualityConstraint::from_full_rank_rows(reduced_matrix, reduced_rhs),
        rank,
        discarded: sigma.iter().skip(rank).cloned().collect(),
    })
}

/// Feasible start point for the solver: the minimum-norm solution with its
/// position block nudged toward the dead-reckoning prediction inside the
/// feasible null space.
pub fn initial_guess(reduced: &ReducedConstraint, ins_prediction: (f64, f64)) -> DVector<f64> {
    let n = reduced.constraint.dim();
    let min_norm = reduced.constraint.project_feasible(&DVector::zeros(n));
    let mut toward_ins = DVector::zeros(n);
    toward_ins[0] = ins_prediction.0 - min_norm[0];
    toward_ins[1] = ins_prediction.1 - min_norm[1];
    &min_norm + reduced.constraint.projector().apply(&toward_ins)
}
