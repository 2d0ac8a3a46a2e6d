//! Step primitives of the continuation loop: the definiteness guard, the
//! semi-implicit predictor, the projection corrector, the quadratic-model
//! reduction and the time-step update.

use nalgebra::{DMatrix, DVector};

use super::constraint::Projector;
use super::objective::SmoothObjective;
use super::options::SolverOptions;
use super::SolverError;

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Shifted system matrix `(1/Δt)·I + G`.
fn shifted_hessian(dt: f64, hessian: &DMatrix<f64>) -> DMatrix<f64> {
    let n = hessian.nrows();
    symmetrize(hessian) + DMatrix::identity(n, n) / dt
}

/// Definiteness guard: both `(1/Δt)I + G` and `(1/Δt)I + G − PᵀGP` must be
/// positive definite before a predictor step is attempted. The test is a
/// Cholesky factorization attempt, which matches the `≻ 0` semantics.
pub fn pd_guard(dt: f64, hessian: &DMatrix<f64>, projector: &Projector) -> bool {
    debug_assert!(dt > 0.0);
    let shifted = shifted_hessian(dt, hessian);
    if shifted.clone().cholesky().is_none() {
        return false;
    }
    let p = projector.matrix();
    let pgp = p.transpose() * hessian * p;
    let second = symmetrize(&(shifted - pgp));
    second.cholesky().is_some()
}

/// Solves `((1/Δt)I + G)·d = −p_g` through a symmetric factorization, with
/// one refinement pass to keep the residual near rounding level.
pub fn predictor_step(
    dt: f64,
    hessian: &DMatrix<f64>,
    projected_gradient: &DVector<f64>,
) -> Result<DVector<f64>, SolverError> {
    let shifted = shifted_hessian(dt, hessian);
    let chol = shifted.clone().cholesky().ok_or(SolverError::NumericalFailure)?;
    let rhs = -projected_gradient;
    let mut d = chol.solve(&rhs);
    let residual = &rhs - &shifted * &d;
    d += chol.solve(&residual);
    if d.iter().all(|v| v.is_finite()) {
        Ok(d)
    } else {
        Err(SolverError::NumericalFailure)
    }
}

/// Projection corrector `s_{k+1} = s_k + P d_k`; keeps the iterate on the
/// constraint plane since range(P) = null(A).
pub fn corrected_step(s: &DVector<f64>, d: &DVector<f64>, projector: &Projector) -> DVector<f64> {
    s + projector.apply(d)
}

/// Reduction of the quadratic model over the projected step:
/// `q(s_k) − q(s_k + Pd) = −gᵀPd − ½(Pd)ᵀG(Pd)`.
pub fn predicted_reduction(
    s: &DVector<f64>,
    d: &DVector<f64>,
    projector: &Projector,
    objective: &dyn SmoothObjective,
) -> f64 {
    let pd = projector.apply(d);
    model_reduction(&objective.gradient(s), &objective.hessian(s), &pd)
}

/// Same as [`predicted_reduction`] with the derivatives already at hand.
pub(crate) fn model_reduction(
    gradient: &DVector<f64>,
    hessian: &DMatrix<f64>,
    projected_step: &DVector<f64>,
) -> f64 {
    -gradient.dot(projected_step) - 0.5 * (hessian * projected_step).dot(projected_step)
}

/// Actual-over-predicted reduction ρ = (f_old − f_new)/pred. The caller is
/// responsible for keeping `pred` above its denominator floor.
pub fn measurement_ratio(f_old: f64, f_new: f64, predicted: f64) -> f64 {
    (f_old - f_new) / predicted
}

/// Time-step adaptation: grow by γ₁ when |1 − ρ| ≤ η₁, hold in the middle
/// band, shrink by γ₂ when |1 − ρ| ≥ η₂; clamped to `[dt_min, dt_max]`.
/// The rejection sentinel ρ = −1 lands in the shrink branch.
pub fn update_time_step(dt: f64, ratio: f64, opts: &SolverOptions) -> f64 {
    let deviation = (1.0 - ratio).abs();
    let next = if deviation <= opts.expand_thresh {
        opts.expand_factor * dt
    } else if deviation < opts.shrink_thresh {
        dt
    } else {
        // NaN ratios also fall through to here: shrink.
        opts.shrink_factor * dt
    };
    next.clamp(opts.dt_min, opts.dt_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::LinearEqualityConstraint;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn identity_projector(n: usize) -> Projector {
        LinearEqualityConstraint::unconstrained(n).projector()
    }

    fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
        symmetrize(m)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn guard_zero_hessian_always_passes() {
        let g = DMatrix::zeros(3, 3);
        let p = identity_projector(3);
        assert!(pd_guard(1.0, &g, &p));
        assert!(pd_guard(1e6, &g, &p));
    }

    #[test]
    fn guard_tracks_minimum_eigenvalue() {
        // G = diag(−10, 1): shift 1 is not enough, shift 20 is.
        let g = DMatrix::from_row_slice(2, 2, &[-10.0, 0.0, 0.0, 1.0]);
        let p = identity_projector(2);
        assert!(!pd_guard(1.0, &g, &p));
        assert!(pd_guard(0.05, &g, &p));
    }

    #[test]
    fn guard_checks_both_matrices_against_eigen_oracle() {
        let mut rng = StdRng::seed_from_u64(3);
        let constraint = LinearEqualityConstraint::new(
            DMatrix::from_fn(2, 5, |_, _| rng.random_range(-1.0..1.0)),
            DVector::zeros(2),
            1e-6,
        )
        .unwrap();
        let p = constraint.projector();
        for _ in 0..50 {
            let raw = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-2.0..2.0));
            let hess = symmetrize(&raw);
            let dt = 10f64.powf(rng.random_range(-2.0..2.0));
            let first = shifted_hessian(dt, &hess);
            let second = &first - p.matrix().transpose() * &hess * p.matrix();
            let oracle = min_eigenvalue(&first) > 0.0 && min_eigenvalue(&second) > 0.0;
            // Skip draws that land within rounding of the definiteness
            // boundary, where factorization and eigenvalues may disagree.
            let margin = min_eigenvalue(&first)
                .abs()
                .min(min_eigenvalue(&second).abs());
            if margin > 1e-9 {
                assert_eq!(pd_guard(dt, &hess, &p), oracle);
            }
        }
    }

    #[test]
    fn predictor_zero_hessian_is_scaled_descent() {
        let d = predictor_step(1.0, &DMatrix::zeros(2, 2), &DVector::from_vec(vec![2.0, -2.0]))
            .unwrap();
        assert_abs_diff_eq!(d[0], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn predictor_identity_hessian() {
        let d = predictor_step(
            1.0,
            &DMatrix::identity(2, 2),
            &DVector::from_vec(vec![4.0, 0.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(d[0], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn predictor_norm_bound_and_residual() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let raw = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
            let hess = symmetrize(&raw);
            let hess_norm = hess
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(0.0f64, |acc, ev| acc.max(ev.abs()));
            // Pick dt small enough that 1/dt dominates ‖G‖.
            let dt = 0.2 / (hess_norm + 1.0);
            let pg = DVector::from_fn(6, |_, _| rng.random_range(-3.0..3.0));
            let d = predictor_step(dt, &hess, &pg).unwrap();

            let shifted = shifted_hessian(dt, &hess);
            let residual = (&shifted * &d + &pg).norm();
            assert!(residual <= 1e-10 * pg.norm());
            assert!(d.norm() <= pg.norm() / (1.0 / dt - hess_norm) + 1e-12);
        }
    }

    #[test]
    fn corrected_step_null_and_row_space() {
        let constraint = LinearEqualityConstraint::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::zeros(1),
            1e-6,
        )
        .unwrap();
        let p = constraint.projector();
        let s = DVector::from_vec(vec![0.0, 1.0]);

        // d in null(A): moves the iterate.
        let d_null = DVector::from_vec(vec![0.0, 3.0]);
        assert_eq!(corrected_step(&s, &d_null, &p), &s + &d_null);

        // d in range(Aᵀ): annihilated.
        let d_row = DVector::from_vec(vec![5.0, 0.0]);
        assert_eq!(corrected_step(&s, &d_row, &p), s);
    }

    #[test]
    fn corrected_step_contracts_and_stays_feasible() {
        let mut rng = StdRng::seed_from_u64(9);
        let a = DMatrix::from_fn(3, 7, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let constraint = LinearEqualityConstraint::new(a, b, 1e-6).unwrap();
        let p = constraint.projector();
        for _ in 0..20 {
            let s = constraint.project_feasible(&DVector::from_fn(7, |_, _| rng.random_range(-2.0..2.0)));
            let d = DVector::from_fn(7, |_, _| rng.random_range(-2.0..2.0));
            let next = corrected_step(&s, &d, &p);
            assert!(p.apply(&d).norm() <= d.norm() + 1e-14);
            assert!(constraint.residual(&next).norm() <= 1e-10 * (1.0 + constraint.rhs().norm()));
        }
    }

    #[test]
    fn reduction_zero_step_is_zero() {
        let p = identity_projector(2);
        let obj = crate::solver::QuadraticObjective::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
        );
        let s = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(predicted_reduction(&s, &DVector::zeros(2), &p, &obj), 0.0);
    }

    #[test]
    fn reduction_pure_gradient_case() {
        // G = 0: the model reduction over the predictor step d = −Δt·p_g is
        // exactly Δt·‖p_g‖², strictly positive.
        let n = 4;
        let p = identity_projector(n);
        let hess = DMatrix::zeros(n, n);
        let g = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let dt = 0.7;
        let d = predictor_step(dt, &hess, &g).unwrap();
        let red = model_reduction(&g, &hess, &p.apply(&d));
        assert_abs_diff_eq!(red, dt * g.norm_squared(), epsilon = 1e-10);
    }

    #[test]
    fn ratio_basics() {
        assert_eq!(measurement_ratio(10.0, 8.0, 2.0), 1.0);
        assert!(measurement_ratio(10.0, 11.0, 2.0) < 0.0);
    }

    #[test]
    fn timestep_branches_follow_ratio() {
        let opts = SolverOptions::default();
        // ρ = 0.9: |1−ρ| = 0.1 ≤ 0.25 → double.
        assert_abs_diff_eq!(update_time_step(1.0, 0.9, &opts), 2.0);
        // ρ = 0.5: |1−ρ| = 0.5 between thresholds → hold.
        assert_abs_diff_eq!(update_time_step(1.0, 0.5, &opts), 1.0);
        // Guard-failure sentinel ρ = −1 → halve.
        assert_abs_diff_eq!(update_time_step(1.0, -1.0, &opts), 0.5);
    }

    #[test]
    fn timestep_clamped() {
        let opts = SolverOptions::default();
        assert_eq!(update_time_step(opts.dt_max, 1.0, &opts), opts.dt_max);
        assert_eq!(update_time_step(2.0 * opts.dt_min, -1.0, &opts), opts.dt_min);
        // NaN ratio shrinks rather than propagating.
        assert_eq!(update_time_step(1.0, f64::NAN, &opts), 0.5);
    }
}
