use nalgebra::{DMatrix, DVector};

use super::SolverError;

/// Linear equality constraint `A s = b` with `A` of full row rank (m ≤ n).
///
/// The constructor verifies the numerical rank and factors `Aᵀ = QR` once;
/// the projector, the Lagrange multiplier and the feasibility projection are
/// all applied through that orthogonal factorization, never through an
/// explicit inverse of `AAᵀ`.
#[derive(Debug, Clone)]
pub struct LinearEqualityConstraint {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
    /// Orthonormal basis of range(Aᵀ), n×m.
    basis_q: DMatrix<f64>,
    /// Upper-triangular factor, m×m, invertible for full row rank.
    factor_r: DMatrix<f64>,
}

impl LinearEqualityConstraint {
    /// Builds the constraint, rejecting matrices whose numerical rank at
    /// relative tolerance `rank_tol` is below the row count.
    pub fn new(
        matrix: DMatrix<f64>,
        rhs: DVector<f64>,
        rank_tol: f64,
    ) -> Result<Self, SolverError> {
        let (m, n) = matrix.shape();
        if m > n {
            return Err(SolverError::RankDeficient { rank: n, rows: m });
        }
        if rhs.len() != m {
            return Err(SolverError::DimensionMismatch {
                expected: m,
                got: rhs.len(),
            });
        }
        if m > 0 {
            let singular_values = matrix.clone().svd(false, false).singular_values;
            let sigma_max = singular_values[0];
            let rank = singular_values
                .iter()
                .filter(|&&s| s > rank_tol * sigma_max)
                .count();
            if sigma_max == 0.0 || rank < m {
                return Err(SolverError::RankDeficient { rank, rows: m });
            }
        }
        Ok(Self::factorize(matrix, rhs))
    }

    /// Constraint with zero rows: the feasible set is all of ℝⁿ. Used by the
    /// penalty baseline, which folds the constraint into the objective.
    pub fn unconstrained(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(0, dim),
            rhs: DVector::zeros(0),
            basis_q: DMatrix::zeros(dim, 0),
            factor_r: DMatrix::zeros(0, 0),
        }
    }

    /// Construction bypassing the rank gate, for rows that are full rank by
    /// construction (e.g. the retained block of an SVD reduction whose
    /// boundary singular value sits close to the tolerance).
    pub(crate) fn from_full_rank_rows(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        debug_assert!(matrix.nrows() <= matrix.ncols());
        debug_assert_eq!(matrix.nrows(), rhs.len());
        Self::factorize(matrix, rhs)
    }

    fn factorize(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        let (m, n) = matrix.shape();
        let (basis_q, factor_r) = if m == 0 {
            (DMatrix::zeros(n, 0), DMatrix::zeros(0, 0))
        } else {
            let qr = matrix.transpose().qr();
            (qr.q(), qr.r())
        };
        Self {
            matrix,
            rhs,
            basis_q,
            factor_r,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// `A s − b`.
    pub fn residual(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.matrix * s - &self.rhs
    }

    /// `‖A s − b‖ / (1 + ‖b‖)`.
    pub fn relative_residual(&self, s: &DVector<f64>) -> f64 {
        self.residual(s).norm() / (1.0 + self.rhs.norm())
    }

    /// Orthogonal projector onto null(A), `P = I − QQᵀ` where `Q` spans
    /// range(Aᵀ).
    pub fn projector(&self) -> Projector {
        let n = self.dim();
        let mut p = DMatrix::identity(n, n);
        if self.num_rows() > 0 {
            p -= &self.basis_q * self.basis_q.transpose();
        }
        Projector { matrix: p }
    }

    /// Least-squares multiplier: the `λ` minimizing `‖g + Aᵀλ‖`, so that
    /// `g + Aᵀλ` equals the projected gradient `Pg`.
    pub fn multiplier(&self, gradient: &DVector<f64>) -> DVector<f64> {
        if self.num_rows() == 0 {
            return DVector::zeros(0);
        }
        let rhs = -(self.basis_q.transpose() * gradient);
        self.factor_r
            .solve_upper_triangular(&rhs)
            .expect("triangular factor is invertible for a full-row-rank constraint")
    }

    /// Projected gradient `p_g = g + Aᵀλ`.
    pub fn projected_gradient(&self, gradient: &DVector<f64>) -> DVector<f64> {
        if self.num_rows() == 0 {
            return gradient.clone();
        }
        gradient + self.matrix.transpose() * self.multiplier(gradient)
    }

    /// Euclidean projection of `hint` onto the feasible set; with a zero
    /// hint this is the minimum-norm solution of `A s = b`.
    pub fn project_feasible(&self, hint: &DVector<f64>) -> DVector<f64> {
        if self.num_rows() == 0 {
            return hint.clone();
        }
        // hint + Aᵀ(AAᵀ)⁻¹(b − A·hint) = hint + Q·R⁻ᵀ(b − A·hint)
        let defect = &self.rhs - &self.matrix * hint;
        let y = self
            .factor_r
            .transpose()
            .solve_lower_triangular(&defect)
            .expect("triangular factor is invertible for a full-row-rank constraint");
        hint + &self.basis_q * y
    }
}

/// Symmetric idempotent matrix projecting onto the feasible null space.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: DMatrix<f64>,
}

impl Projector {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }
}
