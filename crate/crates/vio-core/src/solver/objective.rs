use nalgebra::{DMatrix, DVector};

/// Twice continuously differentiable objective with analytic derivatives.
///
/// Implementations must keep the Hessian symmetric (to 1e-12 relative) and
/// the gradient consistent with central finite differences of `value`; the
/// test suites probe both.
pub trait SmoothObjective {
    /// Dimension of the decision vector.
    fn dim(&self) -> usize;

    fn value(&self, s: &DVector<f64>) -> f64;

    fn gradient(&self, s: &DVector<f64>) -> DVector<f64>;

    fn hessian(&self, s: &DVector<f64>) -> DMatrix<f64>;
}

/// Quadratic objective `f(s) = ½ sᵀQs + cᵀs`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    quad: DMatrix<f64>,
    linear: DVector<f64>,
}

impl QuadraticObjective {
    /// Builds the objective, symmetrizing `quad` so the Hessian contract
    /// holds even when the caller passes a slightly asymmetric matrix.
    pub fn new(quad: DMatrix<f64>, linear: DVector<f64>) -> Self {
        assert_eq!(quad.nrows(), quad.ncols(), "quadratic term must be square");
        assert_eq!(quad.nrows(), linear.len(), "dimension mismatch");
        let quad = 0.5 * (&quad + quad.transpose());
        Self { quad, linear }
    }

    pub fn quad(&self) -> &DMatrix<f64> {
        &self.quad
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }
}

impl SmoothObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, s: &DVector<f64>) -> f64 {
        0.5 * (&self.quad * s).dot(s) + self.linear.dot(s)
    }

    fn gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.quad * s + &self.linear
    }

    fn hessian(&self, _s: &DVector<f64>) -> DMatrix<f64> {
        self.quad.clone()
    }
}
