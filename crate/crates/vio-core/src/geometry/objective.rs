use nalgebra::{DMatrix, DVector};

use super::assemble::LocalizationProblem;
use super::layout::{StateLayout, POSITION_X, POSITION_Y};
use crate::solver::SmoothObjective;

/// Squared-range consistency objective.
///
/// For each of the two previous frames the inertial distance `d` and the
/// altimeter delta `δh` fix the expected squared *horizontal* range
/// `d² − δh²` to the frame being localized; the objective penalizes the
/// squared mismatch:
///
/// ```text
///   f(s) = Σ_j ( (x − x_j)² + (y − y_j)² − (d_j² − δh_j²) )²
/// ```
///
/// It depends on the state only through the position block, so gradient and
/// Hessian are zero outside the first two entries.
#[derive(Debug, Clone)]
pub struct InsRangeObjective {
    dim: usize,
    anchors: [RangeAnchor; 2],
    clamped_negative_range: bool,
}

#[derive(Debug, Clone, Copy)]
struct RangeAnchor {
    center: (f64, f64),
    range_sq: f64,
}

impl InsRangeObjective {
    /// Builds the objective from explicit anchors `(x_j, y_j, range²_j)`.
    /// Negative squared ranges — a sensor contradiction possible when
    /// altimeter noise exceeds a tiny true baseline — are clamped to zero
    /// and flagged.
    pub fn from_anchors(dim: usize, anchors: [((f64, f64), f64); 2]) -> Self {
        assert!(dim >= 2);
        let clamped = anchors.iter().any(|&(_, r)| r < 0.0);
        Self {
            dim,
            anchors: anchors.map(|(center, range_sq)| RangeAnchor {
                center,
                range_sq: range_sq.max(0.0),
            }),
            clamped_negative_range: clamped,
        }
    }

    /// True when a `d² − δh²` target was negative and clamped to zero.
    pub fn clamped_negative_range(&self) -> bool {
        self.clamped_negative_range
    }

    fn mismatches(&self, s: &DVector<f64>) -> [f64; 2] {
        let (x, y) = (s[POSITION_X], s[POSITION_Y]);
        self.anchors.map(|a| {
            (x - a.center.0).powi(2) + (y - a.center.1).powi(2) - a.range_sq
        })
    }
}

impl SmoothObjective for InsRangeObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, s: &DVector<f64>) -> f64 {
        self.mismatches(s).iter().map(|t| t * t).sum()
    }

    fn gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        let (x, y) = (s[POSITION_X], s[POSITION_Y]);
        let t = self.mismatches(s);
        let mut g = DVector::zeros(self.dim);
        for (anchor, t_j) in self.anchors.iter().zip(t) {
            g[POSITION_X] += 4.0 * t_j * (x - anchor.center.0);
            g[POSITION_Y] += 4.0 * t_j * (y - anchor.center.1);
        }
        g
    }

    fn hessian(&self, s: &DVector<f64>) -> DMatrix<f64> {
        let (x, y) = (s[POSITION_X], s[POSITION_Y]);
        let t = self.mismatches(s);
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (anchor, t_j) in self.anchors.iter().zip(t) {
            let dx = x - anchor.center.0;
            let dy = y - anchor.center.1;
            h[(POSITION_X, POSITION_X)] += 4.0 * t_j + 8.0 * dx * dx;
            h[(POSITION_Y, POSITION_Y)] += 4.0 * t_j + 8.0 * dy * dy;
            h[(POSITION_X, POSITION_Y)] += 8.0 * dx * dy;
        }
        h[(POSITION_Y, POSITION_X)] = h[(POSITION_X, POSITION_Y)];
        h
    }
}

/// Objective for one localization step, anchored at the two previous frame
/// positions with INS/altimeter-derived squared ranges.
pub fn build_objective(problem: &LocalizationProblem, layout: &StateLayout) -> InsRangeObjective {
    InsRangeObjective::from_anchors(
        layout.dim(),
        [
            (
                problem.prev_pos,
                problem.dist_from_prev.powi(2) - problem.delta_h_from_prev.powi(2),
            ),
            (
                problem.prev_prev_pos,
                problem.dist_from_prev_prev.powi(2) - problem.delta_h_from_prev_prev.powi(2),
            ),
        ],
    )
}
