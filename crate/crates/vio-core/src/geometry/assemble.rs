use nalgebra::{DMatrix, DVector};

use super::camera::{CameraIntrinsics, FrameRole, PixelObservation};
use super::layout::{StateLayout, POSITION_X, POSITION_Y};
use super::GeometryError;

/// Inputs of one localization step: the two known frame positions, the
/// altimeter height differences and inertial distances from each of them to
/// the frame being localized, and the matched pixel observations across the
/// three frames.
#[derive(Debug, Clone)]
pub struct LocalizationProblem {
    /// Horizontal position of the frame two steps back.
    pub prev_prev_pos: (f64, f64),
    /// Horizontal position of the previous frame.
    pub prev_pos: (f64, f64),
    /// Altimeter delta from the frame two steps back to the next frame.
    pub delta_h_from_prev_prev: f64,
    /// Altimeter delta from the previous frame to the next frame.
    pub delta_h_from_prev: f64,
    /// Inertial distance from the frame two steps back to the next frame.
    pub dist_from_prev_prev: f64,
    /// Inertial distance from the previous frame to the next frame.
    pub dist_from_prev: f64,
    pub intrinsics: CameraIntrinsics,
    pub observations: Vec<PixelObservation>,
}

impl LocalizationProblem {
    /// Altimeter height of frame `to` relative to frame `from`, positive
    /// when `to` is higher.
    pub fn delta_h(&self, from: FrameRole, to: FrameRole) -> f64 {
        fn height_to_next(problem: &LocalizationProblem, role: FrameRole) -> f64 {
            match role {
                FrameRole::PrevPrev => problem.delta_h_from_prev_prev,
                FrameRole::Prev => problem.delta_h_from_prev,
                FrameRole::Next => 0.0,
            }
        }
        height_to_next(self, from) - height_to_next(self, to)
    }

    /// Known horizontal position of a previous frame.
    fn position(&self, role: FrameRole) -> (f64, f64) {
        match role {
            FrameRole::PrevPrev => self.prev_prev_pos,
            FrameRole::Prev => self.prev_pos,
            FrameRole::Next => unreachable!("next frame position is the unknown"),
        }
    }

    /// Layout over the observed landmarks, ids ascending.
    pub fn layout(&self) -> StateLayout {
        let mut ids: Vec<u64> = self.observations.iter().map(|o| o.landmark_id).collect();
        ids.sort_unstable();
        ids.dedup();
        StateLayout::new(ids)
    }
}

/// Raw stacked constraint rows before rank reduction.
#[derive(Debug, Clone)]
pub struct AssembledConstraint {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Euclidean norm of each raw row; the scaling applied by equilibration.
    pub row_norms: Vec<f64>,
}

impl AssembledConstraint {
    /// Rows scaled to unit Euclidean norm, with the same scaling applied to
    /// the right-hand side. Equilibration keeps numerical-rank decisions
    /// unit-independent and does not change the solution set.
    pub fn equilibrated(&self) -> (DMatrix<f64>, DVector<f64>) {
        let mut matrix = self.matrix.clone();
        let mut rhs = self.rhs.clone();
        for (i, &norm) in self.row_norms.iter().enumerate() {
            if norm > 0.0 {
                matrix.row_mut(i).scale_mut(1.0 / norm);
                rhs[i] /= norm;
            }
        }
        (matrix, rhs)
    }
}

/// Stacks the observation rows of every landmark over the three frames.
///
/// A landmark observed at pixel `(x_p, y_p)` in a frame with known position
/// `(x_j, y_j)` contributes
///
/// ```text
///   x_l + (x_p/f)·h = x_j − (x_p/f)·δh(base → j)
/// ```
///
/// and the `y` analogue, where `h` is the landmark's height unknown at its
/// base frame. In the frame being localized the unknown position enters
/// instead:
///
/// ```text
///   x_next − x_l − (x_p/f)·h = (x_p/f)·δh(base → next)
/// ```
///
/// Row order: landmarks in layout order, frames in
/// (prev-prev, prev, next) order, `x` before `y`.
pub fn assemble_rows(
    problem: &LocalizationProblem,
    layout: &StateLayout,
) -> Result<AssembledConstraint, GeometryError> {
    for obs in &problem.observations {
        if layout.slot_of(obs.landmark_id).is_none() {
            return Err(GeometryError::UnknownLandmarkId {
                id: obs.landmark_id,
            });
        }
    }

    let n = layout.dim();
    let f = problem.intrinsics.focal_px();
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();

    for (slot, &id) in layout.landmark_ids().iter().enumerate() {
        let of_landmark = |role: FrameRole| {
            problem
                .observations
                .iter()
                .find(|o| o.landmark_id == id && o.frame == role)
        };
        let prev_prev = of_landmark(FrameRole::PrevPrev);
        let prev = of_landmark(FrameRole::Prev);
        let next = of_landmark(FrameRole::Next).ok_or(
            GeometryError::MissingFramePlusOneObservation { id },
        )?;
        let base = if prev_prev.is_some() {
            FrameRole::PrevPrev
        } else if prev.is_some() {
            FrameRole::Prev
        } else {
            return Err(GeometryError::MissingPriorObservation { id });
        };

        let col_lx = layout.landmark_x(slot);
        let col_ly = layout.landmark_y(slot);
        let col_h = layout.landmark_height(slot);

        for obs in [prev_prev, prev].into_iter().flatten() {
            let (x_j, y_j) = problem.position(obs.frame);
            let dh = problem.delta_h(base, obs.frame);
            rows.push((
                vec![(col_lx, 1.0), (col_h, obs.x_px / f)],
                x_j - (obs.x_px / f) * dh,
            ));
            rows.push((
                vec![(col_ly, 1.0), (col_h, obs.y_px / f)],
                y_j - (obs.y_px / f) * dh,
            ));
        }

        let dh_next = problem.delta_h(base, FrameRole::Next);
        rows.push((
            vec![(POSITION_X, 1.0), (col_lx, -1.0), (col_h, -next.x_px / f)],
            (next.x_px / f) * dh_next,
        ));
        rows.push((
            vec![(POSITION_Y, 1.0), (col_ly, -1.0), (col_h, -next.y_px / f)],
            (next.y_px / f) * dh_next,
        ));
    }

    let m = rows.len();
    let mut matrix = DMatrix::zeros(m, n);
    let mut rhs = DVector::zeros(m);
    for (i, (coeffs, b)) in rows.into_iter().enumerate() {
        for (col, value) in coeffs {
            matrix[(i, col)] = value;
        }
        rhs[i] = b;
    }
    let row_norms = (0..m).map(|i| matrix.row(i).norm()).collect();
    Ok(AssembledConstraint {
        matrix,
        rhs,
        row_norms,
    })
}

/// Smallest singular value of the row-equilibrated raw system.
///
/// Near zero exactly when the stacked rays cannot pin the landmark heights —
/// the level-flight degeneracy. Invariant under a common rescaling of pixels
/// and focal length, since only the ratios `x_p/f` enter the rows.
pub fn singularity_indicator(raw: &AssembledConstraint) -> f64 {
    let (matrix, _) = raw.equilibrated();
    let sv = matrix.svd(false, false).singular_values;
    sv[sv.len() - 1]
}
