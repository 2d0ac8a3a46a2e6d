use super::PipelineError;

/// Horizontal-error statistics of an estimated track against truth.
#[derive(Debug, Clone)]
pub struct ErrorSummary {
    pub per_frame_m: Vec<f64>,
    pub max_m: f64,
    pub mean_m: f64,
    pub final_m: f64,
    /// Final error scaled to one hour of flight.
    pub drift_m_per_hour: f64,
}

/// Per-frame horizontal Euclidean error plus summary statistics.
pub fn error_metrics(
    estimated: &[(f64, f64)],
    truth: &[(f64, f64)],
    duration_s: f64,
) -> Result<ErrorSummary, PipelineError> {
    if estimated.len() != truth.len() {
        return Err(PipelineError::LengthMismatch {
            estimates: estimated.len(),
            truth: truth.len(),
        });
    }
    let per_frame_m: Vec<f64> = estimated
        .iter()
        .zip(truth)
        .map(|(e, t)| ((e.0 - t.0).powi(2) + (e.1 - t.1).powi(2)).sqrt())
        .collect();
    let max_m = per_frame_m.iter().cloned().fold(0.0, f64::max);
    let mean_m = if per_frame_m.is_empty() {
        0.0
    } else {
        per_frame_m.iter().sum::<f64>() / per_frame_m.len() as f64
    };
    let final_m = per_frame_m.last().cloned().unwrap_or(0.0);
    let drift_m_per_hour = if duration_s > 0.0 {
        final_m * 3600.0 / duration_s
    } else {
        0.0
    };
    Ok(ErrorSummary {
        per_frame_m,
        max_m,
        mean_m,
        final_m,
        drift_m_per_hour,
    })
}
