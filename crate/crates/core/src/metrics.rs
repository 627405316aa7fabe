//! Error metric and confidence intervals for the regression protocol.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// `‖predicted − truth‖_F / ‖truth‖_F × 100`.
pub fn relative_error(predicted: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    if predicted.shape() != truth.shape() {
        return Err(invalid("relative error: shape mismatch"));
    }
    let denom = truth.norm();
    if !(denom > 0.0) {
        return Err(invalid("relative error: ground truth has zero norm"));
    }
    Ok((predicted - truth).norm() / denom * 100.0)
}

/// Mean and 95% half-width `1.96·s/√n` (sample standard deviation); the
/// half-width is 0 for a single sample.
pub fn confidence_interval(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(invalid("confidence interval of an empty sample"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, 1.96 * libm::sqrt(var) / libm::sqrt(n)))
}
