use std::f64::consts::{PI, TAU};

use super::SpectralError;

/// Winding number of a closed loop in ℝ² \ {0} sampled at uniform times
/// (the last sample connects back to the first).
pub fn winding_number(samples: &[[f64; 2]]) -> Result<i64, SpectralError> {
    if samples.len() < 3 {
        return Err(SpectralError::Undersampled);
    }
    let scale = samples
        .iter()
        .map(|v| v[0].hypot(v[1]))
        .fold(0.0f64, f64::max);
    if samples.iter().any(|v| v[0].hypot(v[1]) <= 1e-12 * scale.max(1e-300)) || scale == 0.0 {
        return Err(SpectralError::VanishingLoop);
    }
    let mut total = 0.0;
    let n = samples.len();
    for i in 0..n {
        let a = samples[i];
        let b = samples[(i + 1) % n];
        let step = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        if step.abs() > PI - 1e-3 {
            return Err(SpectralError::Undersampled);
        }
        total += step;
    }
    let w = total / TAU;
    let r = w.round();
    if (w - r).abs() > 1e-6 {
        return Err(SpectralError::Undersampled);
    }
    Ok(r as i64)
}
