use super::rank::{average_ranks, check_finite};
use super::StatsError;

pub(crate) fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewPoints { n: x.len(), min: 3 });
    }
    check_finite(x)?;
    check_finite(y)
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|v| *v == values[0])
}

/// Centered copy of `values` and its sum of squares.
pub(crate) fn centered(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss = dev.iter().map(|d| d * d).sum();
    (dev, ss)
}

pub(crate) fn from_centered(dx: &[f64], sxx: f64, dy: &[f64], syy: f64) -> f64 {
    let sxy: f64 = dx.iter().zip(dy).map(|(a, b)| a * b).sum();
    let mut norm = (sxx * syy).sqrt();
    if !norm.is_normal() {
        norm = sxx.sqrt() * syy.sqrt();
    }
    (sxy / norm).clamp(-1.0, 1.0)
}

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::DegenerateVariance);
    }
    let (dx, sxx) = centered(x);
    let (dy, syy) = centered(y);
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok(from_centered(&dx, sxx, &dy, syy))
}

/// Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    pearson(
        average_ranks(x)?.as_slice(),
        average_ranks(y)?.as_slice(),
    )
}
