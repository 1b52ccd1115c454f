//! Least-squares helpers for convergence and exponent fits.

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// Slope of the ordinary least-squares line through `(x, y)`.
pub fn ls_slope<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(LabError::InsufficientData(format!("need at least two paired samples, got {} and {}", x.len(), y.len())));
    }
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    if sxx <= T::zero() {
        return Err(LabError::InsufficientData("abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of `ln y` against `ln x`. Every entry must be positive.
pub fn log_log_slope<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.iter().chain(y).any(|&v| !(v > T::zero() && v.is_finite())) {
        return Err(LabError::InsufficientData("log-log fit needs positive finite samples".into()));
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    ls_slope(&lx, &ly)
}
