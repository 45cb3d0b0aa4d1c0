//! Weighted least squares on log-log points.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    /// Two-sided 95% interval from the t distribution.
    pub ci: [f64; 2],
    pub points: usize,
}

impl SlopeFit {
    pub fn ci_excludes_zero(&self) -> bool {
        self.ci[0] > 0.0 || self.ci[1] < 0.0
    }

    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol
    }
}

/// Fit `y = a + b x` with weights `w`; the residual variance is estimated
/// from the fit when there are more than two points.
pub fn weighted_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<SlopeFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - xm).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - xm) * (y[i] - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let (std_error, t) = if n > 2 {
        let rss: f64 = (0..n).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
        let s2 = rss / (n - 2) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64).ok()?.inverse_cdf(0.975);
        ((s2 / sxx).sqrt(), t)
    } else {
        ((1.0 / sxx).sqrt(), 1.959_963_984_540_054)
    };
    Some(SlopeFit {
        slope,
        intercept,
        std_error,
        ci: [slope - t * std_error, slope + t * std_error],
        points: n,
    })
}

/// Fit `log value` against `log n`, weighting each point by the inverse of
/// the delta-method variance `(se / value)^2`. Points with a non-positive
/// value are dropped.
pub fn loglog_fit(ns: &[f64], values: &[f64], std_errors: &[f64]) -> Option<SlopeFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for i in 0..ns.len() {
        if values[i] > 0.0 {
            x.push(ns[i].ln());
            y.push(values[i].ln());
            let rel = std_errors[i] / values[i];
            w.push(if rel > 0.0 { 1.0 / (rel * rel) } else { 1e12 });
        }
    }
    weighted_fit(&x, &y, &w)
}
