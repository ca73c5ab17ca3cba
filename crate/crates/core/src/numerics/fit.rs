use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through (log x, log y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Indices of the input points used in the fit.
    pub used: Vec<usize>,
    /// Indices dropped because x or y was not strictly positive and finite.
    pub excluded: Vec<usize>,
}

pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(Error::param("fit inputs differ in length"));
    }
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for (i, (a, b)) in x.iter().zip(y).enumerate() {
        if *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite() {
            used.push(i);
        } else {
            excluded.push(i);
        }
    }
    if used.len() < 2 {
        return Err(Error::param("need at least two positive points to fit"));
    }
    let lx: Vec<f64> = used.iter().map(|&i| x[i].ln()).collect();
    let ly: Vec<f64> = used.iter().map(|&i| y[i].ln()).collect();
    let (slope, intercept, r2) = linear_fit(&lx, &ly);
    Ok(LogLogFit {
        exponent: slope,
        intercept,
        r_squared: r2,
        used,
        excluded,
    })
}

/// Returns (slope, intercept, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        1.0 - (syy - slope * sxy) / syy
    } else {
        1.0
    };
    (slope, intercept, r2)
}
