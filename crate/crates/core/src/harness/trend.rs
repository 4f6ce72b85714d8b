//! Least-squares fit of `y = a * ln(x) + b`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrendError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("sizes must be at least 1")]
    NonPositiveSize,
    #[error("all sizes are equal")]
    DegenerateData,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    /// The observations have zero variance; `r_squared` is reported as 0.
    pub zero_variance: bool,
}

impl TrendFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.a * x.ln() + self.b
    }
}

pub fn fit_log_trend(points: &[(f64, f64)]) -> Result<TrendFit, TrendError> {
    if points.len() < 3 {
        return Err(TrendError::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(x, _)| x.is_nan() || x < 1.0) {
        return Err(TrendError::NonPositiveSize);
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(TrendError::DegenerateData);
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let a = sxy / sxx;
    let b = mean_y - a * mean_x;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(TrendFit {
            a,
            b,
            r_squared: 0.0,
            zero_variance: true,
        });
    }
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (a * x + b)).powi(2))
        .sum();
    let r_squared = (1.0 - ss_res / ss_tot).clamp(0.0, 1.0);
    Ok(TrendFit {
        a,
        b,
        r_squared,
        zero_variance: false,
    })
}
