//! Sample moments and normality diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sample statistics of one replicate series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single sample.
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
    /// Standardized third central moment; `None` when the variance is zero.
    pub skew: Option<f64>,
    /// Standardized fourth central moment minus 3.
    pub exkurt: Option<f64>,
}

/// Summation runs in slice order, so equal inputs give equal bits.
pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    if n == 0 {
        return Moments { count: 0, mean: 0.0, var: 0.0, se_mean: 0.0, se_var: 0.0, skew: None, exkurt: None };
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let var = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
    let (skew, exkurt) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Moments {
        count: n,
        mean,
        var,
        se_mean: (var / nf).sqrt(),
        se_var: ((m4 - var * var).max(0.0) / nf).sqrt(),
        skew,
        exkurt,
    }
}

/// Sample covariance with divisor `n - 1`.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n as f64 - 1.0)
}

/// Flag levels for [`normality_diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityThresholds {
    pub skew: f64,
    pub exkurt: f64,
}

impl Default for NormalityThresholds {
    fn default() -> Self {
        Self { skew: 0.1, exkurt: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityReport {
    pub samples: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Jackknife standard errors.
    pub skew_se: f64,
    pub exkurt_se: f64,
    pub skew_flag: bool,
    pub kurtosis_flag: bool,
}

/// Minimum sample size accepted by [`normality_diagnostics`].
pub const MIN_NORMALITY_SAMPLES: usize = 100;

fn shape_moments(n: f64, s1: f64, s2: f64, s3: f64, s4: f64) -> Option<(f64, f64)> {
    let m = s1 / n;
    let (e2, e3, e4) = (s2 / n, s3 / n, s4 / n);
    let c2 = e2 - m * m;
    if !(c2 > 0.0) {
        return None;
    }
    let c3 = e3 - 3.0 * m * e2 + 2.0 * m * m * m;
    let c4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m.powi(4);
    Some((c3 / c2.powf(1.5), c4 / (c2 * c2) - 3.0))
}

/// Skewness and excess kurtosis with leave-one-out jackknife errors.
pub fn normality_diagnostics(samples: &[f64], thresholds: NormalityThresholds) -> Result<NormalityReport> {
    let n = samples.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "normality diagnostics need at least {MIN_NORMALITY_SAMPLES} samples, got {n}"
        )));
    }
    let nf = n as f64;
    let center = samples.iter().sum::<f64>() / nf;
    let ys: Vec<f64> = samples.iter().map(|x| x - center).collect();
    let mut s = [0.0f64; 4];
    for y in &ys {
        s[0] += y;
        s[1] += y * y;
        s[2] += y * y * y;
        s[3] += y * y * y * y;
    }
    let (skewness, excess_kurtosis) =
        shape_moments(nf, s[0], s[1], s[2], s[3]).ok_or(Error::DegenerateVariance)?;
    let mut loo = Vec::with_capacity(n);
    for y in &ys {
        let (y2, y3, y4) = (y * y, y * y * y, y * y * y * y);
        loo.push(
            shape_moments(nf - 1.0, s[0] - y, s[1] - y2, s[2] - y3, s[3] - y4)
                .ok_or(Error::DegenerateVariance)?,
        );
    }
    let jack = |pick: fn(&(f64, f64)) -> f64| {
        let bar = loo.iter().map(pick).sum::<f64>() / nf;
        ((nf - 1.0) / nf * loo.iter().map(|v| (pick(v) - bar).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(NormalityReport {
        samples: n,
        skewness,
        excess_kurtosis,
        skew_se: jack(|v| v.0),
        exkurt_se: jack(|v| v.1),
        skew_flag: skewness.abs() > thresholds.skew,
        kurtosis_flag: excess_kurtosis.abs() > thresholds.exkurt,
    })
}
