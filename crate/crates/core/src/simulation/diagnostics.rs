//! Estimators and diagnostics built on top of the replicate engine.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::moments;
use super::{keys_for, run, run_replicates, Mode, SimulationConfig};
use crate::asymptotics::{Moment, Psi, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::functionals::{evaluate_additive, evaluate_root, pullback, TollFunction};
use crate::rng::replicate_rng;
use crate::source::SourceDistribution;
use crate::trees::{build_patricia, build_trie, LazyKeys, DEFAULT_MAX_DEPTH};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Mean of per-replicate contributions `z`, shifted by `offset`.
    fn from_terms(z: &[f64], offset: f64) -> Self {
        let m = moments(z);
        Estimate { value: m.mean + offset, se: m.se_mean }
    }

    /// Whether `target` lies within `k` standard errors.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

/// Empirical Poisson moment functions `f_E(λ)`, `f_V(λ)`, `f_C(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FxEstimate {
    pub lambda: f64,
    pub replicates: usize,
    pub fe: Estimate,
    pub fv: Estimate,
    pub fc: Estimate,
}

/// Estimates `f_E, f_V, f_C` at `λ` from `R` Poisson tries, using the
/// pullback `φ̃` of `toll`:
///
/// - `f_E = E φ̃ - χλe^{-λ}`
/// - `f_V = 2Cov(φ̃, Φ̃) - Var φ̃ + 2χλe^{-λ}(EΦ̃ - Eφ̃) - χ²λe^{-λ}(1 - λe^{-λ})`
/// - `f_C = Cov(φ̃, N_λ) + χλ(λ-1)e^{-λ}`
///
/// Standard errors come from per-replicate contributions around the sample
/// means.
pub fn estimate_fx(
    toll: &TollFunction,
    source: &SourceDistribution,
    lambda: f64,
    replicates: usize,
    seed: u64,
) -> Result<FxEstimate> {
    if !(lambda > 0.0) || replicates < 2 {
        return Err(Error::InvalidArgument("estimate_fx needs λ > 0 and at least two replicates".into()));
    }
    let tilde = pullback(toll)?;
    let chi = toll.chi();
    let draws: Vec<Result<(f64, f64, f64)>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut keys = keys_for(source, Mode::Poisson(lambda), seed, i);
            let trie = build_trie(&mut keys, DEFAULT_MAX_DEPTH)
                .map_err(|e| Error::Replicate { index: i as u64, source: Box::new(e) })?;
            let n = trie.leaf_count() as f64;
            Ok((evaluate_root(&tilde, &trie), evaluate_additive(&tilde, &trie), n))
        })
        .collect();
    let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
    let r = replicates as f64;
    let bessel = r / (r - 1.0);
    let mean = |f: fn(&(f64, f64, f64)) -> f64| draws.iter().map(f).sum::<f64>() / r;
    let (phi_bar, big_bar, n_bar) = (mean(|d| d.0), mean(|d| d.1), mean(|d| d.2));
    let e = lambda * (-lambda).exp();

    let fe_terms: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let fv_terms: Vec<f64> = draws
        .iter()
        .map(|(p, b, _)| {
            let dp = p - phi_bar;
            bessel * (2.0 * dp * (b - big_bar) - dp * dp) + 2.0 * chi * e * (b - p)
        })
        .collect();
    let fc_terms: Vec<f64> = draws.iter().map(|(p, _, n)| bessel * (p - phi_bar) * (n - n_bar)).collect();
    Ok(FxEstimate {
        lambda,
        replicates,
        fe: Estimate::from_terms(&fe_terms, -chi * e),
        fv: Estimate::from_terms(&fv_terms, -chi * chi * e * (1.0 - e)),
        fc: Estimate::from_terms(&fc_terms, chi * lambda * (lambda - 1.0) * (-lambda).exp()),
    })
}

/// The predicted mean density `E Φ / n ≈ ψ_E(log n)/H + χ`, when a closed
/// form is known for `toll` (fringe-size indicators and the leaf indicator).
pub fn density_overlay(
    toll: &TollFunction,
    source: &SourceDistribution,
    fourier_terms: usize,
) -> Result<Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>> {
    if toll.is_leaf_indicator() {
        return Ok(Some(Box::new(|_| 1.0)));
    }
    let Some(k) = toll.fringe_size() else { return Ok(None) };
    if k < 2 {
        return Ok(None);
    }
    let psi = Psi::for_fringe(source, k, Moment::E, fourier_terms, DEFAULT_TOL)?;
    let h = source.entropy();
    let chi = toll.chi();
    Ok(Some(Box::new(move |t| psi.eval(t) / h + chi)))
}

/// `count` points `start · ratio^j`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| start * ratio.powi(j as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub lambda: f64,
    pub log_lambda: f64,
    pub mean_over_lambda: f64,
    pub se: f64,
    pub overlay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationScan {
    pub points: Vec<ScanPoint>,
    /// Weighted least-squares slope of `E Φ/λ` against `log λ`.
    pub slope: f64,
    pub slope_se: f64,
    /// Autocorrelation of the residuals around the weighted mean, lags
    /// `0..=len/2`.
    pub autocorrelation: Vec<f64>,
    /// Grid steps per period `d_p`, when the grid ratio divides it.
    pub period_lag: Option<usize>,
}

fn grid_seed(seed: u64, j: usize) -> u64 {
    seed ^ (j as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Monte Carlo `E Φ(𝒫_λ)/λ` across `lambdas`, with the asymptotic overlay
/// where available.
pub fn oscillation_scan(
    source: &SourceDistribution,
    toll: &TollFunction,
    lambdas: &[f64],
    replicates: usize,
    seed: u64,
    fourier_terms: usize,
) -> Result<OscillationScan> {
    if lambdas.len() < 3 {
        return Err(Error::InvalidArgument("an oscillation scan needs at least three grid points".into()));
    }
    let overlay = density_overlay(toll, source, fourier_terms)?;
    let mut points = Vec::with_capacity(lambdas.len());
    for (j, &lambda) in lambdas.iter().enumerate() {
        let cfg = SimulationConfig::new(source.clone(), Mode::Poisson(lambda))
            .replicates(replicates)
            .seed(grid_seed(seed, j))
            .functionals(vec![toll.clone()]);
        let m = run(&cfg)?.functionals[0].moments;
        points.push(ScanPoint {
            lambda,
            log_lambda: lambda.ln(),
            mean_over_lambda: m.mean / lambda,
            se: m.se_mean / lambda,
            overlay: overlay.as_ref().map(|f| f(lambda.ln())),
        });
    }

    let weights: Vec<f64> = if points.iter().all(|p| p.se > 0.0) {
        points.iter().map(|p| 1.0 / (p.se * p.se)).collect()
    } else {
        vec![1.0; points.len()]
    };
    let sw: f64 = weights.iter().sum();
    let xbar = points.iter().zip(&weights).map(|(p, w)| w * p.log_lambda).sum::<f64>() / sw;
    let ybar = points.iter().zip(&weights).map(|(p, w)| w * p.mean_over_lambda).sum::<f64>() / sw;
    let sxx: f64 = points.iter().zip(&weights).map(|(p, w)| w * (p.log_lambda - xbar).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * (p.log_lambda - xbar) * (p.mean_over_lambda - ybar))
        .sum();
    let slope = sxy / sxx;
    let slope_se = (1.0 / sxx).sqrt();

    let resid: Vec<f64> = points.iter().map(|p| p.mean_over_lambda - ybar).collect();
    let rbar = resid.iter().sum::<f64>() / resid.len() as f64;
    let denom: f64 = resid.iter().map(|r| (r - rbar).powi(2)).sum();
    let autocorrelation = (0..=resid.len() / 2)
        .map(|h| {
            if denom == 0.0 {
                return 0.0;
            }
            (0..resid.len() - h).map(|i| (resid[i] - rbar) * (resid[i + h] - rbar)).sum::<f64>() / denom
        })
        .collect();

    let period = source.periodicity();
    let ratio = lambdas[1] / lambdas[0];
    let period_lag = if period > 0.0 && ratio > 1.0 {
        let steps = period / ratio.ln();
        (steps.round() >= 1.0 && (steps - steps.round()).abs() < 1e-6).then(|| steps.round() as usize)
    } else {
        None
    };
    Ok(OscillationScan { points, slope, slope_se, autocorrelation, period_lag })
}

/// Empirical law of the fringe size of a uniformly chosen node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeDistribution {
    pub sizes: Vec<usize>,
    /// Mean over replicates of `Φ_k / |P|`.
    pub mass: Vec<f64>,
    pub se: Vec<f64>,
    pub overflow: f64,
    /// Largest per-replicate `|Σ_k Φ_k/|P| - 1|`.
    pub max_partition_error: f64,
    /// Replicates with a nonempty tree.
    pub replicates: usize,
}

impl FringeDistribution {
    pub fn mass_at(&self, k: usize) -> Option<(f64, f64)> {
        self.sizes.iter().position(|s| *s == k).map(|i| (self.mass[i], self.se[i]))
    }
}

pub fn fringe_distribution(config: &SimulationConfig) -> Result<FringeDistribution> {
    let outcomes = run_replicates(config)?;
    let buckets = config.histogram_max + 1;
    let mut columns = vec![Vec::with_capacity(outcomes.len()); buckets];
    let mut max_partition_error = 0.0f64;
    for o in outcomes.iter().filter(|o| o.node_count > 0) {
        let total = o.node_count as f64;
        let mut sum = 0.0;
        for (col, c) in columns.iter_mut().zip(&o.histogram) {
            let r = *c as f64 / total;
            sum += r;
            col.push(r);
        }
        max_partition_error = max_partition_error.max((sum - 1.0).abs());
    }
    let stats: Vec<_> = columns.iter().map(|c| moments(c)).collect();
    Ok(FringeDistribution {
        sizes: (1..=config.histogram_max).collect(),
        mass: stats[..config.histogram_max].iter().map(|m| m.mean).collect(),
        se: stats[..config.histogram_max].iter().map(|m| m.se_mean).collect(),
        overflow: stats[config.histogram_max].mean,
        max_partition_error,
        replicates: columns[0].len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SllnPoint {
    pub n: usize,
    pub ratio: f64,
    /// `Φ(P_n)/n - ψ_E(log n)/H - χ`, when a closed-form overlay exists.
    pub deviation: Option<f64>,
}

/// Follows `Φ(P_n)/n` along one sequence of nested key sets: every `n`
/// reuses the keys of the smaller ones. `stream` selects the key sequence.
pub fn slln_track(
    source: &SourceDistribution,
    toll: &TollFunction,
    n_grid: &[usize],
    seed: u64,
    stream: u64,
) -> Result<Vec<SllnPoint>> {
    if n_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("the key-count grid must be nondecreasing".into()));
    }
    let overlay = density_overlay(toll, source, crate::asymptotics::DEFAULT_FOURIER_TERMS)?;
    let mut keys = LazyKeys::new(source.clone(), 0, replicate_rng(seed, stream));
    let mut out = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        keys.grow_to(n);
        let p = build_patricia(&mut keys, DEFAULT_MAX_DEPTH)?;
        let ratio = if n == 0 { 0.0 } else { evaluate_additive(toll, &p) / n as f64 };
        let deviation = overlay.as_ref().filter(|_| n > 0).map(|f| ratio - f((n as f64).ln()));
        out.push(SllnPoint { n, ratio, deviation });
    }
    Ok(out)
}
