//! Seeded Monte Carlo over random patricia tries.
//!
//! Replicate `i` draws everything from [`replicate_rng`]`(seed, i)`, and
//! replicate results are reduced in index order, so a summary depends only on
//! the configuration, never on scheduling or thread count.

mod diagnostics;
mod stats;

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

pub use diagnostics::{
    density_overlay, estimate_fx, fringe_distribution, geometric_grid, oscillation_scan, slln_track, Estimate,
    FringeDistribution, FxEstimate, OscillationScan, ScanPoint, SllnPoint,
};
pub use stats::{
    covariance, moments, normality_diagnostics, Moments, NormalityReport, NormalityThresholds,
    MIN_NORMALITY_SAMPLES,
};

use crate::error::{Error, Result};
use crate::functionals::{evaluate_with_stats, NodeStats, TollFunction};
use crate::rng::{replicate_rng, ReplicateRng};
use crate::source::SourceDistribution;
use crate::trees::{build_patricia, build_trie, LazyKeys, DEFAULT_MAX_DEPTH};

/// Default largest fringe size with its own histogram bucket.
pub const DEFAULT_HISTOGRAM_MAX: usize = 64;

/// How many keys a replicate uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exactly `n` keys.
    Fixed(usize),
    /// A `Poisson(λ)` number of keys.
    Poisson(f64),
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub source: SourceDistribution,
    pub mode: Mode,
    pub replicates: usize,
    pub master_seed: u64,
    pub functionals: Vec<TollFunction>,
    pub max_depth: usize,
    /// Also build the trie of the same keys and evaluate every functional on
    /// it directly.
    pub paired_trie: bool,
    pub histogram_max: usize,
}

impl SimulationConfig {
    pub fn new(source: SourceDistribution, mode: Mode) -> Self {
        Self {
            source,
            mode,
            replicates: 100,
            master_seed: 0,
            functionals: Vec::new(),
            max_depth: DEFAULT_MAX_DEPTH,
            paired_trie: false,
            histogram_max: DEFAULT_HISTOGRAM_MAX,
        }
    }

    pub fn replicates(mut self, r: usize) -> Self {
        self.replicates = r;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn functionals(mut self, tolls: Vec<TollFunction>) -> Self {
        self.functionals = tolls;
        self
    }

    pub fn paired_trie(mut self, on: bool) -> Self {
        self.paired_trie = on;
        self
    }

    pub fn max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("at least one replicate is required".into()));
        }
        if let Mode::Poisson(l) = self.mode {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!("Poisson mean must be finite and nonnegative, got {l}")));
            }
        }
        if self.histogram_max == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bucket".into()));
        }
        Ok(())
    }

    /// Column names of [`ReplicateOutcome::values`].
    pub fn value_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.functionals.iter().map(|t| t.name().to_string()).collect();
        if self.paired_trie {
            names.extend(self.functionals.iter().map(|t| format!("trie:{}", t.name())));
        }
        names
    }
}

/// Everything recorded about one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub key_count: usize,
    pub node_count: usize,
    /// Functional values on the patricia trie, followed (for paired runs) by
    /// the same functionals on the trie.
    pub values: Vec<f64>,
    /// `histogram[k-1]` counts nodes whose fringe subtree has `k` leaves;
    /// the last entry collects every larger size.
    pub histogram: Vec<u32>,
}

fn draw_key_count(mode: Mode, rng: &mut ReplicateRng) -> usize {
    match mode {
        Mode::Fixed(n) => n,
        Mode::Poisson(l) if l > 0.0 => Poisson::new(l).expect("validated mean").sample(rng) as usize,
        Mode::Poisson(_) => 0,
    }
}

/// Runs replicate `index` of `config`.
pub fn replicate(config: &SimulationConfig, index: usize) -> Result<ReplicateOutcome> {
    let wrap = |e: Error| Error::Replicate { index: index as u64, source: Box::new(e) };
    let mut rng = replicate_rng(config.master_seed, index as u64);
    let count = draw_key_count(config.mode, &mut rng);
    let mut keys = LazyKeys::new(config.source.clone(), count, rng);
    let patricia = build_patricia(&mut keys, config.max_depth).map_err(wrap)?;
    let stats = NodeStats::compute(&patricia);
    let mut values = evaluate_with_stats(&config.functionals, &patricia, &stats).0;

    let mut histogram = vec![0u32; config.histogram_max + 1];
    for v in 0..patricia.node_count() {
        let k = stats.leaves(v) as usize;
        histogram[k.min(config.histogram_max + 1) - 1] += 1;
    }

    if config.paired_trie {
        let trie = build_trie(&mut keys, config.max_depth).map_err(wrap)?;
        let trie_stats = NodeStats::compute(&trie);
        values.extend(evaluate_with_stats(&config.functionals, &trie, &trie_stats).0);
    }
    Ok(ReplicateOutcome { key_count: count, node_count: patricia.node_count(), values, histogram })
}

/// All replicates in index order. The first failing replicate (by index) is
/// reported.
pub fn run_replicates(config: &SimulationConfig) -> Result<Vec<ReplicateOutcome>> {
    config.validate()?;
    let results: Vec<Result<ReplicateOutcome>> =
        (0..config.replicates).into_par_iter().map(|i| replicate(config, i)).collect();
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalSummary {
    pub name: String,
    #[serde(flatten)]
    pub moments: Moments,
}

/// Mean fringe-size counts per replicate: `mean[k-1]` for `k ≤ max`,
/// everything larger in `overflow`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub sizes: Vec<usize>,
    pub mean: Vec<f64>,
    pub overflow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub mode: Mode,
    pub replicates: usize,
    pub master_seed: u64,
    pub key_count: Moments,
    pub node_count: Moments,
    pub functionals: Vec<FunctionalSummary>,
    pub histogram: Histogram,
}

impl SimulationSummary {
    pub fn functional(&self, name: &str) -> Option<&Moments> {
        self.functionals.iter().find(|f| f.name == name).map(|f| &f.moments)
    }
}

/// Runs every replicate and summarizes.
pub fn run(config: &SimulationConfig) -> Result<SimulationSummary> {
    let outcomes = run_replicates(config)?;
    Ok(summarize(config, &outcomes))
}

pub fn summarize(config: &SimulationConfig, outcomes: &[ReplicateOutcome]) -> SimulationSummary {
    let column = |f: &dyn Fn(&ReplicateOutcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
    let functionals = config
        .value_names()
        .into_iter()
        .enumerate()
        .map(|(i, name)| FunctionalSummary { name, moments: moments(&column(&|o| o.values[i])) })
        .collect();
    let r = outcomes.len().max(1) as f64;
    let buckets = config.histogram_max + 1;
    let mut totals = vec![0u64; buckets];
    for o in outcomes {
        for (t, c) in totals.iter_mut().zip(&o.histogram) {
            *t += *c as u64;
        }
    }
    let mut mean: Vec<f64> = totals.iter().map(|t| *t as f64 / r).collect();
    let overflow = mean.pop().unwrap_or(0.0);
    SimulationSummary {
        mode: config.mode,
        replicates: outcomes.len(),
        master_seed: config.master_seed,
        key_count: moments(&column(&|o| o.key_count as f64)),
        node_count: moments(&column(&|o| o.node_count as f64)),
        functionals,
        histogram: Histogram { sizes: (1..=config.histogram_max).collect(), mean, overflow },
    }
}

/// A replicate's generator after drawing its key count, for callers that
/// build their own trees from the same streams.
pub(crate) fn keys_for(source: &SourceDistribution, mode: Mode, seed: u64, index: usize) -> LazyKeys<ReplicateRng> {
    let mut rng = replicate_rng(seed, index as u64);
    let count = draw_key_count(mode, &mut rng);
    LazyKeys::new(source.clone(), count, rng)
}
