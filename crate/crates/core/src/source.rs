//! Memoryless sources over a finite alphabet and their scalar invariants.
//!
//! Characters are represented as `u8` symbols `0..m`. A string's probability
//! is the product of its character probabilities.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported alphabet; symbols must fit a `u8`.
pub const MAX_ALPHABET: usize = 255;

const SUM_TOLERANCE: f64 = 1e-12;

/// A memoryless (i.i.d.) source: an alphabet `0..m` with point masses `p_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SourceDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    uniform: bool,
}

impl SourceDistribution {
    /// Validates `probs`: at least two symbols, each strictly inside `(0,1)`,
    /// summing to one within `1e-12`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidSource(format!(
                "alphabet size must be at least 2, got {}",
                probs.len()
            )));
        }
        if probs.len() > MAX_ALPHABET {
            return Err(Error::InvalidSource(format!(
                "alphabet size {} exceeds {MAX_ALPHABET}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidSource(format!(
                "every probability must lie strictly inside (0,1), got {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidSource(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let uniform = probs.iter().all(|p| *p == probs[0]);
        Ok(Self {
            probs,
            cumulative,
            uniform,
        })
    }

    /// The uniform source on `m` symbols.
    pub fn uniform(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidSource(format!(
                "alphabet size must be at least 2, got {m}"
            )));
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: u8) -> f64 {
        self.probs[symbol as usize]
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Probability of a finite string, the product of its character masses.
    pub fn string_prob(&self, s: &[u8]) -> f64 {
        s.iter().map(|&c| self.prob(c)).product()
    }

    /// Shannon entropy `H = Σ p_a log(1/p_a)` in nats.
    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|p| -p * p.ln()).sum()
    }

    /// `J = Σ (1-p_a) log(1/(1-p_a))`; equals the entropy for binary alphabets.
    pub fn coentropy(&self) -> f64 {
        if self.probs.len() == 2 {
            return self.entropy();
        }
        self.probs
            .iter()
            .map(|p| {
                let q = 1.0 - p;
                -q * q.ln()
            })
            .sum()
    }

    /// `ρ(s) = Σ p_a^s` for complex `s`.
    pub fn rho(&self, s: Complex64) -> Complex64 {
        self.probs.iter().map(|p| (s * p.ln()).exp()).sum()
    }

    /// `ρ(s)` for real `s`. For integer `k`, the probability that `k`
    /// independent strings start with the same character.
    pub fn rho_real(&self, s: f64) -> f64 {
        self.probs.iter().map(|p| p.powf(s)).sum()
    }

    /// `ρ(k)` for integer `k`, using repeated multiplication.
    pub fn rho_int(&self, k: u32) -> f64 {
        self.probs.iter().map(|p| p.powi(k as i32)).sum()
    }

    /// Period `d_p` of the additive group generated by `{log p_a}` with the
    /// default detection settings; `0` when the group is dense.
    pub fn periodicity(&self) -> f64 {
        self.periodicity_with(&PeriodicityOptions::default())
    }

    /// Period detection with explicit settings.
    ///
    /// Every ratio `log p_a / log p_max` is expanded as a continued fraction.
    /// A ratio counts as rational once a convergent `h/k` is within
    /// `tolerance` and `k` does not exceed `tolerance^(-1/3)`. When all ratios
    /// are rational the group is a lattice and its generator is returned.
    pub fn periodicity_with(&self, opts: &PeriodicityOptions) -> f64 {
        let mut logs: Vec<f64> = self.probs.iter().map(|p| -p.ln()).collect();
        logs.sort_by(|a, b| a.total_cmp(b));
        let base = logs[0];
        let max_den = opts.tolerance.powf(-1.0 / 3.0).floor().max(1.0) as u64;

        let mut ratios = Vec::with_capacity(logs.len());
        for l in &logs {
            match rational_approximation(l / base, opts.tolerance, opts.depth, max_den) {
                Some(r) => ratios.push(r),
                None => return 0.0,
            }
        }

        // group generated by base * {n_a / d_a} is (base / L) * gcd(n_a * L / d_a) Z
        let mut lcm_den: u128 = 1;
        for &(_, den) in &ratios {
            lcm_den = lcm(lcm_den, den as u128);
            if lcm_den > 1 << 60 {
                return 0.0;
            }
        }
        let g = ratios
            .iter()
            .fold(0u128, |g, &(num, den)| gcd(g, num as u128 * (lcm_den / den as u128)));
        base * g as f64 / lcm_den as f64
    }

    /// Draws one character.
    pub fn sample_char<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let m = self.probs.len();
        if self.uniform {
            return rng.gen_range(0..m) as u8;
        }
        let u: f64 = rng.gen();
        match self.cumulative.iter().position(|&c| u < c) {
            Some(i) => i as u8,
            None => (m - 1) as u8,
        }
    }

    /// An infinite stream of i.i.d. characters drawn from `rng`.
    pub fn sample_stream<R: Rng>(&self, rng: R) -> CharStream<'_, R> {
        CharStream { source: self, rng }
    }
}

impl TryFrom<Vec<f64>> for SourceDistribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<SourceDistribution> for Vec<f64> {
    fn from(d: SourceDistribution) -> Self {
        d.probs
    }
}

/// Parses `0.3,0.7` or `uniform:3`.
impl FromStr for SourceDistribution {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(m) = spec.strip_prefix("uniform:") {
            let m: usize = m
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSource(format!("bad alphabet size in {spec:?}")))?;
            return Self::uniform(m);
        }
        let probs = spec
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSource(format!("bad probability {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }
}

impl fmt::Display for SourceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.probs.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Settings for lattice detection in [`SourceDistribution::periodicity_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicityOptions {
    pub depth: usize,
    pub tolerance: f64,
}

impl Default for PeriodicityOptions {
    fn default() -> Self {
        Self {
            depth: 40,
            tolerance: 1e-10,
        }
    }
}

/// Lazy infinite character stream; see [`SourceDistribution::sample_stream`].
#[derive(Debug)]
pub struct CharStream<'a, R> {
    source: &'a SourceDistribution,
    rng: R,
}

impl<R: Rng> Iterator for CharStream<'_, R> {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.source.sample_char(&mut self.rng))
    }
}

/// First continued-fraction convergent of a positive `x` within `tol`
/// (relative) whose denominator is at most `max_den`.
fn rational_approximation(x: f64, tol: f64, depth: usize, max_den: u64) -> Option<(u64, u64)> {
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut rest = x;
    for _ in 0..depth {
        let a = rest.floor();
        if a > 1e15 {
            return None;
        }
        let a = a as u64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if k > max_den {
            return None;
        }
        if (x - h as f64 / k as f64).abs() <= tol * x.abs().max(1.0) {
            return Some((h, k));
        }
        let frac = rest - rest.floor();
        if frac <= f64::EPSILON {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u128, b: u128) -> u128 {
    a / gcd(a, b) * b
}
