//! Mellin transforms of the Poisson mean and variance functions of the
//! fringe counts `Φ_k`, their Fourier coefficients along the line `Re s = -1`,
//! and the derived limit constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

use super::gamma::ln_gamma;
use super::{AsymptoticConstant, Method};
use crate::error::{Error, Result};
use crate::source::SourceDistribution;
use crate::trees::{shape_probability, PatriciaTrie};

/// Default truncation of the starred string series.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default number of Fourier modes on each side of `m = 0`.
pub const DEFAULT_FOURIER_TERMS: usize = 8;

const MAX_STRING_LENGTH: usize = 20_000;

/// Which Poisson moment function a transform belongs to: mean (`E`),
/// variance (`V`), or covariance with the key count (`C`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    E,
    V,
    C,
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fringe size k must be at least 2, got {k}")));
    }
    Ok(())
}

fn ln_one_minus_rho(d: &SourceDistribution, k: u32) -> f64 {
    (1.0 - d.rho_int(k)).ln()
}

/// `f*_{E,k}(s) = (1-ρ(k)) Γ(k+s) / k!`.
pub fn fe_k_star(d: &SourceDistribution, k: u32, s: Complex64) -> Result<Complex64> {
    check_k(k)?;
    if s == Complex64::new(-1.0, 0.0) {
        return Ok(Complex64::new(fe_k_star_at_minus_one(d, k), 0.0));
    }
    let lg = ln_gamma(s + k as f64)?;
    Ok((lg + ln_one_minus_rho(d, k) - ln_factorial(k as u64)).exp())
}

/// `f*_{E,k}(-1) = (1-ρ(k)) / (k(k-1))`.
pub fn fe_k_star_at_minus_one(d: &SourceDistribution, k: u32) -> f64 {
    let k = k as f64;
    (1.0 - d.rho_real(k)) / (k * (k - 1.0))
}

/// `f_{E,k}(λ) = λ^k e^{-λ} (1-ρ(k)) / k!`.
pub fn fe_k(d: &SourceDistribution, k: u32, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    (k as f64 * lambda.ln() - lambda - ln_factorial(k as u64) + ln_one_minus_rho(d, k)).exp()
}

/// Calls `visit(ln multinomial(n; c), ln p_α)` once per composition `c` of
/// `n` into `m` parts, where `p_α` is the probability shared by every string
/// with those symbol counts.
fn for_each_composition(d: &SourceDistribution, n: usize, visit: &mut impl FnMut(f64, f64)) {
    let logs: Vec<f64> = d.probs().iter().map(|p| p.ln()).collect();
    if d.is_uniform() {
        let m = logs.len() as f64;
        visit(n as f64 * m.ln(), n as f64 * logs[0]);
        return;
    }
    fn rec(
        logs: &[f64],
        left: usize,
        acc_mult: f64,
        acc_logp: f64,
        visit: &mut impl FnMut(f64, f64),
    ) {
        if logs.len() == 1 {
            visit(acc_mult - ln_factorial(left as u64), acc_logp + left as f64 * logs[0]);
            return;
        }
        for c in 0..=left {
            rec(
                &logs[1..],
                left - c,
                acc_mult - ln_factorial(c as u64),
                acc_logp + c as f64 * logs[0],
                visit,
            );
        }
    }
    rec(&logs, n, ln_factorial(n as u64), 0.0, visit);
}

/// `Σ*_α term(p_α)` where every string counts once and every nonempty string
/// once more. `term` receives `ln p_α`. Summation stops after the first
/// length `n` for which `scale · 2ρ(k)^{n+1}/(1-ρ(k)) ≤ tol`; that quantity
/// is returned as the tail bound. Callers guarantee
/// `|term(ln p)| ≤ p^k`.
fn star_series(
    d: &SourceDistribution,
    k: u32,
    scale: f64,
    tol: f64,
    term: impl Fn(f64) -> Complex64,
) -> Result<(Complex64, f64)> {
    let rho = d.rho_int(k);
    let mut total = Complex64::new(0.0, 0.0);
    for n in 0..MAX_STRING_LENGTH {
        let mut level = Complex64::new(0.0, 0.0);
        for_each_composition(d, n, &mut |ln_mult, ln_p| {
            level += term(ln_p) * ln_mult.exp();
        });
        total += if n == 0 { level } else { 2.0 * level };
        let tail = scale * 2.0 * rho.powi(n as i32 + 1) / (1.0 - rho);
        if tail <= tol {
            return Ok((total, tail));
        }
    }
    Err(Error::NonConvergent(format!(
        "string series did not reach tolerance {tol} within length {MAX_STRING_LENGTH}"
    )))
}

/// `f*_{V,k}(s) = (1-ρ(k))Γ(k+s)/k! - ((1-ρ(k))/k!)² Γ(s+2k) Σ*_α p_α^k (1+p_α)^{-s-2k}`,
/// valid for `Re s > -k`. At `s = -1` this is
/// `(1-ρ(k))/(k(k-1)) - (2k-2)! ((1-ρ(k))/k!)² Σ*_α p_α^k/(1+p_α)^{2k-1}`.
pub fn fv_k_star(d: &SourceDistribution, k: u32, s: Complex64, tol: f64) -> Result<AsymptoticConstant> {
    check_k(k)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(s.re > -(k as f64)) {
        return Err(Error::NonConvergent(format!(
            "f*_(V,{k})(s) needs Re(s) > -{k}, got {}",
            s.re
        )));
    }
    let first = fe_k_star(d, k, s)?;
    let ln_pre = ln_one_minus_rho(d, k) - ln_factorial(k as u64);
    let prefactor = (ln_gamma(s + 2.0 * k as f64)? + 2.0 * ln_pre).exp();
    let z = s + 2.0 * k as f64;
    let kf = k as f64;
    let (sum, tail) = star_series(d, k, prefactor.norm(), tol, |ln_p| {
        (kf * ln_p - z * ln_p.exp().ln_1p()).exp()
    })?;
    Ok(AsymptoticConstant {
        value: first - prefactor * sum,
        error_bound: tail,
        method: Method::TruncatedSeries,
    })
}

/// The Poisson variance function
/// `f_{V,k}(λ) = (1-ρ(k))/k! λ^k e^{-λ} - ((1-ρ(k))/k!)² λ^{2k} Σ*_α p_α^k e^{-λ(1+p_α)}`,
/// truncated like [`fv_k_star`].
pub fn fv_k(d: &SourceDistribution, k: u32, lambda: f64, tol: f64) -> Result<AsymptoticConstant> {
    check_k(k)?;
    if lambda <= 0.0 {
        return Ok(AsymptoticConstant::exact(0.0));
    }
    let first = fe_k(d, k, lambda);
    let ln_pre = ln_one_minus_rho(d, k) - ln_factorial(k as u64);
    let ln_scale = 2.0 * ln_pre + 2.0 * k as f64 * lambda.ln() - lambda;
    let kf = k as f64;
    let (sum, tail) = star_series(d, k, ln_scale.exp(), tol, |ln_p| {
        Complex64::new((kf * ln_p - lambda * ln_p.exp()).exp(), 0.0)
    })?;
    Ok(AsymptoticConstant {
        value: Complex64::new(first - ln_scale.exp() * sum.re, 0.0),
        error_bound: tail,
        method: Method::TruncatedSeries,
    })
}

/// The point `-1 - 2πim/d_p` of the `m`-th Fourier mode.
fn mode_point(period: f64, m: i64) -> Complex64 {
    Complex64::new(-1.0, -2.0 * PI * m as f64 / period)
}

/// `f*_{X,k}(-1 - 2πim/d_p)`, the `m`-th Fourier coefficient of `ψ_X`.
/// For `X = C` this is `c^E_m (1 + 2πim/d_p)`.
pub fn fourier_coefficient(
    d: &SourceDistribution,
    k: u32,
    moment: Moment,
    m: i64,
    tol: f64,
) -> Result<AsymptoticConstant> {
    check_k(k)?;
    let period = d.periodicity();
    if period == 0.0 {
        return Err(Error::Aperiodic);
    }
    let s = mode_point(period, m);
    match moment {
        Moment::E => Ok(AsymptoticConstant::closed(fe_k_star(d, k, s)?)),
        Moment::V => fv_k_star(d, k, s, tol),
        Moment::C => {
            let e = fe_k_star(d, k, s)?;
            Ok(AsymptoticConstant::closed(e * Complex64::new(1.0, 2.0 * PI * m as f64 / period)))
        }
    }
}

/// Fourier coefficient `c^C_m` of `ψ_C = ψ_E + ψ_E'`. An aperiodic source has
/// a constant `ψ_E`, whose only term is `f*_{E,k}(-1)`.
pub fn fc_k_star(d: &SourceDistribution, k: u32, m: i64) -> Result<Complex64> {
    check_k(k)?;
    let period = d.periodicity();
    if period == 0.0 {
        return Ok(Complex64::new(fe_k_star_at_minus_one(d, k), 0.0));
    }
    Ok(fourier_coefficient(d, k, Moment::C, m, DEFAULT_TOL)?.value)
}

/// A truncated Fourier series `Σ_{|m|≤M} c_m e^{2πimt/d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    period: f64,
    coefficients: Vec<Complex64>,
    residue: f64,
}

impl FourierSeries {
    /// Builds a series from `c_{-M}, …, c_M`; `residue` records the summed
    /// error bounds of the coefficients.
    pub fn new(period: f64, coefficients: Vec<Complex64>, residue: f64) -> Result<Self> {
        if !(period > 0.0) || coefficients.len() % 2 == 0 {
            return Err(Error::InvalidArgument(
                "a Fourier series needs a positive period and coefficients for -M..=M".into(),
            ));
        }
        Ok(Self { period, coefficients, residue })
    }

    /// The series of `ψ_X` for `Φ_k`, truncated at `|m| ≤ terms`.
    pub fn for_moment(d: &SourceDistribution, k: u32, moment: Moment, terms: usize, tol: f64) -> Result<Self> {
        let period = d.periodicity();
        if period == 0.0 {
            return Err(Error::Aperiodic);
        }
        let m = terms as i64;
        let mut coefficients = Vec::with_capacity(2 * terms + 1);
        let mut residue = 0.0;
        for j in -m..=m {
            let c = fourier_coefficient(d, k, moment, j, tol)?;
            residue += c.error_bound;
            coefficients.push(c.value);
        }
        Self::new(period, coefficients, residue)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn residue(&self) -> f64 {
        self.residue
    }

    /// `c_m`, or `None` beyond the truncation.
    pub fn coefficient(&self, m: i64) -> Option<Complex64> {
        let idx = m + self.truncation() as i64;
        usize::try_from(idx).ok().and_then(|i| self.coefficients.get(i).copied())
    }

    pub fn mean(&self) -> f64 {
        self.coefficients[self.truncation()].re
    }

    /// Sum of `|c_m|` over the nonzero modes kept.
    pub fn oscillation_bound(&self) -> f64 {
        let mid = self.truncation();
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != mid)
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// The complex partial sum at `t`.
    pub fn eval_complex(&self, t: f64) -> Complex64 {
        let m = self.truncation() as i64;
        let w = 2.0 * PI * t / self.period;
        // pair modes ±j so conjugate terms are added together
        let mut acc = self.coefficients[m as usize];
        for j in 1..=m {
            let e = Complex64::from_polar(1.0, w * j as f64);
            acc += self.coefficients[(m + j) as usize] * e + self.coefficients[(m - j) as usize] * e.conj();
        }
        acc
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_complex(t).re
    }
}

/// `ψ_X`: a constant for aperiodic sources, otherwise a periodic series.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    Constant(f64),
    Periodic(FourierSeries),
}

impl Psi {
    /// `ψ_X` for the fringe count `Φ_k`.
    pub fn for_fringe(d: &SourceDistribution, k: u32, moment: Moment, terms: usize, tol: f64) -> Result<Self> {
        check_k(k)?;
        if d.periodicity() > 0.0 {
            return Ok(Psi::Periodic(FourierSeries::for_moment(d, k, moment, terms, tol)?));
        }
        let c = match moment {
            Moment::E | Moment::C => fe_k_star_at_minus_one(d, k),
            Moment::V => fv_k_star(d, k, Complex64::new(-1.0, 0.0), tol)?.value.re,
        };
        Ok(Psi::Constant(c))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Psi::Constant(c) => *c,
            Psi::Periodic(series) => series.eval(t),
        }
    }

    /// The mean term `f*_X(-1)`.
    pub fn mean(&self) -> f64 {
        match self {
            Psi::Constant(c) => *c,
            Psi::Periodic(series) => series.mean(),
        }
    }
}

/// Evaluates `ψ` at `t`.
pub fn psi_eval(psi: &Psi, t: f64) -> f64 {
    psi.eval(t)
}

/// Limit variances of an additive functional: `σ̂²` for the Poisson model and
/// `σ²` for a fixed number of keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaConstants {
    pub chi: f64,
    pub fv: f64,
    pub fc: f64,
    pub sigma2_hat: f64,
    pub sigma2: f64,
}

impl SigmaConstants {
    /// `σ̂² = χ² + f_V/H`, `σ² = f_V/H - f_C²/H² - 2χ f_C/H`, where `f_V`, `f_C`
    /// stand for `f*_X(-1)` or for `ψ_X` at a point.
    pub fn from_parts(chi: f64, entropy: f64, fv: f64, fc: f64) -> Self {
        let h = entropy;
        Self {
            chi,
            fv,
            fc,
            sigma2_hat: chi * chi + fv / h,
            sigma2: fv / h - fc * fc / (h * h) - 2.0 * chi * fc / h,
        }
    }
}

/// `σ̂²`, `σ²` for `Φ_k` (where `χ = 0`). With `at = Some(t)` and a periodic
/// source the oscillating versions at `t = log λ` (or `log n`) are returned;
/// otherwise the mean terms.
pub fn sigma_constants(
    d: &SourceDistribution,
    k: u32,
    at: Option<f64>,
    terms: usize,
    tol: f64,
) -> Result<SigmaConstants> {
    check_k(k)?;
    let h = d.entropy();
    let (fv, fc) = match at {
        Some(t) if d.periodicity() > 0.0 => (
            Psi::for_fringe(d, k, Moment::V, terms, tol)?.eval(t),
            Psi::for_fringe(d, k, Moment::C, terms, tol)?.eval(t),
        ),
        _ => (
            fv_k_star(d, k, Complex64::new(-1.0, 0.0), tol)?.value.re,
            fe_k_star_at_minus_one(d, k),
        ),
    };
    Ok(SigmaConstants::from_parts(0.0, h, fv, fc))
}

/// Mean and variance of `Φ_k` on tries from those on patricia tries built
/// from the same keys: each fringe patricia subtree of size `k` expands to a
/// `Geom_1(1-ρ(k))` number of fringe subtrees of the trie.
pub fn link_trie_patricia(mean_p: f64, var_p: f64, k: u32, d: &SourceDistribution) -> Result<(f64, f64)> {
    check_k(k)?;
    let rho = d.rho_int(k);
    let q = 1.0 - rho;
    Ok((mean_p / q, rho / (q * q) * mean_p + var_p / (q * q)))
}

/// Limiting probability that the fringe subtree of a uniformly chosen node of
/// a large patricia trie has `k` leaves: `(1-ρ(k)) / ((J+H) k(k-1))`.
pub fn fringe_limit(d: &SourceDistribution, k: u32) -> Result<f64> {
    check_k(k)?;
    Ok(fe_k_star_at_minus_one(d, k) / (d.coentropy() + d.entropy()))
}

/// Limit of `E[Φ_k(P_n)]/n`, the mean term `(1-ρ(k)) / (H k(k-1))`.
pub fn fringe_count_limit(d: &SourceDistribution, k: u32) -> Result<f64> {
    check_k(k)?;
    Ok(fe_k_star_at_minus_one(d, k) / d.entropy())
}

/// Limit of `E[Φ_T(P_n)]/n` for a fringe shape `T` with `k` leaves:
/// `P(P_k = T) (1-ρ(k)) / (H k(k-1))`.
pub fn shape_limit(d: &SourceDistribution, shape: &PatriciaTrie) -> Result<f64> {
    let p = shape_probability(shape.tree(), d)?;
    let k = shape.leaf_count() as u32;
    Ok(p * fringe_count_limit(d, k)?)
}

/// `Σ_{k=2}^{K} (1-ρ(k))/(k(k-1))`, which increases to the coentropy `J`.
pub fn coentropy_partial_sum(d: &SourceDistribution, terms: u32) -> f64 {
    (2..=terms).map(|k| fe_k_star_at_minus_one(d, k)).sum()
}

#[cfg(test)]
mod tests {
    use super::super::quadrature::{mellin_numeric, Decay, Tail};
    use super::*;
    use crate::trees::{build_patricia, enumerate_patricia_shapes, KeySet, DEFAULT_MAX_DEPTH};

    fn binary() -> SourceDistribution {
        SourceDistribution::uniform(2).unwrap()
    }

    fn sources() -> Vec<SourceDistribution> {
        vec![
            binary(),
            SourceDistribution::new(vec![0.3, 0.7]).unwrap(),
            SourceDistribution::uniform(3).unwrap(),
            SourceDistribution::new(vec![0.25, 0.125, 0.625]).unwrap(),
        ]
    }

    const MINUS_ONE: Complex64 = Complex64 { re: -1.0, im: 0.0 };

    #[test]
    fn fe_values() {
        let d = binary();
        assert_eq!(fe_k_star(&d, 2, MINUS_ONE).unwrap().re, 0.25);
        assert_eq!(fe_k_star(&d, 3, MINUS_ONE).unwrap().re, 0.125);
        assert!(matches!(fe_k_star(&d, 2, Complex64::new(-2.0, 0.0)), Err(Error::PoleAt { .. })));
        assert!(fe_k_star(&d, 1, MINUS_ONE).is_err());
        // generic path near s = -1 agrees with the closed form
        let near = fe_k_star(&d, 4, Complex64::new(-1.0 + 1e-12, 0.0)).unwrap();
        assert!((near.re - fe_k_star_at_minus_one(&d, 4)).abs() < 1e-12);
    }

    #[test]
    fn fe_identity() {
        for d in sources() {
            for k in 2..30 {
                let v = fe_k_star_at_minus_one(&d, k) * (k * (k - 1)) as f64 + d.rho_int(k);
                assert!((v - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fe_matches_quadrature() {
        for d in sources() {
            for k in 2..=6u32 {
                let decay = Decay { at_zero: k as f64, at_infinity: Tail::Exponential };
                let q = mellin_numeric(|t| fe_k(&d, k, t), decay, MINUS_ONE).unwrap();
                let exact = fe_k_star_at_minus_one(&d, k);
                assert!((q.value.re / exact - 1.0).abs() < 1e-8, "k={k}: {} vs {exact}", q.value.re);
                let s = Complex64::new(0.4, 2.5);
                let q = mellin_numeric(|t| fe_k(&d, k, t), decay, s).unwrap();
                let exact = fe_k_star(&d, k, s).unwrap();
                assert!((q.value - exact).norm() < 1e-8 * exact.norm());
            }
        }
    }

    #[test]
    fn fv_reference_values() {
        // independent high-precision evaluation of the same series
        let cases = [
            (binary(), 2, 0.115_665_104_399_558_24),
            (binary(), 3, 0.063_706_763_631_598_95),
            (binary(), 4, 0.043_165_176_089_284_53),
            (SourceDistribution::new(vec![0.3, 0.7]).unwrap(), 2, 0.097_674_973_610_026_68),
            (SourceDistribution::new(vec![0.3, 0.7]).unwrap(), 3, 0.052_198_285_221_969_29),
            (SourceDistribution::new(vec![0.3, 0.7]).unwrap(), 4, 0.035_129_946_530_082_07),
            (SourceDistribution::uniform(3).unwrap(), 2, 0.184_289_143_201_417_86),
        ];
        for (d, k, v) in cases {
            let r = fv_k_star(&d, k, MINUS_ONE, 1e-13).unwrap();
            assert!((r.value.re - v).abs() < 1e-12, "{d} k={k}: {}", r.value.re);
            assert!(r.value.im.abs() < 1e-15);
            assert!(r.error_bound <= 1e-13);
        }
    }

    #[test]
    fn fv_between_zero_and_fe() {
        for d in sources() {
            for k in 2..8 {
                let v = fv_k_star(&d, k, MINUS_ONE, 1e-12).unwrap().value.re;
                assert!(v > 0.0 && v < fe_k_star_at_minus_one(&d, k), "{d} k={k}: {v}");
            }
        }
    }

    #[test]
    fn fv_truncation_contract() {
        let d = SourceDistribution::new(vec![0.3, 0.7]).unwrap();
        for tol in [1e-4, 1e-6, 1e-9] {
            let a = fv_k_star(&d, 2, MINUS_ONE, tol).unwrap();
            let b = fv_k_star(&d, 2, MINUS_ONE, tol / 10.0).unwrap();
            assert!(a.error_bound <= tol);
            assert!((a.value - b.value).norm() <= a.error_bound, "tol {tol}");
        }
        assert!(matches!(
            fv_k_star(&d, 2, Complex64::new(-2.5, 0.0), 1e-9),
            Err(Error::NonConvergent(_))
        ));
    }

    #[test]
    fn fv_matches_quadrature() {
        for d in sources() {
            for k in [2u32, 3] {
                let decay = Decay { at_zero: k as f64, at_infinity: Tail::Exponential };
                let f = |t: f64| fv_k(&d, k, t, 1e-16).unwrap().value.re;
                for s in [MINUS_ONE, Complex64::new(0.5, -1.5)] {
                    let q = mellin_numeric(f, decay, s).unwrap();
                    let exact = fv_k_star(&d, k, s, 1e-14).unwrap().value;
                    assert!((q.value - exact).norm() < 1e-8 * exact.norm(), "{d} k={k} s={s}");
                }
            }
        }
    }

    #[test]
    fn fourier_binary() {
        let d = binary();
        let c1 = fourier_coefficient(&d, 2, Moment::E, 1, 1e-12).unwrap().value;
        let exact = Complex64::new(7.941_556_613_038_429e-7, 9.465_269_996_412_056e-7);
        assert!((c1 - exact).norm() < 1e-12 * 1e3 * exact.norm());
        let decay = Decay { at_zero: 2.0, at_infinity: Tail::Exponential };
        let q = mellin_numeric(|t| fe_k(&d, 2, t), decay, mode_point(d.periodicity(), 1)).unwrap();
        assert!((q.value - c1).norm() < 1e-8);

        let v1 = fourier_coefficient(&d, 2, Moment::V, 1, 1e-13).unwrap().value;
        let exact = Complex64::new(-6.295_548_103_261_816e-6, 5.015_539_932_421_551e-6);
        assert!((v1 - exact).norm() < 1e-12, "{v1}");

        let c0 = fourier_coefficient(&d, 2, Moment::C, 0, 1e-12).unwrap().value;
        assert_eq!(c0.re, 0.25);
        let cc = fc_k_star(&d, 2, 1).unwrap();
        let expect = c1 * Complex64::new(1.0, 2.0 * PI / std::f64::consts::LN_2);
        assert!((cc - expect).norm() < 1e-18);
    }

    #[test]
    fn fourier_symmetry_and_decay() {
        let d = binary();
        for moment in [Moment::E, Moment::V, Moment::C] {
            let c0 = fourier_coefficient(&d, 3, moment, 0, 1e-12).unwrap().value;
            for m in 1..=8 {
                let a = fourier_coefficient(&d, 3, moment, m, 1e-12).unwrap().value;
                let b = fourier_coefficient(&d, 3, moment, -m, 1e-12).unwrap().value;
                assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1e-300));
                assert!(a.norm() <= c0.norm());
            }
        }
        let aperiodic = SourceDistribution::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(fourier_coefficient(&aperiodic, 2, Moment::E, 1, 1e-12), Err(Error::Aperiodic));
        assert_eq!(fc_k_star(&aperiodic, 3, 0).unwrap().re, fe_k_star_at_minus_one(&aperiodic, 3));
    }

    #[test]
    fn psi_evaluation() {
        let d = binary();
        for moment in [Moment::E, Moment::V, Moment::C] {
            let psi = Psi::for_fringe(&d, 2, moment, 8, 1e-12).unwrap();
            let Psi::Periodic(series) = &psi else { panic!("binary source is periodic") };
            let wide = FourierSeries::for_moment(&d, 2, moment, 16, 1e-12).unwrap();
            for i in 0..20 {
                let t = 0.37 * i as f64;
                let v = psi.eval(t);
                assert!(series.eval_complex(t).im.abs() < 1e-12);
                assert!((psi.eval(t + d.periodicity()) - v).abs() < 1e-12);
                let tail: f64 = (9..=16).map(|m| 2.0 * wide.coefficient(m).unwrap().norm()).sum();
                assert!((wide.eval(t) - v).abs() <= tail + 1e-15);
            }
        }
        let aperiodic = SourceDistribution::new(vec![0.3, 0.7]).unwrap();
        let psi = Psi::for_fringe(&aperiodic, 3, Moment::E, 8, 1e-12).unwrap();
        assert_eq!(psi_eval(&psi, 0.0), fe_k_star_at_minus_one(&aperiodic, 3));
        assert_eq!(psi_eval(&psi, 17.3), fe_k_star_at_minus_one(&aperiodic, 3));
    }

    #[test]
    fn sigma_relations() {
        for d in sources() {
            for k in 2..6 {
                let s = sigma_constants(&d, k, None, 8, 1e-12).unwrap();
                assert_eq!(s.chi, 0.0);
                assert!((s.sigma2_hat - s.fv / d.entropy()).abs() < 1e-15);
                assert!(s.sigma2 <= s.sigma2_hat);
                assert!(s.sigma2 > 0.0);
                let at = sigma_constants(&d, k, Some(3.3), 8, 1e-12).unwrap();
                assert!((at.sigma2 - s.sigma2).abs() < 0.05 * s.sigma2);
            }
        }
    }

    #[test]
    fn link_identities() {
        let d = binary();
        let (m, _) = link_trie_patricia(10.0, 4.0, 2, &d).unwrap();
        assert_eq!(m, 20.0);
        let (m, v) = link_trie_patricia(10.0, 4.0, 40, &d).unwrap();
        assert!((m - 10.0).abs() < 1e-9 && (v - 4.0).abs() < 1e-9);
        let (_, v) = link_trie_patricia(10.0, 4.0, 2, &d).unwrap();
        assert_eq!(v, 0.5 / 0.25 * 10.0 + 4.0 / 0.25);
    }

    #[test]
    fn fringe_limits() {
        let d = binary();
        let ln2 = std::f64::consts::LN_2;
        assert!((fringe_limit(&d, 2).unwrap() - 1.0 / (8.0 * ln2)).abs() < 1e-15);
        assert!((fringe_limit(&d, 2).unwrap() - 0.180_336_9).abs() < 1e-7);
        assert!((fringe_limit(&d, 3).unwrap() - 0.090_168_5).abs() < 1e-7);
        let skew = SourceDistribution::new(vec![0.3, 0.7]).unwrap();
        let h = skew.entropy();
        assert!((fringe_limit(&skew, 4).unwrap() - (1.0 - skew.rho_int(4)) / (2.0 * h * 12.0)).abs() < 1e-15);
    }

    #[test]
    fn coentropy_series_monotone() {
        for d in sources() {
            let mut prev = 0.0;
            for k in [2, 5, 10, 100, 1000, 10_000] {
                let s = coentropy_partial_sum(&d, k);
                assert!(s > prev && s < d.coentropy());
                prev = s;
            }
            // the neglected tail is Σ_{k>K} 1/(k(k-1)) = 1/K up to ρ-terms
            let gap = d.coentropy() - coentropy_partial_sum(&d, 10_000);
            assert!((gap - 1e-4).abs() < 1e-9, "{gap}");
        }
    }

    #[test]
    fn shape_limits() {
        let d = binary();
        let two = build_patricia(&mut KeySet::parse(2, &["0", "1"]).unwrap(), DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(shape_limit(&d, &two).unwrap(), fringe_count_limit(&d, 2).unwrap());
        for shape in enumerate_patricia_shapes(3, 2).unwrap() {
            let v = shape_limit(&d, &shape).unwrap();
            assert!((v - 0.5 * fringe_count_limit(&d, 3).unwrap()).abs() < 1e-15);
        }
    }
}
