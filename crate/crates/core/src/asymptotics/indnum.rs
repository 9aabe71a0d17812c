//! Essential-node probabilities and bounds for the mean independence number
//! of patricia tries over the binary symmetric source.

use std::f64::consts::LN_2;

/// `α_0, …, α_N`, where `α_n` is the probability that the root of a random
/// binary symmetric patricia trie with `n` keys is essential.
///
/// Conditioning on the first split, which is `Binomial(n, 1/2)` conditioned
/// to be nondegenerate, gives
/// `α_n = Σ_{k=1}^{n-1} C(n,k)/(2^n-2) (1-α_k)(1-α_{n-k})`.
/// Weights are formed in log space, so large `N` does not overflow.
pub fn indnum_alphas(n_max: usize) -> Vec<f64> {
    let mut ln_fact = vec![0.0f64; n_max + 1];
    for i in 1..=n_max {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut alpha = vec![0.0f64; n_max + 1];
    if n_max >= 1 {
        alpha[1] = 1.0;
    }
    for n in 2..=n_max {
        // 2^n - 2 = 2^n (1 - 2^{1-n})
        let ln_norm = n as f64 * LN_2 + (-(2.0f64).powi(1 - n as i32)).ln_1p();
        let mut acc = 0.0;
        for k in 1..n {
            let w = (ln_fact[n] - ln_fact[k] - ln_fact[n - k] - ln_norm).exp();
            acc += w * (1.0 - alpha[k]) * (1.0 - alpha[n - k]);
        }
        alpha[n] = acc.clamp(0.0, 1.0);
    }
    alpha
}

/// Interval enclosing the limiting ratio of the mean independence number to
/// the node count `2n-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndnumBounds {
    pub lower: f64,
    pub upper: f64,
    /// `1/(2NH)`, the guaranteed width.
    pub width_bound: f64,
    /// `1 + Σ_{k=2}^N (1-ρ(k)) α_k / (k(k-1)H)`.
    pub partial: f64,
}

/// Counts essential nodes with fringe subtrees of at most `N` leaves exactly;
/// the remaining ones contribute at most `Σ_{k>N} 1/(k(k-1)H) = 1/(NH)`.
pub fn indnum_mean_bounds(n_max: usize) -> IndnumBounds {
    let n_max = n_max.max(2);
    let alpha = indnum_alphas(n_max);
    let h = LN_2;
    let mut partial = 1.0;
    for (k, a) in alpha.iter().enumerate().skip(2) {
        let kf = k as f64;
        let one_minus_rho = 1.0 - (2.0f64).powi(1 - k as i32);
        partial += one_minus_rho * a / (kf * (kf - 1.0) * h);
    }
    let tail = 1.0 / (n_max as f64 * h);
    IndnumBounds {
        lower: partial / 2.0,
        upper: (partial + tail) / 2.0,
        width_bound: tail / 2.0,
        partial,
    }
}
