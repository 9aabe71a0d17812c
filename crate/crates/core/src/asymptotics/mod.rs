//! Asymptotic constants: Mellin transforms of the Poisson moment functions,
//! their Fourier oscillations, limit variances, fringe limits and the
//! independence-number bounds.

mod gamma;
mod indnum;
mod mellin;
mod quadrature;

use num_complex::Complex64;

pub use gamma::{gamma, ln_gamma};
pub use indnum::{indnum_alphas, indnum_mean_bounds, IndnumBounds};
pub use mellin::{
    coentropy_partial_sum, fc_k_star, fe_k, fe_k_star, fe_k_star_at_minus_one, fourier_coefficient,
    fringe_count_limit, fringe_limit, fv_k, fv_k_star, link_trie_patricia, psi_eval, shape_limit,
    sigma_constants, FourierSeries, Moment, Psi, SigmaConstants, DEFAULT_FOURIER_TERMS, DEFAULT_TOL,
};
pub use quadrature::{mellin_numeric, mellin_numeric_with, Decay, Tail, MELLIN_REL_TOL};

/// How an [`AsymptoticConstant`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    TruncatedSeries,
    Quadrature,
    RecursionBounded,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::TruncatedSeries => "truncated-series",
            Method::Quadrature => "quadrature",
            Method::RecursionBounded => "recursion-bounded",
        }
    }
}

/// A computed constant with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstant {
    pub value: Complex64,
    pub error_bound: f64,
    pub method: Method,
}

impl AsymptoticConstant {
    pub fn closed(value: Complex64) -> Self {
        Self { value, error_bound: 0.0, method: Method::ClosedForm }
    }

    pub fn exact(value: f64) -> Self {
        Self::closed(Complex64::new(value, 0.0))
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }
}
