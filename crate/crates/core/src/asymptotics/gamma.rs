//! Complex Gamma function via the Lanczos approximation (g = 7, nine terms).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const G: f64 = 7.0;

#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// A logarithm of `Γ(z)` (not necessarily the principal branch of `log Γ`,
/// but `exp` of it is `Γ(z)`).
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::PoleAt { re: z.re, im: z.im });
    }
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z)?);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + i as f64);
    }
    let t = z + G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln())
}

/// `Γ(z)` for complex `z`; [`Error::PoleAt`] at the nonpositive integers.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re > 0.0 && z.re <= 171.0 && z.re.fract() == 0.0 {
        let n = z.re as u64;
        return Ok(Complex64::new((1..n).map(|i| i as f64).product(), 0.0));
    }
    ln_gamma(z).map(|l| l.exp())
}
