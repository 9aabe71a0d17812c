//! Numeric Mellin transforms by adaptive Gauss–Kronrod quadrature.
//!
//! The substitution `t = e^u` turns `∫_0^∞ t^{s-1} f(t) dt` into
//! `∫_ℝ e^{su} f(e^u) du`. The real line is cut into unit panels on each side
//! of `u = 0` (that is, `t = 1`); each panel is integrated adaptively and
//! panels are added until the decay metadata bounds the remaining tail.

use num_complex::Complex64;

use super::{AsymptoticConstant, Method};
use crate::error::{Error, Result};

/// Default relative accuracy target of [`mellin_numeric`].
pub const MELLIN_REL_TOL: f64 = 1e-9;

const MAX_PANELS: usize = 4000;
const MAX_SUBDIVISIONS: usize = 400;
const PANEL_REL_TOL: f64 = 1e-14;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// How a function behaves at the ends of `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    /// `a` with `f(t) = O(t^a)` as `t → 0`.
    pub at_zero: f64,
    pub at_infinity: Tail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// `f(t) = O(e^{-ct})` for some `c > 0`.
    Exponential,
    /// `f(t) = O(t^{-b})`.
    Power(f64),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    magnitude: f64,
}

fn gk21<F: Fn(f64) -> Complex64>(g: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut magnitude = fc.norm() * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        kronrod += (f1 + f2) * WGK[j];
        magnitude += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
        magnitude: magnitude * half,
    }
}

/// Integrates one panel, bisecting the worst segment until the summed error
/// estimate drops below `PANEL_REL_TOL` times the integral of `|g|`.
fn adaptive<F: Fn(f64) -> Complex64>(g: &F, a: f64, b: f64) -> Segment {
    let mut segments = vec![gk21(g, a, b)];
    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let magnitude: f64 = segments.iter().map(|s| s.magnitude).sum();
        if error <= PANEL_REL_TOL * magnitude || error == 0.0 || segments.len() >= MAX_SUBDIVISIONS {
            return Segment {
                a,
                b,
                value: segments.iter().map(|s| s.value).sum(),
                error,
                magnitude,
            };
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .unwrap();
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(gk21(g, seg.a, mid));
        segments.push(gk21(g, mid, seg.b));
    }
}

/// `∫_0^∞ t^{s-1} f(t) dt` to relative accuracy [`MELLIN_REL_TOL`].
pub fn mellin_numeric<F: Fn(f64) -> f64>(f: F, decay: Decay, s: Complex64) -> Result<AsymptoticConstant> {
    mellin_numeric_with(f, decay, s, MELLIN_REL_TOL)
}

/// As [`mellin_numeric`] with an explicit relative target. The target is
/// taken relative to `∫ |t^{s-1} f(t)| dt`, so cancelling integrands get an
/// absolute guarantee at that scale. The reported error bound is the sum of
/// the panel error estimates and the estimated tails beyond the last panels.
pub fn mellin_numeric_with<F: Fn(f64) -> f64>(
    f: F,
    decay: Decay,
    s: Complex64,
    rel_tol: f64,
) -> Result<AsymptoticConstant> {
    let left_rate = s.re + decay.at_zero;
    if !(left_rate > 0.0) {
        return Err(Error::NonConvergent(format!(
            "t^(s-1) f(t) is not integrable at 0: Re(s) + {} = {left_rate}",
            decay.at_zero
        )));
    }
    let right_rate = match decay.at_infinity {
        Tail::Exponential => None,
        Tail::Power(b) => {
            let r = b - s.re;
            if !(r > 0.0) {
                return Err(Error::NonConvergent(format!(
                    "t^(s-1) f(t) is not integrable at infinity: {b} - Re(s) = {r}"
                )));
            }
            Some(r)
        }
    };
    let g = |u: f64| {
        let ft = f(u.exp());
        if ft == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (s * u).exp() * ft
        }
    };

    let first = [adaptive(&g, -1.0, 0.0), adaptive(&g, 0.0, 1.0)];
    let mut value: Complex64 = first.iter().map(|p| p.value).sum();
    let mut error: f64 = first.iter().map(|p| p.error).sum();
    let mut scale: f64 = first.iter().map(|p| p.magnitude).sum();
    let target = |scale: f64| 1e-3 * rel_tol * scale;

    // left side: panels decay like e^{-left_rate} per unit once asymptotic
    let ratio = (-left_rate).exp();
    let mut last = first[0].magnitude;
    let mut j = 1;
    loop {
        let tail = last * ratio / (1.0 - ratio);
        if j >= 3 && tail <= target(scale) {
            error += tail;
            break;
        }
        if j > MAX_PANELS {
            return Err(Error::NonConvergent("left tail did not settle".into()));
        }
        let p = adaptive(&g, -(j as f64) - 1.0, -(j as f64));
        value += p.value;
        error += p.error;
        scale += p.magnitude;
        last = p.magnitude;
        j += 1;
    }

    let mut last = first[1].magnitude;
    let mut quiet = 0;
    let mut j = 1;
    loop {
        let done = match right_rate {
            Some(r) => {
                let ratio = (-r).exp();
                let tail = last * ratio / (1.0 - ratio);
                if j >= 3 && tail <= target(scale) {
                    error += tail;
                    true
                } else {
                    false
                }
            }
            None => quiet >= 2,
        };
        if done {
            break;
        }
        if j > MAX_PANELS {
            return Err(Error::NonConvergent("right tail did not settle".into()));
        }
        let p = adaptive(&g, j as f64, j as f64 + 1.0);
        value += p.value;
        error += p.error;
        scale += p.magnitude;
        if p.magnitude <= target(scale) && p.magnitude <= last {
            quiet += 1;
            error += p.magnitude;
        } else {
            quiet = 0;
        }
        last = p.magnitude;
        j += 1;
    }

    Ok(AsymptoticConstant {
        value,
        error_bound: error,
        method: Method::Quadrature,
    })
}
