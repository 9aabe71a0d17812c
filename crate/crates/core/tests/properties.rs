use num_complex::Complex64;
use patricia_fringe::asymptotics::{
    coentropy_partial_sum, fe_k_star, fe_k_star_at_minus_one, fourier_coefficient, fv_k_star, indnum_alphas,
    link_trie_patricia, FourierSeries, Moment,
};
use patricia_fringe::SourceDistribution;
use proptest::prelude::*;

fn arb_source() -> impl Strategy<Value = SourceDistribution> {
    prop::collection::vec(0.05f64..1.0, 2..5).prop_map(|w| {
        let total: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let head: f64 = p[1..].iter().sum();
        p[0] = 1.0 - head;
        SourceDistribution::new(p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fe_identity(d in arb_source(), k in 2u32..40) {
        let v = fe_k_star_at_minus_one(&d, k) * (k * (k - 1)) as f64 + d.rho_int(k);
        prop_assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fe_conjugate_symmetric(d in arb_source(), k in 2u32..8, re in -0.9f64..3.0, im in -40.0f64..40.0) {
        let s = Complex64::new(re, im);
        let a = fe_k_star(&d, k, s).unwrap();
        let b = fe_k_star(&d, k, s.conj()).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-13 * a.norm());
    }

    #[test]
    fn fv_error_bounds_hold(d in arb_source(), k in 2u32..5, e in 3i32..9) {
        let tol = 10f64.powi(-e);
        let minus_one = Complex64::new(-1.0, 0.0);
        let a = fv_k_star(&d, k, minus_one, tol).unwrap();
        let b = fv_k_star(&d, k, minus_one, tol / 10.0).unwrap();
        prop_assert!(a.error_bound <= tol);
        prop_assert!((a.value - b.value).norm() <= a.error_bound);
        prop_assert!(a.value.re > 0.0 && a.value.re < fe_k_star_at_minus_one(&d, k));
    }

    #[test]
    fn coentropy_series_increases(d in arb_source(), a in 2u32..200, b in 200u32..2000) {
        let (sa, sb) = (coentropy_partial_sum(&d, a), coentropy_partial_sum(&d, b));
        prop_assert!(sa <= sb && sb < d.coentropy());
    }

    #[test]
    fn link_is_affine(mean in 0.0f64..1e4, var in 0.0f64..1e4, k in 2u32..10) {
        let d = SourceDistribution::new(vec![0.3, 0.7]).unwrap();
        let (m1, v1) = link_trie_patricia(mean, var, k, &d).unwrap();
        let (m2, v2) = link_trie_patricia(2.0 * mean, 2.0 * var, k, &d).unwrap();
        prop_assert!((m2 - 2.0 * m1).abs() <= 1e-9 * m2.abs().max(1.0));
        prop_assert!((v2 - 2.0 * v1).abs() <= 1e-9 * v2.abs().max(1.0));
        prop_assert!(m1 >= mean && v1 >= var);
    }

    #[test]
    fn psi_periodic_and_real(m in 2usize..4, k in 2u32..6, t in -20.0f64..20.0) {
        let d = SourceDistribution::uniform(m).unwrap();
        for moment in [Moment::E, Moment::V, Moment::C] {
            let series = FourierSeries::for_moment(&d, k, moment, 8, 1e-12).unwrap();
            prop_assert!(series.eval_complex(t).im.abs() < 1e-12);
            prop_assert!((series.eval(t + series.period()) - series.eval(t)).abs() < 1e-12);
            let c0 = fourier_coefficient(&d, k, moment, 0, 1e-12).unwrap().value.norm();
            for j in 1..=8 {
                prop_assert!(series.coefficient(j).unwrap().norm() <= c0);
            }
        }
    }
}

#[test]
fn alphas_symmetric_summand() {
    // summing k and n-k halves of the recursion gives the same value
    let a = indnum_alphas(300);
    for n in [10usize, 77, 300] {
        let ln_w = |k: usize| {
            let lf = |x: usize| (1..=x).map(|i| (i as f64).ln()).sum::<f64>();
            lf(n) - lf(k) - lf(n - k) - ((2f64).powi(n as i32) - 2.0).ln()
        };
        let term = |k: usize| ln_w(k).exp() * (1.0 - a[k]) * (1.0 - a[n - k]);
        let lower: f64 = (1..n).filter(|k| 2 * k < n).map(term).sum();
        let upper: f64 = (1..n).filter(|k| 2 * k > n).map(term).sum();
        assert!((lower - upper).abs() < 1e-12);
        let mid = if n % 2 == 0 { term(n / 2) } else { 0.0 };
        assert!((lower + upper + mid - a[n]).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&a[n]));
    }
}
