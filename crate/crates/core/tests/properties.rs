mod common;

use std::f64::consts::PI;

use jacobi_sumrules::experiments::{predicted_label, region, Range, Verdict};
use jacobi_sumrules::mfunction::{m_eval, m_rational, poisson_kernel};
use jacobi_sumrules::probe::classify_sequence;
use jacobi_sumrules::quadrature::QuadratureSpec;
use jacobi_sumrules::spectral::{beta_of_e, e_of_beta, eigs_outside, SpectrumOptions};
use jacobi_sumrules::sumrules::{zeta_closed_form, zeta_ell, Flag, Rule, RuleContext};
use jacobi_sumrules::tridiag::Tridiagonal;
use jacobi_sumrules::{FamilyConfig, JacobiCoefficients};
use num_complex::Complex64;
use proptest::prelude::*;

use common::m_continued_fraction;

fn jacobi(max_rank: usize) -> impl Strategy<Value = JacobiCoefficients> {
    (1..=max_rank).prop_flat_map(|r| {
        (
            proptest::collection::vec(0.3f64..3.0, r),
            proptest::collection::vec(-3.0f64..3.0, r),
        )
            .prop_map(|(a, b)| JacobiCoefficients::from_lists(&a, &b).unwrap())
    })
}

fn coeffs(j: &JacobiCoefficients) -> (Vec<f64>, Vec<f64>) {
    let r = j.rank();
    ((1..=r).map(|k| j.a(k)).collect(), (1..=r).map(|k| j.b(k)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn m_is_herglotz(j in jacobi(8), r in 0.01f64..0.95, t in 0.01f64..(PI - 0.01)) {
        let m = m_eval(&j, Complex64::from_polar(r, t)).unwrap();
        prop_assert!(m.im > 0.0);
    }

    #[test]
    fn rational_form_is_normalized(j in jacobi(8)) {
        let rm = m_rational(&j).unwrap();
        prop_assert_eq!(rm.denominator[0], 1.0);
        prop_assert_eq!(rm.numerator[0], 0.0);
        prop_assert!(rm.denominator.len() <= 2 * j.rank() + 1);
        let (a, b) = coeffs(&j);
        let z = Complex64::new(0.1, 0.3);
        let cf = m_continued_fraction(&a, &b, z);
        prop_assert!((rm.eval(z).unwrap() - cf).norm() < 1e-12 * (1.0 + cf.norm()));
    }

    #[test]
    fn beta_map_round_trips(e in prop_oneof![2.0001f64..50.0, -50.0f64..-2.0001]) {
        let p = beta_of_e(e).unwrap();
        prop_assert!(p.beta.abs() > 1.0);
        prop_assert_eq!(p.beta.signum(), e.signum());
        let back = e_of_beta(p.beta).unwrap();
        prop_assert!((back.e - e).abs() <= 1e-13 * e.abs());
    }

    #[test]
    fn sturm_counts_are_monotone_and_complete(
        diag in proptest::collection::vec(-3.0f64..3.0, 1..40),
        x in -8.0f64..8.0,
        y in -8.0f64..8.0,
    ) {
        let n = diag.len();
        let off: Vec<f64> = (1..n).map(|k| 0.3 + (k % 5) as f64 * 0.5).collect();
        let t = Tridiagonal::new(diag, off);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        prop_assert!(t.count_below(lo) <= t.count_below(hi));
        let all = t.all_eigenvalues();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(all.iter().filter(|e| **e < x).count(), t.count_below(x));
        prop_assert_eq!(t.count_above(x), t.polynomial_sign_changes(x));
    }

    #[test]
    fn spectral_weights_are_probabilities(j in jacobi(6)) {
        let s = eigs_outside(&j, &SpectrumOptions::default()).unwrap();
        prop_assert!(s.points().all(|p| p.weight > 0.0 && p.weight <= 1.0));
        prop_assert!(s.total_weight() <= 1.0 + 1e-12);
        prop_assert!(s.plus.windows(2).all(|w| w[0].point.e > w[1].point.e));
        prop_assert!(s.minus.windows(2).all(|w| w[0].point.e < w[1].point.e));
    }

    #[test]
    fn zeta_matches_closed_forms(j in jacobi(6), n in 1usize..5, extra in 1usize..20) {
        for ell in 0..=2u32 {
            let v = zeta_ell(&j, n, ell, ell as usize + n + extra).unwrap();
            let c = zeta_closed_form(&j, n, ell).unwrap();
            prop_assert!((v - c).abs() < 1e-11 * (1.0 + c.abs()), "ell {}: {} vs {}", ell, v, c);
        }
    }

    #[test]
    fn poisson_kernel_is_positive_and_symmetric(r in 0.0f64..0.999, t in -PI..PI, p in -PI..PI) {
        let k = poisson_kernel(r, t, p);
        prop_assert!(k > 0.0);
        prop_assert!((k - poisson_kernel(r, p, t)).abs() <= 1e-12 * k);
        prop_assert!((k - poisson_kernel(r, -t, -p)).abs() <= 1e-12 * k);
    }

    #[test]
    fn family_config_round_trips(alpha in -2.0f64..2.0, beta in -2.0f64..2.0, cutoff in 1usize..500) {
        let text = format!(r#"{{"family": "coulomb", "alpha": {alpha:?}, "beta": {beta:?}, "cutoff": {cutoff}}}"#);
        let cfg = FamilyConfig::from_json_str(&text).unwrap();
        let again = FamilyConfig::from_json_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(cfg, again);
    }

    #[test]
    fn region_follows_the_predicted_label(alpha in -1.0f64..1.0, beta in -1.0f64..1.0) {
        let (p, m) = predicted_label(alpha, beta);
        let letter = region(alpha, beta);
        let expect = match (p, m) {
            (Verdict::Fails, Verdict::Fails) => 'a',
            (Verdict::Holds, Verdict::Holds) => 'b',
            (Verdict::Holds, Verdict::Fails) => 'c',
            (Verdict::Fails, Verdict::Holds) => 'd',
        };
        prop_assert_eq!(letter, expect);
        prop_assert_eq!(p == Verdict::Holds, 2.0 * alpha + beta >= 0.0);
    }

    #[test]
    fn range_values_stay_inside(min in -5.0f64..5.0, len in 0.0f64..5.0, step in 0.01f64..1.0) {
        let text = format!("{min}:{}:{step}", min + len);
        let r: Range = text.parse().unwrap();
        let v = r.values();
        prop_assert!(!v.is_empty());
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(v.iter().all(|x| *x <= min + len + 1e-9));
    }

    #[test]
    fn converged_sequences_are_finite(c in -100.0f64..100.0, k in 2usize..10) {
        prop_assert_eq!(classify_sequence(&vec![c; k]), Flag::Finite);
        let growing: Vec<f64> = (0..k).map(|i| c + i as f64).collect();
        prop_assert_eq!(classify_sequence(&growing), Flag::DivergesPlus);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sum_rules_hold_on_random_matrices(j in jacobi(5)) {
        let ctx = RuleContext::new(&j, &QuadratureSpec::default(), &SpectrumOptions::default(), 2).unwrap();
        prop_assert!(ctx.z.z >= -0.5 * 2f64.ln() - 1e-8);
        prop_assert!(ctx.z.z2_minus() >= -1e-8);
        for rule in [Rule::C0, Rule::P2, Rule::Z1Plus, Rule::Z1Minus, Rule::Case(1), Rule::Step(2)] {
            let c = ctx.check(rule).unwrap();
            prop_assert!(c.residual.abs() < 1e-6, "{}: {}", rule, c.residual);
        }
    }
}
