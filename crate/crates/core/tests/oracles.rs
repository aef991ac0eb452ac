mod common;

use std::f64::consts::PI;

use jacobi_sumrules::mfunction::{im_m_boundary, log_ratio_boundary, m_eval, m_rational, radial_probe, WeightFunction};
use jacobi_sumrules::quadrature::{integrate, QuadratureSpec};
use jacobi_sumrules::spectral::{eigs_outside, SpectrumOptions};
use jacobi_sumrules::sumrules::{boundary_splits, cond_trace_b, z_functionals, Rule, RuleContext};
use jacobi_sumrules::JacobiCoefficients;
use num_complex::Complex64;

use common::{circle_separation, m_continued_fraction, periodic_mean_half, random_matrices};

fn coeffs(j: &JacobiCoefficients) -> (Vec<f64>, Vec<f64>) {
    let r = j.rank();
    ((1..=r).map(|k| j.a(k)).collect(), (1..=r).map(|k| j.b(k)).collect())
}

#[test]
fn rational_form_matches_continued_fraction() {
    for j in random_matrices(50, 1, 8, (0.3, 3.0), 3.0) {
        let (a, b) = coeffs(&j);
        let rm = m_rational(&j).unwrap();
        assert!((rm.denominator[0] - 1.0).abs() < 1e-15);
        assert!(rm.denominator.len() <= 2 * j.rank() + 1);
        for k in 1..12 {
            for &r in &[0.2, 0.5, 0.8] {
                let z = Complex64::from_polar(r, PI * k as f64 / 12.0);
                let cf = m_continued_fraction(&a, &b, z);
                let got = m_eval(&j, z).unwrap();
                assert!((got - cf).norm() <= 1e-12 * (1.0 + cf.norm()), "{got} vs {cf} at {z}");
            }
        }
    }
}

#[test]
fn herglotz_and_conjugate_symmetry() {
    for j in random_matrices(50, 2, 8, (0.3, 3.0), 3.0) {
        for i in 1..=10 {
            for k in 1..=10 {
                let z = Complex64::from_polar(0.095 * i as f64, PI * k as f64 / 11.0);
                let m = m_eval(&j, z).unwrap();
                assert!(m.im > 0.0, "Im M({z}) = {}", m.im);
                let mc = m_eval(&j, z.conj()).unwrap();
                assert!((mc - m.conj()).norm() <= 1e-13 * (1.0 + m.norm()));
            }
        }
    }
}

#[test]
fn boundary_values_agree_with_continued_fraction() {
    for j in random_matrices(50, 3, 8, (0.3, 3.0), 3.0) {
        let (a, b) = coeffs(&j);
        for k in 1..50 {
            let t = PI * k as f64 / 50.0;
            let cf = m_continued_fraction(&a, &b, Complex64::from_polar(1.0, t)).im;
            let got = im_m_boundary(&j, t);
            assert!((got - cf).abs() <= 1e-10 * cf.abs(), "theta {t}: {got} vs {cf}");
            assert!(got > 0.0);
            assert!((log_ratio_boundary(&j, -t) - log_ratio_boundary(&j, t)).abs() < 1e-12);
        }
    }
}

#[test]
fn poles_match_eigenvalues_and_weights() {
    for j in random_matrices(50, 4, 8, (0.3, 3.0), 3.0) {
        let poles = m_rational(&j).unwrap().poles_in_disk();
        let s = eigs_outside(&j, &SpectrumOptions::default()).unwrap();
        let mut from_poles: Vec<(f64, f64)> = poles.iter().map(|p| (p.z.recip(), p.weight)).collect();
        let mut from_eigs: Vec<(f64, f64)> = s.points().map(|p| (p.point.beta, p.weight)).collect();
        from_poles.sort_by(|x, y| x.0.total_cmp(&y.0));
        from_eigs.sort_by(|x, y| x.0.total_cmp(&y.0));
        // Eigenvalues within the edge margin are dropped by the eigensolver.
        from_poles.retain(|(beta, _)| (beta + beta.recip()).abs() > 2.0 + 1e-8);
        assert_eq!(from_poles.len(), from_eigs.len(), "{from_poles:?} vs {from_eigs:?}");
        for ((bp, wp), (be, we)) in from_poles.iter().zip(&from_eigs) {
            assert!((bp - be).abs() <= 1e-8 * be.abs(), "beta {bp} vs {be}");
            assert!((wp - we).abs() <= 1e-8, "weight {wp} vs {we}");
        }
    }
}

/// Spectral measure of a large truncation against the boundary density
/// Im M(e^{iθ})/π on E = 2 cos θ.
#[test]
fn truncation_histogram_matches_density() {
    let bins = 50;
    let delta = 0.1;
    let (lo, hi) = (-2.0 + delta, 2.0 - delta);
    let width = (hi - lo) / bins as f64;
    for j in random_matrices(3, 5, 3, (0.5, 1.5), 1.0) {
        let (a, b) = coeffs(&j);
        let t = j.truncate(4000);
        let eigs = t.eigenvalues_in(lo, hi, 0.0);
        let mut hist = vec![0.0; bins];
        for (k, e) in eigs.iter().enumerate() {
            let v = t.eigenvector(*e, k as u64);
            let bin = (((e - lo) / width) as usize).min(bins - 1);
            hist[bin] += v[0] * v[0];
        }
        let density = |e: f64| {
            let theta = (e / 2.0).acos();
            m_continued_fraction(&a, &b, Complex64::from_polar(1.0, theta)).im / PI
        };
        let mut exact = vec![0.0; bins];
        for (k, x) in exact.iter_mut().enumerate() {
            let x0 = lo + k as f64 * width;
            let (v, _) = integrate(density, x0, x0 + width, &QuadratureSpec::default()).unwrap();
            *x = v;
        }
        let scale = exact.iter().fold(0.0_f64, |m, v| m.max(*v));
        let sup = hist.iter().zip(&exact).map(|(h, e)| (h - e).abs()).fold(0.0, f64::max);
        assert!(sup <= 0.05 * scale, "histogram sup error {sup} vs scale {scale}");
    }
}

#[test]
fn szego_integral_matches_midpoint_oracle() {
    for j in random_matrices(30, 6, 4, (0.5, 1.5), 1.0) {
        if circle_separation(&j) < 0.05 {
            continue;
        }
        let (a, b) = coeffs(&j);
        let log = |t: f64| (t.sin() / m_continued_fraction(&a, &b, Complex64::from_polar(1.0, t)).im).ln();
        let z = z_functionals(&j, &QuadratureSpec::default(), 2).unwrap();
        let z_oracle = periodic_mean_half(log, 20_000);
        let y1_oracle = -2.0 * periodic_mean_half(|t| log(t) * t.cos(), 20_000);
        let y2_oracle = -2.0 * periodic_mean_half(|t| log(t) * (2.0 * t).cos(), 20_000);
        assert!((z.z - z_oracle).abs() < 1e-9, "{} vs {z_oracle}", z.z);
        assert!((z.y[&1] - y1_oracle).abs() < 1e-9);
        assert!((z.y[&2] - y2_oracle).abs() < 1e-9);
    }
}

#[test]
fn step_rules_telescope_to_the_coefficient_sum() {
    let quad = QuadratureSpec::default();
    let opts = SpectrumOptions::default();
    for j in random_matrices(20, 7, 6, (0.3, 3.0), 3.0) {
        let total = RuleContext::new(&j, &quad, &opts, 2).unwrap().z.z;
        let mut sum = 0.0;
        for n in 0..j.rank() {
            let ctx = RuleContext::new(&j.strip(n), &quad, &opts, 2).unwrap();
            let c = ctx.check(Rule::Step0).unwrap();
            sum += ctx.z.z - ctx.z_stripped.z;
            assert!(c.residual.abs() < 1e-8);
        }
        assert!((sum - total).abs() < 1e-8, "{sum} vs {total}");
    }
}

#[test]
fn conditional_trace_stabilizes_past_the_rank() {
    for j in random_matrices(20, 8, 8, (0.3, 3.0), 3.0) {
        let r = j.rank();
        for ell in 1..=4 {
            let v = cond_trace_b(&j, ell, &[r + ell as usize, r + 40, r + 200]).unwrap();
            assert!((v[0] - v[1]).abs() < 1e-10 && (v[1] - v[2]).abs() < 1e-10, "{v:?}");
        }
    }
}

#[test]
fn radial_limit_is_reached_inside_the_resonance_scale() {
    let weights: Vec<WeightFunction> = ["unit", "sinsq", "cosmix:0.3"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for j in random_matrices(10, 9, 4, (0.5, 1.5), 1.0) {
        let sep = circle_separation(&j);
        let r = 1.0 - 1e-3 * sep.min(1.0);
        for w in &weights {
            let p = radial_probe(&j, w, &[r], &QuadratureSpec::default(), false).unwrap();
            assert!((p.values[0] - p.boundary).abs() < 1e-2, "sep {sep}: {:?}", p);
        }
    }
}

#[test]
fn weight_constants_bound_the_weights() {
    let weights: Vec<WeightFunction> = ["unit", "1+cos", "1-cos", "sinsq", "cosmix:0.3", "cosmix:-0.45"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    for w in &weights {
        let c = w.constants().expect("admissible");
        for k in 1..2000 {
            let phi = PI * k as f64 / 2000.0;
            let d = phi.min(PI - phi);
            let v = w.eval(phi);
            assert!(
                v >= 0.0 && v <= c.c1 * d.powf(c.alpha - 1.0) * (1.0 + 1e-12),
                "{w} at {phi}"
            );
            if v > 0.0 {
                let ratio = (w.derivative(phi) / v).abs();
                assert!(
                    ratio <= c.c2 * d.powf(-c.beta_exp) * (1.0 + 1e-9) + 1e-12,
                    "{w} at {phi}: {ratio}"
                );
            }
            let h = 1e-6;
            let fd = (w.eval(phi + h) - w.eval(phi - h)) / (2.0 * h);
            assert!((fd - w.derivative(phi)).abs() < 1e-6);
        }
    }
    for s in ["1+cos2", "1-cos3"] {
        assert!(s.parse::<WeightFunction>().unwrap().constants().is_none());
    }
}

#[test]
fn half_circle_normalization_matches_full_circle() {
    for j in random_matrices(20, 10, 8, (0.3, 3.0), 3.0) {
        let mut splits = vec![PI];
        for t in boundary_splits(&j) {
            splits.push(t);
            splits.push(2.0 * PI - t);
        }
        let spec = QuadratureSpec {
            splits,
            ..QuadratureSpec::default()
        };
        let (full, _) = integrate(|t| log_ratio_boundary(&j, t), 0.0, 2.0 * PI, &spec).unwrap();
        let (y2_full, _) = integrate(|t| log_ratio_boundary(&j, t) * (2.0 * t).cos(), 0.0, 2.0 * PI, &spec).unwrap();
        let z = z_functionals(&j, &QuadratureSpec::default(), 2).unwrap();
        assert!(
            (full / (4.0 * PI) - z.z).abs() < 1e-9,
            "{} vs {}",
            full / (4.0 * PI),
            z.z
        );
        assert!((-y2_full / (2.0 * PI) - z.y[&2]).abs() < 1e-9);
    }
}
