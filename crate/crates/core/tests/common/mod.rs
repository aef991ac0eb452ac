#![allow(dead_code)]

use std::f64::consts::PI;

use jacobi_sumrules::JacobiCoefficients;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random eventually free matrices with rank in 1..=max_rank,
/// a_n ∈ [a_lo, a_hi] and |b_n| ≤ b_max.
pub fn random_matrices(count: usize, seed: u64, max_rank: usize, a: (f64, f64), b_max: f64) -> Vec<JacobiCoefficients> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(1..=max_rank);
            let av: Vec<f64> = (0..r).map(|_| rng.gen_range(a.0..=a.1)).collect();
            let bv: Vec<f64> = (0..r).map(|_| rng.gen_range(-b_max..=b_max)).collect();
            JacobiCoefficients::from_lists(&av, &bv).unwrap()
        })
        .collect()
}

/// The standard random suite: 200 matrices, rank ≤ 8, a ∈ [0.3, 3], |b| ≤ 3.
pub fn standard_suite() -> Vec<JacobiCoefficients> {
    random_matrices(200, 20_240_601, 8, (0.3, 3.0), 3.0)
}

/// M(z) by the continued fraction M_k = 1/(z + 1/z − b_k − a_k² M_{k+1}),
/// M_{r+1} = z.
pub fn m_continued_fraction(a: &[f64], b: &[f64], z: Complex64) -> Complex64 {
    let mut m = z;
    for k in (0..a.len()).rev() {
        m = (z + z.inv() - b[k] - a[k] * a[k] * m).inv();
    }
    m
}

/// (1/2π)∫₀^π f(θ) dθ for f smooth, 2π-periodic and even, by the
/// midpoint rule (spectrally accurate for such f).
pub fn periodic_mean_half(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = PI / n as f64;
    let s: f64 = (0..n).map(|k| f((k as f64 + 0.5) * h)).sum();
    s * h / (2.0 * PI)
}

/// ln[sin θ / Im M(e^{iθ})] from the continued fraction.
pub fn boundary_log_cf(a: &[f64], b: &[f64], theta: f64) -> f64 {
    let m = m_continued_fraction(a, b, Complex64::from_polar(1.0, theta));
    (theta.sin() / m.im).ln()
}

/// min over roots z of the rational denominator of ||z| − 1|.
pub fn circle_separation(j: &JacobiCoefficients) -> f64 {
    let rm = jacobi_sumrules::mfunction::m_rational(j).unwrap();
    jacobi_sumrules::mfunction::polynomial_roots(&rm.denominator)
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(f64::INFINITY, f64::min)
}
