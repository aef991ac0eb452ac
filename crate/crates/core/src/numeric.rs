//! Small numerical helpers shared across modules.

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Running compensated prefix sums, ascending index order.
pub fn prefix_sums<I: IntoIterator<Item = f64>>(terms: I) -> Vec<f64> {
    let mut acc = KahanSum::default();
    terms
        .into_iter()
        .map(|t| {
            acc.add(t);
            acc.value()
        })
        .collect()
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return f64::NAN;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = KahanSum::default();
    let mut sxx = KahanSum::default();
    for (xi, yi) in x.iter().zip(y) {
        sxy.add((xi - mx) * (yi - my));
        sxx.add((xi - mx) * (xi - mx));
    }
    sxy.value() / sxx.value()
}

/// Chebyshev polynomial of the first kind T_ℓ(x) by the three-term
/// recurrence.
pub fn chebyshev_t(ell: u32, x: f64) -> f64 {
    match ell {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut t0, mut t1) = (1.0, x);
            for _ in 1..ell {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let terms: Vec<f64> = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 10_000)).collect();
        let k: KahanSum = terms.iter().copied().collect();
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-18);
    }

    #[test]
    fn slope_of_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        assert!((ls_slope(&x, &y) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_matches_cosine() {
        for ell in 0..7 {
            for k in 0..20 {
                let t = 0.1 + 0.15 * k as f64;
                let x = t.cos();
                assert!((chebyshev_t(ell, x) - (ell as f64 * t).cos()).abs() < 1e-13);
            }
        }
        assert_eq!(chebyshev_t(2, 2.0), 7.0);
    }
}
