//! Finite symmetric tridiagonal matrices and Sturm-sequence bisection.
//!
//! The eigensolver never forms the matrix. Eigenvalue counts come from the
//! signs of the pivots of the shifted LDLᵀ recurrence, so isolating the few
//! eigenvalues in a window costs O(m) per bisection step.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Symmetric tridiagonal matrix with diagonal `diag[0..m]` and
/// off-diagonal `off[0..m-1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal must have one entry fewer than the diagonal"
        );
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn pivot_guard(&self) -> f64 {
        let emax = self.off.iter().fold(1.0_f64, |acc, e| acc.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of T − x).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.dim();
        if n == 0 {
            return 0;
        }
        let guard = self.pivot_guard();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < guard {
            q = -guard;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let e = self.off[i - 1];
            q = (self.diag[i] - x) - e * e / q;
            if q.abs() < guard {
                q = -guard;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Number of eigenvalues strictly above `x`.
    pub fn count_above(&self, x: f64) -> usize {
        // count_below(x) treats an eigenvalue equal to x as "below" through
        // the negative pivot guard; the complement is then strictly above.
        self.dim() - self.count_below(x)
    }

    /// Eigenvalues in `[lo, hi)`, ascending, each bracketed to width `tol`.
    /// `tol = 0` bisects to machine precision. Infinite window bounds are
    /// clipped to the Gershgorin interval.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
        if self.dim() == 0 || !(lo < hi) {
            return Vec::new();
        }
        let (glo, ghi) = self.gershgorin();
        let pad = 1e-12 * (1.0 + glo.abs().max(ghi.abs()));
        let lo = lo.max(glo - pad);
        let hi = hi.min(ghi + pad);
        if !(lo < hi) {
            return Vec::new();
        }
        let clo = self.count_below(lo);
        let chi = self.count_below(hi);
        let mut out = Vec::with_capacity(chi.saturating_sub(clo));
        self.isolate(lo, hi, clo, chi, tol, &mut out);
        out
    }

    /// Every eigenvalue, ascending, bisected to machine precision.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        let pad = 1e-9 * (1.0 + glo.abs().max(ghi.abs()));
        self.eigenvalues_in(glo - pad, ghi + pad, 0.0)
    }

    fn isolate(&self, lo: f64, hi: f64, clo: usize, chi: usize, tol: f64, out: &mut Vec<f64>) {
        let k = chi - clo;
        if k == 0 {
            return;
        }
        let mid = 0.5 * (lo + hi);
        let exhausted = mid <= lo || mid >= hi || hi - lo <= tol;
        if k == 1 || exhausted {
            if exhausted {
                out.extend(std::iter::repeat_n(mid, k));
            } else {
                out.push(self.bisect_single(lo, hi, clo, tol));
            }
            return;
        }
        let cmid = self.count_below(mid);
        self.isolate(lo, mid, clo, cmid, tol, out);
        self.isolate(mid, hi, cmid, chi, tol, out);
    }

    fn bisect_single(&self, mut lo: f64, mut hi: f64, clo: usize, tol: f64) -> f64 {
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                return mid;
            }
            if self.count_below(mid) > clo {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// Solves (T − shift·I) x = rhs in place by Gaussian elimination with
    /// partial pivoting (the LAPACK gttrf/gttrs scheme). Exactly singular
    /// pivots are replaced by a tiny value so the solve always completes.
    pub fn solve_shifted(&self, shift: f64, rhs: &mut [f64]) {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        let scale = self
            .diag
            .iter()
            .chain(self.off.iter())
            .fold(shift.abs(), |m, v| m.max(v.abs()))
            .max(1.0);
        let tiny = f64::EPSILON * scale * 1e-3;

        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }

        for i in 0..n.saturating_sub(1) {
            if swapped[i] {
                let temp = rhs[i];
                rhs[i] = rhs[i + 1];
                rhs[i + 1] = temp - dl[i] * rhs[i];
            } else {
                rhs[i + 1] -= dl[i] * rhs[i];
            }
        }

        rhs[n - 1] /= d[n - 1];
        if n > 1 {
            rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
        }
    }

    /// Unit eigenvector for a converged eigenvalue by inverse iteration
    /// (two sweeps from a seeded random start).
    pub fn eigenvector(&self, lambda: f64, seed: u64) -> Vec<f64> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut x);
        let start = x.clone();
        let scale = self.gershgorin().1.abs().max(self.gershgorin().0.abs()).max(1.0);
        for k in 0..8 {
            // an exactly converged shift can overflow the solve; nudge it
            let shift = lambda + k as f64 * 1e-14 * scale;
            let mut y = start.clone();
            let mut ok = true;
            for _ in 0..2 {
                self.solve_shifted(shift, &mut y);
                ok = y.iter().all(|v| v.is_finite()) && normalize(&mut y);
                if !ok {
                    break;
                }
            }
            if ok {
                return y;
            }
        }
        x
    }

    /// Sign changes of the polynomial solution u_0 = 1, u_1, …, u_m of
    /// (T − x) u = 0 run forward as a three-term recurrence. By Sturm
    /// oscillation this equals the number of eigenvalues above `x`.
    pub fn polynomial_sign_changes(&self, x: f64) -> usize {
        let n = self.dim();
        let mut prev = 0.0_f64;
        let mut cur = 1.0_f64;
        let mut changes = 0;
        let mut last_sign = 1.0_f64;
        for i in 0..n {
            let a_prev = if i > 0 { self.off[i - 1] } else { 0.0 };
            let a_next = if i + 1 < n { self.off[i] } else { 1.0 };
            let next = ((x - self.diag[i]) * cur - a_prev * prev) / a_next;
            prev = cur;
            cur = next;
            if cur != 0.0 {
                let s = cur.signum();
                if s != last_sign {
                    changes += 1;
                    last_sign = s;
                }
            }
            let mag = cur.abs().max(prev.abs());
            if mag > 1e100 {
                prev /= mag;
                cur /= mag;
            }
        }
        changes
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let big = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(big > 0.0 && big.is_finite()) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= big);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(m: usize) -> Tridiagonal {
        Tridiagonal::new(vec![0.0; m], vec![1.0; m.saturating_sub(1)])
    }

    #[test]
    fn two_by_two_free_block() {
        let t = free(2);
        let ev = t.eigenvalues_in(-3.0, 3.0, 1e-14);
        assert_eq!(ev.len(), 2);
        assert!((ev[0] + 1.0).abs() < 1e-13);
        assert!((ev[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn truncated_free_has_nothing_outside() {
        for m in [1, 5, 40, 300] {
            let t = free(m);
            assert!(t.eigenvalues_in(2.0, f64::INFINITY, 1e-12).is_empty());
            assert!(t.eigenvalues_in(f64::NEG_INFINITY, -2.0, 1e-12).is_empty());
        }
    }

    #[test]
    fn free_chain_matches_cosine_formula() {
        let n = 60;
        let ev = free(n).all_eigenvalues();
        for (k, v) in ev.iter().enumerate() {
            let j = (n - k) as f64;
            let exact = 2.0 * (j * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
        }
    }

    #[test]
    fn rank_one_diagonal_eigenvalue_approaches_five_halves() {
        let mut prev_err = f64::INFINITY;
        for m in [10, 20, 50] {
            let mut t = free(m);
            t.diag[0] = 2.0;
            let ev = t.eigenvalues_in(2.0, f64::INFINITY, 1e-14);
            assert_eq!(ev.len(), 1);
            let err = (ev[0] - 2.5).abs();
            assert!(err <= prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-12);
    }

    #[test]
    fn sturm_count_matches_sign_changes() {
        let t = Tridiagonal::new(vec![0.3, -1.2, 2.0, 0.0, 0.5], vec![1.5, 0.4, 2.2, 1.0]);
        for x in [-4.0, -2.1, -0.3, 0.7, 2.05, 3.3, 5.0] {
            assert_eq!(t.count_above(x), t.polynomial_sign_changes(x), "x = {x}");
        }
    }

    #[test]
    fn pivoted_solve_inverts() {
        let t = Tridiagonal::new(vec![0.0, 1e-20, 3.0, -1.0], vec![2.0, 0.5, 1.5]);
        let x_true = [1.0, -2.0, 0.5, 4.0];
        let shift = 0.25;
        let mut rhs = vec![0.0; 4];
        for i in 0..4 {
            let mut v = (t.diag[i] - shift) * x_true[i];
            if i > 0 {
                v += t.off[i - 1] * x_true[i - 1];
            }
            if i + 1 < 4 {
                v += t.off[i] * x_true[i + 1];
            }
            rhs[i] = v;
        }
        t.solve_shifted(shift, &mut rhs);
        for i in 0..4 {
            assert!((rhs[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_iteration_recovers_known_vector() {
        // 2x2 free block: eigenvector for +1 is (1,1)/√2
        let t = free(2);
        let v = t.eigenvector(1.0 - 1e-13, 7);
        assert!((v[0] * v[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn empty_matrix() {
        let t = Tridiagonal::new(vec![], vec![]);
        assert_eq!(t.count_below(0.0), 0);
        assert!(t.all_eigenvalues().is_empty());
    }
}
