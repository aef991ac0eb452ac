//! Eigenvalues outside [−2, 2], the β-map and eigenvalue-side functionals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::numeric::KahanSum;
use crate::tridiag::Tridiagonal;

/// An eigenvalue E with |E| > 2 and its image β, E = β + 1/β, |β| > 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaPoint {
    #[serde(rename = "E")]
    pub e: f64,
    pub beta: f64,
}

impl BetaPoint {
    /// √(E² − 4), evaluated as |β − 1/β| to avoid cancellation near ±2.
    pub fn sqrt_disc(&self) -> f64 {
        (self.beta - self.beta.recip()).abs()
    }
}

/// β from E: β = (E + sign(E)·√(E² − 4))/2.
pub fn beta_of_e(e: f64) -> Result<BetaPoint> {
    if !e.is_finite() || e.abs() <= 2.0 {
        return Err(Error::Domain(format!("|E| must exceed 2, got {e}")));
    }
    let root = ((e.abs() - 2.0) * (e.abs() + 2.0)).sqrt();
    let beta = e.signum() * (e.abs() + root) / 2.0;
    Ok(BetaPoint { e, beta })
}

/// E from β: E = β + 1/β.
pub fn e_of_beta(beta: f64) -> Result<BetaPoint> {
    if !beta.is_finite() || beta.abs() <= 1.0 {
        return Err(Error::Domain(format!("|beta| must exceed 1, got {beta}")));
    }
    Ok(BetaPoint {
        e: beta + beta.recip(),
        beta,
    })
}

/// An isolated eigenvalue with its spectral weight ν({E}).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    #[serde(flatten)]
    pub point: BetaPoint,
    pub weight: f64,
}

/// Eigenvalues above 2 (descending) and below −2 (ascending).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub plus: Vec<SpectralPoint>,
    pub minus: Vec<SpectralPoint>,
    pub m: usize,
    pub tol: f64,
}

impl EigenSpectrum {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    pub fn len(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn points(&self) -> impl Iterator<Item = &SpectralPoint> {
        self.plus.iter().chain(self.minus.iter())
    }

    pub fn total_weight(&self) -> f64 {
        self.points().map(|p| p.weight).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Starting truncation dimension; `None` means rank + 200.
    pub m: Option<usize>,
    /// Absolute eigenvalue tolerance.
    pub tol: f64,
    /// Eigenvalues within this distance of ±2 are dropped.
    pub edge: f64,
    /// Doubling stops here with [`Error::NotConverged`].
    pub max_m: usize,
    /// Seed of the inverse-iteration start vector.
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            m: None,
            tol: 1e-12,
            edge: 1e-8,
            max_m: 1 << 20,
            seed: 0x5eed,
        }
    }
}

fn outside(t: &Tridiagonal, tol: f64, edge: f64) -> (Vec<f64>, Vec<f64>) {
    let mut plus = t.eigenvalues_in(2.0 + edge, f64::INFINITY, tol);
    plus.reverse();
    let minus = t.eigenvalues_in(f64::NEG_INFINITY, -2.0 - edge, tol);
    (plus, minus)
}

fn max_shift(a: &[f64], b: &[f64]) -> Option<f64> {
    (a.len() == b.len()).then(|| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Eigenvalues of J outside [−2 − edge, 2 + edge] with their weights.
///
/// Works on truncations: starting from `m`, the dimension doubles until
/// the retained eigenvalues of the m- and 2m-truncations agree within
/// `tol`. The 2m values are returned. Weights are the squared first
/// components of unit eigenvectors of the final truncation.
pub fn eigs_outside(j: &JacobiCoefficients, opts: &SpectrumOptions) -> Result<EigenSpectrum> {
    let mut m = opts.m.unwrap_or(j.rank() + 200).max(j.rank() + 2).max(2);
    let bisect_tol = 0.0;
    let mut prev = outside(&j.truncate(m), bisect_tol, opts.edge);
    let mut last_shift = f64::INFINITY;
    loop {
        let next_m = 2 * m;
        if next_m > opts.max_m {
            return Err(Error::NotConverged { m, shift: last_shift });
        }
        let t = j.truncate(next_m);
        let cur = outside(&t, bisect_tol, opts.edge);
        let shift = match (max_shift(&prev.0, &cur.0), max_shift(&prev.1, &cur.1)) {
            (Some(p), Some(q)) => p.max(q),
            _ => f64::INFINITY,
        };
        if shift <= opts.tol {
            return Ok(assemble(&t, cur, next_m, opts));
        }
        prev = cur;
        m = next_m;
        last_shift = shift;
    }
}

fn assemble(t: &Tridiagonal, (plus, minus): (Vec<f64>, Vec<f64>), m: usize, opts: &SpectrumOptions) -> EigenSpectrum {
    let point = |e: f64| -> SpectralPoint {
        let v = t.eigenvector(e, opts.seed);
        SpectralPoint {
            point: beta_of_e(e).expect("retained eigenvalues lie outside [-2, 2]"),
            weight: v[0] * v[0],
        }
    };
    EigenSpectrum {
        plus: plus.into_iter().map(point).collect(),
        minus: minus.into_iter().map(point).collect(),
        m,
        tol: opts.tol,
    }
}

/// Eigenvalue sums E0, E1±, E2 over a (finite) spectrum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EigenFunctionals {
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "E1plus")]
    pub e1_plus: f64,
    #[serde(rename = "E1minus")]
    pub e1_minus: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
}

/// F(E) = ¼[β² − β⁻² − ln β⁴].
pub fn f2(p: &BetaPoint) -> f64 {
    let b2 = p.beta * p.beta;
    0.25 * (b2 - b2.recip() - 4.0 * p.beta.abs().ln())
}

pub fn eigen_functionals(s: &EigenSpectrum) -> EigenFunctionals {
    let mut e0 = KahanSum::default();
    let mut e2 = KahanSum::default();
    for p in s.points() {
        e0.add(p.point.beta.abs().ln());
        e2.add(f2(&p.point));
    }
    let e1 = |pts: &[SpectralPoint]| pts.iter().map(|p| p.point.sqrt_disc()).collect::<KahanSum>().value();
    EigenFunctionals {
        e0: e0.value(),
        e1_plus: e1(&s.plus),
        e1_minus: e1(&s.minus),
        e2: e2.value(),
    }
}

/// The test function f of the X_ℓ differences: ln|β| for ℓ = 0 and
/// −(β^ℓ − β^(−ℓ))/ℓ otherwise.
pub fn x_weight(p: &BetaPoint, ell: u32) -> f64 {
    if ell == 0 {
        p.beta.abs().ln()
    } else {
        let l = ell as i32;
        -(p.beta.powi(l) - p.beta.powi(-l)) / ell as f64
    }
}

/// Σ_± Σ_j [f(E_j^±(J)) − f(E_j^±(J'))] with the j-th eigenvalue of each
/// list paired with the j-th of the other; a missing partner contributes
/// f(±2) = 0.
pub fn paired_difference(full: &EigenSpectrum, stripped: &EigenSpectrum, ell: u32) -> f64 {
    let mut acc = KahanSum::default();
    for (lhs, rhs) in [(&full.plus, &stripped.plus), (&full.minus, &stripped.minus)] {
        for k in 0..lhs.len().max(rhs.len()) {
            let fl = lhs.get(k).map_or(0.0, |p| x_weight(&p.point, ell));
            let fr = rhs.get(k).map_or(0.0, |p| x_weight(&p.point, ell));
            acc.add(fl - fr);
        }
    }
    acc.value()
}

/// X_ℓ^(n)(J).
pub fn x_ell(j: &JacobiCoefficients, n: usize, ell: u32, opts: &SpectrumOptions) -> Result<f64> {
    let full = eigs_outside(j, opts)?;
    let stripped = eigs_outside(&j.strip(n), opts)?;
    Ok(paired_difference(&full, &stripped, ell))
}

/// X_ℓ^(∞)(J): the absolutely convergent sum of f over the whole spectrum.
pub fn x_ell_infinity(s: &EigenSpectrum, ell: u32) -> f64 {
    s.points()
        .map(|p| x_weight(&p.point, ell))
        .collect::<KahanSum>()
        .value()
}
