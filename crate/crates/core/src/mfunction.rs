//! The M-function M(z) = −m(z + 1/z) on the unit disk, its boundary
//! values, Poisson-type kernels, angular weights and radial probes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::numeric::KahanSum;
use crate::quadrature::{integrate, QuadratureSpec};

/// Largest rank served by the rational representation.
pub const MAX_RATIONAL_RANK: usize = 60;

/// |denominator| below this at an evaluation point is a pole hit.
pub const POLE_GUARD: f64 = 1e-13;

/// M(z) = P(z)/Q(z) with real coefficients in ascending powers of z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalMFunction {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub rank: usize,
}

/// A real pole z₀ of M in the open disk with its residue and the mass
/// ν({E}) of the eigenvalue E = z₀ + 1/z₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub z: f64,
    pub residue: f64,
    pub weight: f64,
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k)
}

fn horner_with_derivative(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    c.iter().rev().fold((zero, zero), |(p, d), &k| (p * z + k, d * z + p))
}

fn trim(c: &mut Vec<f64>) {
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 1e-15 * scale) {
        c.pop();
    }
}

/// Roots of a real polynomial (ascending coefficients) by the
/// Aberth–Ehrlich iteration followed by Newton polishing.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    trim(&mut c);
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let radius = (0..n)
        .map(|k| monic[k].abs().powf(1.0 / (n - k) as f64))
        .fold(0.0_f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..1000 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (p, d) = horner_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / d;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    for root in &mut z {
        for _ in 0..3 {
            let (p, d) = horner_with_derivative(&c, *root);
            let step = p / d;
            if step.is_finite() {
                *root -= step;
            }
        }
    }
    z
}

impl RationalMFunction {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let q = horner(&self.denominator, z);
        if q.norm() < POLE_GUARD {
            return Err(Error::PoleHit { re: z.re, im: z.im });
        }
        Ok(horner(&self.numerator, z) / q)
    }

    /// Real poles in the open unit disk, ordered by decreasing z.
    pub fn poles_in_disk(&self) -> Vec<Pole> {
        let mut out: Vec<Pole> = polynomial_roots(&self.denominator)
            .into_iter()
            .filter(|r| r.norm() < 1.0 && r.im.abs() <= 1e-7 * (1.0 + r.re.abs()))
            .map(|r| {
                let mut x = r.re;
                for _ in 0..2 {
                    let (q, dq) = horner_with_derivative(&self.denominator, Complex64::new(x, 0.0));
                    let step = q.re / dq.re;
                    if step.is_finite() {
                        x -= step;
                    }
                }
                let (_, dq) = horner_with_derivative(&self.denominator, Complex64::new(x, 0.0));
                let residue = horner(&self.numerator, Complex64::new(x, 0.0)).re / dq.re;
                let beta = x.recip();
                Pole {
                    z: x,
                    residue,
                    weight: (1.0 - beta * beta) * residue,
                }
            })
            .collect();
        out.sort_by(|p, q| q.z.total_cmp(&p.z));
        out
    }

    /// Angles in (0, π) of denominator roots outside the disk but within
    /// `band` of the circle; the boundary integrand peaks there.
    pub fn near_circle_angles(&self, band: f64) -> Vec<f64> {
        let mut out: Vec<f64> = polynomial_roots(&self.denominator)
            .into_iter()
            .filter(|r| r.norm() >= 1.0 && r.norm() < 1.0 + band)
            .map(|r| r.arg().abs())
            .filter(|t| *t > 1e-9 && *t < PI - 1e-9)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        out
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(p: &[f64], q: &[f64]) -> Vec<f64> {
    (0..p.len().max(q.len()))
        .map(|i| p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Exact rational form of M for an eventually free J, built by unwinding
/// the continued fraction from M(z; J₀) = z.
pub fn m_rational(j: &JacobiCoefficients) -> Result<RationalMFunction> {
    let r = j.rank();
    if r > MAX_RATIONAL_RANK {
        return Err(Error::RankTooLarge {
            rank: r,
            max: MAX_RATIONAL_RANK,
        });
    }
    let mut p = vec![0.0, 1.0];
    let mut q = vec![1.0];
    for k in (1..=r).rev() {
        let (a, b) = (j.a(k), j.b(k));
        let mut zq = vec![0.0];
        zq.extend_from_slice(&q);
        let mut zp = vec![0.0];
        zp.extend(p.iter().map(|v| a * a * v));
        let new_q = poly_sub(&poly_mul(&[1.0, -b, 1.0], &q), &zp);
        p = zq;
        q = new_q;
        trim(&mut p);
        trim(&mut q);
    }
    assert!(p.len() <= 2 * r + 2 && q.len() <= 2 * r + 1, "degree bound violated");
    Ok(RationalMFunction {
        numerator: p,
        denominator: q,
        rank: r,
    })
}

/// M(z; J) for |z| < 1, z ≠ 0, by the continued fraction
/// M_k = 1/(z + 1/z − b_k − a_k² M_{k+1}) started from M_{r+1} = z.
pub fn m_eval(j: &JacobiCoefficients, z: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) || z.norm() == 0.0 {
        return Err(Error::Domain(format!("M is evaluated on 0 < |z| < 1, got {z}")));
    }
    let x = z + z.inv();
    let mut m = z;
    let mut infinite = false;
    for k in (1..=j.rank()).rev() {
        if infinite {
            m = Complex64::new(0.0, 0.0);
            infinite = false;
            continue;
        }
        let a = j.a(k);
        let d = x - j.b(k) - a * a * m;
        if d.norm() < POLE_GUARD {
            if k == 1 {
                return Err(Error::PoleHit { re: z.re, im: z.im });
            }
            infinite = true;
            continue;
        }
        m = d.inv();
    }
    if infinite {
        return Err(Error::PoleHit { re: z.re, im: z.im });
    }
    Ok(m)
}

/// L(θ) = ln(sin θ / Im M(e^{iθ})), computed as Σ_k [ln|D_k|² − ln a_k²]
/// with D_k = 2cos θ − b_k − a_k² M_{k+1}, M_{r+1} = e^{iθ}.
pub fn log_ratio_boundary(j: &JacobiCoefficients, theta: f64) -> f64 {
    let x = 2.0 * theta.cos();
    let mut m = Complex64::from_polar(1.0, theta);
    let mut acc = KahanSum::default();
    for k in (1..=j.rank()).rev() {
        let a = j.a(k);
        let d = Complex64::new(x - j.b(k), 0.0) - a * a * m;
        acc.add(d.norm_sqr().ln() - 2.0 * a.ln());
        m = d.inv();
    }
    acc.value()
}

/// Im M(e^{iθ}) for θ ∈ (0, π).
pub fn im_m_boundary(j: &JacobiCoefficients, theta: f64) -> f64 {
    theta.sin() * (-log_ratio_boundary(j, theta)).exp()
}

/// P_r(θ, φ) = (1 − r²)/(1 + r² − 2r cos(θ − φ)).
pub fn poisson_kernel(r: f64, theta: f64, phi: f64) -> f64 {
    let s = (0.5 * (theta - phi)).sin();
    (1.0 - r * r) / ((1.0 - r) * (1.0 - r) + 4.0 * r * s * s)
}

/// D_r(θ, φ) = P_r(θ, φ) − P_r(θ, −φ).
pub fn d_kernel(r: f64, theta: f64, phi: f64) -> f64 {
    poisson_kernel(r, theta, phi) - poisson_kernel(r, theta, -phi)
}

/// N_r(θ, η) = (1/2π)∫_{θ−η}^{θ+η} D_r(θ, φ) dφ by quadrature.
pub fn window_mass(r: f64, theta: f64, eta: f64, quad: &QuadratureSpec) -> Result<f64> {
    let spec = QuadratureSpec {
        splits: vec![theta],
        ..quad.clone()
    };
    let (v, _) = integrate(|phi| d_kernel(r, theta, phi), theta - eta, theta + eta, &spec)?;
    Ok(v / (2.0 * PI))
}

/// Constants certifying 0 ≤ w ≤ C₁ d^{α−1} and |w′/w| ≤ C₂ d^{−β_exp},
/// d(φ) = min(φ, π − φ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConstants {
    pub c1: f64,
    pub alpha: f64,
    pub c2: f64,
    pub beta_exp: f64,
}

/// Angular weights on (0, π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFunction {
    Unit,
    /// 1 + sign·cos(ℓφ), sign = ±1.
    OnePlusCos {
        ell: u32,
        sign: i8,
    },
    /// 2 sin²φ = 1 − cos 2φ.
    SinSq,
    /// 1 + 2p cos φ with |p| < ½.
    CosMix {
        p: f64,
    },
}

impl WeightFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::OnePlusCos { ell, sign } if ell == 0 || sign.abs() != 1 => Err(Error::InvalidArgument(format!(
                "1±cos weight needs ell >= 1 and sign ±1, got ell={ell}, sign={sign}"
            ))),
            Self::CosMix { p } if !(p.abs() < 0.5) => {
                Err(Error::InvalidArgument(format!("cosmix needs |p| < 1/2, got {p}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        match *self {
            Self::Unit => 1.0,
            Self::OnePlusCos { ell, sign } => 1.0 + f64::from(sign) * (f64::from(ell) * phi).cos(),
            Self::SinSq => 2.0 * phi.sin().powi(2),
            Self::CosMix { p } => 1.0 + 2.0 * p * phi.cos(),
        }
    }

    pub fn derivative(&self, phi: f64) -> f64 {
        match *self {
            Self::Unit => 0.0,
            Self::OnePlusCos { ell, sign } => {
                let l = f64::from(ell);
                -f64::from(sign) * l * (l * phi).sin()
            }
            Self::SinSq => 2.0 * (2.0 * phi).sin(),
            Self::CosMix { p } => -2.0 * p * phi.sin(),
        }
    }

    /// Admissibility constants; `None` when w vanishes inside (0, π).
    pub fn constants(&self) -> Option<WeightConstants> {
        match *self {
            Self::Unit => Some(WeightConstants {
                c1: 1.0,
                alpha: 1.0,
                c2: 0.0,
                beta_exp: 0.0,
            }),
            Self::OnePlusCos { ell: 1, .. } | Self::SinSq => Some(WeightConstants {
                c1: 2.0,
                alpha: 1.0,
                c2: 2.0,
                beta_exp: 1.0,
            }),
            Self::OnePlusCos { .. } => None,
            Self::CosMix { p } => Some(WeightConstants {
                c1: 1.0 + 2.0 * p.abs(),
                alpha: 1.0,
                c2: 2.0 * p.abs() / (1.0 - 2.0 * p.abs()),
                beta_exp: 0.0,
            }),
        }
    }
}

impl FromStr for WeightFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let parse_ell = |t: &str| -> Result<u32> {
            if t.is_empty() {
                Ok(1)
            } else {
                t.parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad weight order in {s:?}")))
            }
        };
        let w = match s.as_str() {
            "unit" | "1" => Self::Unit,
            "sinsq" | "sin2" | "1-cos2" => Self::SinSq,
            _ if s.starts_with("1+cos") => Self::OnePlusCos {
                ell: parse_ell(&s[5..])?,
                sign: 1,
            },
            _ if s.starts_with("1-cos") => Self::OnePlusCos {
                ell: parse_ell(&s[5..])?,
                sign: -1,
            },
            _ if s.starts_with("cosmix:") => Self::CosMix {
                p: s[7..]
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad cosmix parameter in {s:?}")))?,
            },
            _ => return Err(Error::InvalidArgument(format!("unknown weight {s:?}"))),
        };
        w.validate()?;
        Ok(w)
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Unit => write!(f, "unit"),
            Self::OnePlusCos { ell, sign } => {
                let s = if sign > 0 { '+' } else { '-' };
                if ell == 1 {
                    write!(f, "1{s}cos")
                } else {
                    write!(f, "1{s}cos{ell}")
                }
            }
            Self::SinSq => write!(f, "sinsq"),
            Self::CosMix { p } => write!(f, "cosmix:{p}"),
        }
    }
}

/// Output of [`radial_probe`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialProbe {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub boundary: f64,
    /// min over the sample grid of Im M(re^{iφ}) / ((1/r − r) sin φ).
    pub min_ratio: Vec<f64>,
}

/// I(r) = ∫₀^π ln[g(r) sin φ + Im M(re^{iφ})] w(φ) dφ for each radius and
/// the boundary value I(1). Without `shifted`, g ≡ 0; otherwise
/// g(r) = a₁⁻²(1/r − r).
pub fn radial_probe(
    j: &JacobiCoefficients,
    w: &WeightFunction,
    radii: &[f64],
    quad: &QuadratureSpec,
    shifted: bool,
) -> Result<RadialProbe> {
    w.validate()?;
    let mut values = Vec::with_capacity(radii.len());
    let mut min_ratio = Vec::with_capacity(radii.len());
    let a1 = j.a(1);
    let spec = QuadratureSpec {
        splits: vec![PI / 2.0],
        ..quad.clone()
    };
    for &r in radii {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!("radius must lie in (0, 1), got {r}")));
        }
        let g = if shifted { (r.recip() - r) / (a1 * a1) } else { 0.0 };
        let integrand = |phi: f64| -> f64 {
            let z = Complex64::from_polar(r, phi);
            match m_eval(j, z) {
                Ok(m) => (g * phi.sin() + m.im).ln() * w.eval(phi),
                Err(_) => f64::NAN,
            }
        };
        let (v, _) = integrate(integrand, 0.0, PI, &spec)?;
        values.push(v);
        let ratio = (1..200)
            .filter_map(|k| {
                let phi = PI * k as f64 / 200.0;
                m_eval(j, Complex64::from_polar(r, phi))
                    .ok()
                    .map(|m| m.im / ((r.recip() - r) * phi.sin()))
            })
            .fold(f64::INFINITY, f64::min);
        min_ratio.push(ratio);
    }
    let (boundary, _) = integrate(
        |phi| (phi.sin().ln() - log_ratio_boundary(j, phi)) * w.eval(phi),
        0.0,
        PI,
        &spec,
    )?;
    Ok(RadialProbe {
        radii: radii.to_vec(),
        values,
        boundary,
        min_ratio,
    })
}
