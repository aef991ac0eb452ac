//! Log-integrals Z, Z_ℓ^±, Y_ℓ, coefficient-side functionals, Chebyshev
//! traces ζ_ℓ and residual checks of the sum rules.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::mfunction::{log_ratio_boundary, m_rational, WeightFunction, MAX_RATIONAL_RANK};
use crate::numeric::{chebyshev_t, KahanSum};
use crate::quadrature::{integrate_vec, QuadratureSpec};
use crate::spectral::{
    eigen_functionals, eigs_outside, paired_difference, x_ell_infinity, EigenFunctionals, EigenSpectrum,
    SpectrumOptions,
};
use crate::tridiag::Tridiagonal;

/// Largest ℓ accepted by the weighted functionals.
pub const MAX_ELL: u32 = 6;

/// Breakpoints for the boundary integrand on (0, π): π/2 plus the angles
/// of denominator roots of M close to the unit circle.
pub fn boundary_splits(j: &JacobiCoefficients) -> Vec<f64> {
    let mut s = vec![PI / 2.0];
    if j.rank() <= MAX_RATIONAL_RANK {
        if let Ok(m) = m_rational(j) {
            s.extend(m.near_circle_angles(0.1));
        }
    }
    s
}

fn boundary_spec(j: &JacobiCoefficients, quad: &QuadratureSpec) -> QuadratureSpec {
    let mut spec = quad.clone();
    spec.splits.extend(boundary_splits(j));
    spec
}

/// (1/2π)∫₀^π ln(sin θ / Im M(e^{iθ})) w(θ) dθ with its error estimate.
pub fn ln_integral(j: &JacobiCoefficients, w: &WeightFunction, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    w.validate()?;
    let spec = boundary_spec(j, quad);
    let r = integrate_vec(
        |t, out: &mut [f64]| out[0] = log_ratio_boundary(j, t) * w.eval(t),
        0.0,
        PI,
        1,
        &spec,
    )?;
    Ok((r.values[0] / (2.0 * PI), r.errors[0] / (2.0 * PI)))
}

/// Z, Y_ℓ and Z_ℓ^± for ℓ = 1..=lmax.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZFunctionals {
    pub z: f64,
    pub y: BTreeMap<u32, f64>,
    pub z_plus: BTreeMap<u32, f64>,
    pub z_minus: BTreeMap<u32, f64>,
    /// Largest error estimate over all components.
    pub quad_error: f64,
}

impl ZFunctionals {
    pub fn z1_plus(&self) -> f64 {
        self.z_plus[&1]
    }
    pub fn z1_minus(&self) -> f64 {
        self.z_minus[&1]
    }
    pub fn z2_minus(&self) -> f64 {
        self.z_minus[&2]
    }
}

/// Computes Z and Y_ℓ in one vector quadrature, and Z_ℓ^± in a second,
/// independent one.
pub fn z_functionals(j: &JacobiCoefficients, quad: &QuadratureSpec, lmax: u32) -> Result<ZFunctionals> {
    let lmax = lmax.max(2);
    if lmax > MAX_ELL {
        return Err(Error::InvalidArgument(format!("ell must be at most {MAX_ELL}")));
    }
    let l = lmax as usize;
    let spec = boundary_spec(j, quad);
    let first = integrate_vec(
        |t, out: &mut [f64]| {
            let v = log_ratio_boundary(j, t);
            out[0] = v;
            for (k, o) in out.iter_mut().enumerate().skip(1) {
                *o = v * (k as f64 * t).cos();
            }
        },
        0.0,
        PI,
        l + 1,
        &spec,
    )?;
    let second = integrate_vec(
        |t, out: &mut [f64]| {
            let v = log_ratio_boundary(j, t);
            for k in 1..=l {
                let c = (k as f64 * t).cos();
                out[2 * (k - 1)] = v * (1.0 + c);
                out[2 * (k - 1) + 1] = v * (1.0 - c);
            }
        },
        0.0,
        PI,
        2 * l,
        &spec,
    )?;
    let two_pi = 2.0 * PI;
    let mut y = BTreeMap::new();
    let mut z_plus = BTreeMap::new();
    let mut z_minus = BTreeMap::new();
    for k in 1..=lmax {
        let i = k as usize;
        y.insert(k, -first.values[i] / PI);
        z_plus.insert(k, second.values[2 * (i - 1)] / two_pi);
        z_minus.insert(k, second.values[2 * (i - 1) + 1] / two_pi);
    }
    let worst = |e: &[f64]| e.iter().fold(0.0_f64, |m, v| m.max(*v));
    Ok(ZFunctionals {
        z: first.values[0] / two_pi,
        y,
        z_plus,
        z_minus,
        quad_error: worst(&first.errors).max(worst(&second.errors)) / PI,
    })
}

/// G(a) = a² − 1 − ln a² ≥ 0.
pub fn g_of_a(a: f64) -> f64 {
    a * a - 1.0 - 2.0 * a.ln()
}

/// Prefix-sum traces over n = 1..=N of the coefficient functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ATraces {
    #[serde(rename = "A0")]
    pub a0: Vec<f64>,
    #[serde(rename = "A1plus")]
    pub a1_plus: Vec<f64>,
    #[serde(rename = "A1minus")]
    pub a1_minus: Vec<f64>,
    #[serde(rename = "A2")]
    pub a2: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl ATraces {
    pub fn last(v: &[f64]) -> f64 {
        v.last().copied().unwrap_or(0.0)
    }
}

/// −Σ ln a_j, −Σ(a_j − 1 ± ½b_j), Σ[¼b_j² + ½G(a_j)] and γ_n = Π a_j⁻¹,
/// each accumulated in ascending index order.
pub fn a_functionals(j: &JacobiCoefficients, horizon: usize) -> ATraces {
    let mut acc = [KahanSum::default(); 4];
    let mut t = ATraces {
        a0: Vec::with_capacity(horizon),
        a1_plus: Vec::with_capacity(horizon),
        a1_minus: Vec::with_capacity(horizon),
        a2: Vec::with_capacity(horizon),
        gamma: Vec::with_capacity(horizon),
    };
    for n in 1..=horizon {
        let (a, b) = (j.a(n), j.b(n));
        acc[0].add(-a.ln());
        acc[1].add(-(a - 1.0 + 0.5 * b));
        acc[2].add(-(a - 1.0 - 0.5 * b));
        acc[3].add(0.25 * b * b + 0.5 * g_of_a(a));
        t.a0.push(acc[0].value());
        t.a1_plus.push(acc[1].value());
        t.a1_minus.push(acc[2].value());
        t.a2.push(acc[3].value());
        t.gamma.push(acc[0].value().exp());
    }
    t
}

/// Tr T_ℓ(T/2) from the eigenvalues of T.
pub fn chebyshev_trace(t: &Tridiagonal, ell: u32) -> f64 {
    t.all_eigenvalues()
        .into_iter()
        .map(|e| chebyshev_t(ell, 0.5 * e))
        .collect::<KahanSum>()
        .value()
}

/// ζ_ℓ^(n)(J) = (2/ℓ)[Tr T_ℓ(½J_m) − Tr T_ℓ(½J^(n)_{m−n})] for ℓ ≥ 1 and
/// −Σ_{j≤n} ln a_j for ℓ = 0.
pub fn zeta_ell(j: &JacobiCoefficients, n: usize, ell: u32, m: usize) -> Result<f64> {
    if ell == 0 {
        return Ok(-(1..=n).map(|k| j.a(k).ln()).collect::<KahanSum>().value());
    }
    if m <= ell as usize + n {
        return Err(Error::InvalidArgument(format!(
            "zeta needs m > ell + n, got m={m}, ell={ell}, n={n}"
        )));
    }
    let full = chebyshev_trace(&j.truncate(m), ell);
    let stripped = chebyshev_trace(&j.strip(n).truncate(m - n), ell);
    Ok(2.0 / f64::from(ell) * (full - stripped))
}

/// Closed forms of ζ_ℓ^(n) for ℓ ≤ 2: −Σ ln a_j, Σ b_j and
/// Σ(½b_j² + a_j² − 1).
pub fn zeta_closed_form(j: &JacobiCoefficients, n: usize, ell: u32) -> Option<f64> {
    let term = |k: usize| -> f64 {
        let (a, b) = (j.a(k), j.b(k));
        match ell {
            0 => -a.ln(),
            1 => b,
            _ => 0.5 * b * b + (a * a - 1.0),
        }
    };
    (ell <= 2).then(|| (1..=n).map(term).collect::<KahanSum>().value())
}

/// Diagonal entry ⟨δ_j, T_ℓ(X) δ_j⟩, X = T/2, via the vector recurrence
/// restricted to the band |i − j| ≤ ℓ (0-indexed j).
fn chebyshev_diag(t: &Tridiagonal, ell: u32, j: usize) -> f64 {
    let l = ell as usize;
    let lo = j.saturating_sub(l);
    let hi = (j + l).min(t.dim() - 1);
    let w = hi - lo + 1;
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..w)
            .map(|i| {
                let g = lo + i;
                let mut s = t.diag[g] * v[i];
                if i > 0 {
                    s += t.off[g - 1] * v[i - 1];
                }
                if i + 1 < w {
                    s += t.off[g] * v[i + 1];
                }
                0.5 * s
            })
            .collect()
    };
    let mut prev = vec![0.0; w];
    prev[j - lo] = 1.0;
    if l == 0 {
        return 1.0;
    }
    let mut cur = apply(&prev);
    for _ in 1..l {
        let x = apply(&cur);
        let next: Vec<f64> = x.iter().zip(&prev).map(|(xv, p)| 2.0 * xv - p).collect();
        prev = cur;
        cur = next;
    }
    cur[j - lo]
}

/// Diagonal partial sums Σ_{j≤N} ⟨δ_j, B_ℓ δ_j⟩ of
/// B_ℓ = (2/ℓ)(T_ℓ(J/2) − T_ℓ(J₀/2)) at each cutoff N.
pub fn cond_trace_b(j: &JacobiCoefficients, ell: u32, cutoffs: &[usize]) -> Result<Vec<f64>> {
    if ell == 0 {
        return Err(Error::InvalidArgument("B_ell is defined for ell >= 1".into()));
    }
    let nmax = cutoffs.iter().copied().max().unwrap_or(0);
    if cutoffs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("cutoffs must be nondecreasing".into()));
    }
    let dim = nmax + ell as usize + 1;
    let tj = j.truncate(dim);
    let t0 = JacobiCoefficients::free().truncate(dim);
    let scale = 2.0 / f64::from(ell);
    let mut acc = KahanSum::default();
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut k = 0;
    for &n in cutoffs {
        while k < n {
            acc.add(scale * (chebyshev_diag(&tj, ell, k) - chebyshev_diag(&t0, ell, k)));
            k += 1;
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// The identities that can be checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Z = A₀ + 𝓔₀.
    C0,
    /// Z₂⁻ + 𝓔₂ = A₂.
    P2,
    /// Y_ℓ = c-Tr(B_ℓ) + X_ℓ^(∞).
    Case(u32),
    /// Z(J) = −ln a₁ + X₀^(1) + Z(J^(1)).
    Step0,
    /// Y_ℓ(J) = ζ_ℓ^(1) + X_ℓ^(1) + Y_ℓ(J^(1)).
    Step(u32),
    /// Z_ℓ^±(J) = −ln a₁ ∓ ½ζ_ℓ^(1) + X₀^(1) ∓ ½X_ℓ^(1) + Z_ℓ^±(J^(1)), ℓ odd.
    OneSided { ell: u32, plus: bool },
    /// Z_ℓ^−(J) = −ln a₁ + ½ζ_ℓ^(1) + X₀^(1) + ½X_ℓ^(1) + Z_ℓ^−(J^(1)), ℓ even.
    Quasi(u32),
    /// Z₁^+ = −Σ[ln a_n + ½b_n] + Σ[ln|β| + ½(β − 1/β)].
    Z1Plus,
    /// Z₁^− = −Σ[ln a_n − ½b_n] + Σ[ln|β| − ½(β − 1/β)].
    Z1Minus,
    /// max over ± of |Z_ℓ^± − (Z ∓ ½Y_ℓ)|.
    Consistency(u32),
}

impl Rule {
    /// Largest ℓ the rule touches.
    pub fn ell(&self) -> u32 {
        match *self {
            Rule::C0 | Rule::Step0 => 0,
            Rule::Z1Plus | Rule::Z1Minus => 1,
            Rule::P2 => 2,
            Rule::Case(l) | Rule::Step(l) | Rule::Quasi(l) | Rule::Consistency(l) => l,
            Rule::OneSided { ell, .. } => ell,
        }
    }

    /// C₀, P₂, Case ℓ = 1..3, the step rules, both Z₁^± rules and the
    /// consistency relations for ℓ ≤ 4.
    pub fn standard_set() -> Vec<Rule> {
        let mut v = vec![Rule::C0, Rule::P2];
        v.extend((1..=3).map(Rule::Case));
        v.push(Rule::Step0);
        v.extend((1..=3).map(Rule::Step));
        for ell in [1, 3] {
            v.push(Rule::OneSided { ell, plus: true });
            v.push(Rule::OneSided { ell, plus: false });
        }
        v.extend([Rule::Quasi(2), Rule::Quasi(4), Rule::Z1Plus, Rule::Z1Minus]);
        v.extend((1..=4).map(Rule::Consistency));
        v
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("rule {self}: {msg}")));
        match *self {
            Rule::Case(0) | Rule::Step(0) | Rule::Consistency(0) => bad("ell must be >= 1"),
            Rule::OneSided { ell, .. } if ell % 2 == 0 => bad("one-sided rules need odd ell"),
            Rule::Quasi(l) if l == 0 || l % 2 == 1 => bad("quasi rules need even ell >= 2"),
            r if r.ell() > MAX_ELL => bad("ell too large"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rule::C0 => write!(f, "c0"),
            Rule::P2 => write!(f, "p2"),
            Rule::Case(l) => write!(f, "case:{l}"),
            Rule::Step0 => write!(f, "step0"),
            Rule::Step(l) => write!(f, "step:{l}"),
            Rule::OneSided { ell, plus } => write!(f, "onesided{}:{ell}", if plus { '+' } else { '-' }),
            Rule::Quasi(l) => write!(f, "quasi:{l}"),
            Rule::Z1Plus => write!(f, "z1plus"),
            Rule::Z1Minus => write!(f, "z1minus"),
            Rule::Consistency(l) => write!(f, "consistency:{l}"),
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s.as_str(), None),
        };
        let ell = || -> Result<u32> {
            arg.ok_or_else(|| Error::InvalidArgument(format!("rule {s:?} needs :ell")))?
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad ell in rule {s:?}")))
        };
        let rule = match (head, arg) {
            ("c0", None) => Rule::C0,
            ("p2", None) => Rule::P2,
            ("step0", None) | ("step", Some("0")) => Rule::Step0,
            ("z1plus", None) => Rule::Z1Plus,
            ("z1minus", None) => Rule::Z1Minus,
            ("case", _) => Rule::Case(ell()?),
            ("step", _) => Rule::Step(ell()?),
            ("onesided+", _) => Rule::OneSided {
                ell: ell()?,
                plus: true,
            },
            ("onesided-", _) => Rule::OneSided {
                ell: ell()?,
                plus: false,
            },
            ("quasi", _) => Rule::Quasi(ell()?),
            ("consistency", _) => Rule::Consistency(ell()?),
            _ => return Err(Error::InvalidArgument(format!("unknown rule {s:?}"))),
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// Both sides of one identity and the resulting residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleCheck {
    pub rule: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub quad_error: f64,
    /// "quadrature" or "eigensolver", whichever bound is larger.
    pub dominant_error: String,
}

/// Shared ingredients for checking rules on one eventually free matrix.
#[derive(Clone, Debug)]
pub struct RuleContext {
    pub j: JacobiCoefficients,
    pub stripped: JacobiCoefficients,
    pub z: ZFunctionals,
    pub z_stripped: ZFunctionals,
    pub spectrum: EigenSpectrum,
    pub spectrum_stripped: EigenSpectrum,
    pub eigen: EigenFunctionals,
    pub lmax: u32,
}

impl RuleContext {
    pub fn new(j: &JacobiCoefficients, quad: &QuadratureSpec, opts: &SpectrumOptions, lmax: u32) -> Result<Self> {
        let lmax = lmax.max(2);
        let stripped = j.strip(1);
        let spectrum = eigs_outside(j, opts)?;
        let eigen = eigen_functionals(&spectrum);
        Ok(Self {
            z: z_functionals(j, quad, lmax)?,
            z_stripped: z_functionals(&stripped, quad, lmax)?,
            spectrum_stripped: eigs_outside(&stripped, opts)?,
            spectrum,
            eigen,
            stripped,
            j: j.clone(),
            lmax,
        })
    }

    fn zeta1(&self, ell: u32) -> Result<f64> {
        zeta_ell(&self.j, 1, ell, ell as usize + 2)
    }

    fn x1(&self, ell: u32) -> f64 {
        paired_difference(&self.spectrum, &self.spectrum_stripped, ell)
    }

    pub fn check(&self, rule: Rule) -> Result<RuleCheck> {
        rule.validate()?;
        if rule.ell() > self.lmax {
            return Err(Error::InvalidArgument(format!(
                "rule {rule} needs ell up to {}, context has {}",
                rule.ell(),
                self.lmax
            )));
        }
        let rank = self.j.rank().max(1);
        let a = a_functionals(&self.j, rank);
        let ln_a1 = self.j.a(1).ln();
        let qe = self.z.quad_error;
        let qe_both = self.z.quad_error + self.z_stripped.quad_error;
        let (lhs, rhs, quad_error) = match rule {
            Rule::C0 => (self.z.z, ATraces::last(&a.a0) + self.eigen.e0, qe),
            Rule::P2 => (self.z.z2_minus() + self.eigen.e2, ATraces::last(&a.a2), qe),
            Rule::Case(l) => {
                let ctr = cond_trace_b(&self.j, l, &[self.j.rank() + l as usize + 1])?[0];
                (self.z.y[&l], ctr + x_ell_infinity(&self.spectrum, l), 2.0 * qe)
            }
            Rule::Step0 => (self.z.z, -ln_a1 + self.x1(0) + self.z_stripped.z, qe_both),
            Rule::Step(l) => (
                self.z.y[&l],
                self.zeta1(l)? + self.x1(l) + self.z_stripped.y[&l],
                2.0 * qe_both,
            ),
            Rule::OneSided { ell, plus } => {
                let s = if plus { -0.5 } else { 0.5 };
                let side = |z: &ZFunctionals| if plus { z.z_plus[&ell] } else { z.z_minus[&ell] };
                (
                    side(&self.z),
                    -ln_a1 + s * self.zeta1(ell)? + self.x1(0) + s * self.x1(ell) + side(&self.z_stripped),
                    qe_both,
                )
            }
            Rule::Quasi(l) => (
                self.z.z_minus[&l],
                -ln_a1 + 0.5 * self.zeta1(l)? + self.x1(0) + 0.5 * self.x1(l) + self.z_stripped.z_minus[&l],
                qe_both,
            ),
            Rule::Z1Plus | Rule::Z1Minus => {
                let s = if rule == Rule::Z1Plus { 0.5 } else { -0.5 };
                let coeff: KahanSum = (1..=self.j.rank())
                    .map(|n| -(self.j.a(n).ln() + s * self.j.b(n)))
                    .collect();
                let eig: KahanSum = self
                    .spectrum
                    .points()
                    .map(|p| p.point.beta.abs().ln() + s * (p.point.beta - p.point.beta.recip()))
                    .collect();
                let lhs = if s > 0.0 { self.z.z1_plus() } else { self.z.z1_minus() };
                (lhs, coeff.value() + eig.value(), qe)
            }
            Rule::Consistency(l) => {
                let dp = self.z.z_plus[&l] - (self.z.z - 0.5 * self.z.y[&l]);
                let dm = self.z.z_minus[&l] - (self.z.z + 0.5 * self.z.y[&l]);
                let (lhs, rhs) = if dp.abs() >= dm.abs() {
                    (self.z.z_plus[&l], self.z.z - 0.5 * self.z.y[&l])
                } else {
                    (self.z.z_minus[&l], self.z.z + 0.5 * self.z.y[&l])
                };
                (lhs, rhs, 2.0 * qe)
            }
        };
        let eigen_error = self.spectrum.tol * (self.spectrum.len() + self.spectrum_stripped.len()) as f64 * 10.0;
        Ok(RuleCheck {
            rule: rule.to_string(),
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            quad_error,
            dominant_error: if quad_error >= eigen_error {
                "quadrature"
            } else {
                "eigensolver"
            }
            .into(),
        })
    }
}

/// One-shot check of a single rule.
pub fn check_rule(j: &JacobiCoefficients, rule: Rule, quad: &QuadratureSpec) -> Result<RuleCheck> {
    RuleContext::new(j, quad, &SpectrumOptions::default(), rule.ell())?.check(rule)
}

/// Finiteness verdict for a quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    Finite,
    DivergesPlus,
    DivergesMinus,
    Oscillates,
}

/// All functionals of one matrix plus rule residuals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumRuleReport {
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "Z1plus")]
    pub z1_plus: f64,
    #[serde(rename = "Z1minus")]
    pub z1_minus: f64,
    #[serde(rename = "Z2minus")]
    pub z2_minus: f64,
    #[serde(rename = "Y")]
    pub y: BTreeMap<String, f64>,
    #[serde(rename = "A0")]
    pub a0: Vec<f64>,
    #[serde(rename = "A1plus")]
    pub a1_plus: Vec<f64>,
    #[serde(rename = "A1minus")]
    pub a1_minus: Vec<f64>,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "E1plus")]
    pub e1_plus: f64,
    #[serde(rename = "E1minus")]
    pub e1_minus: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    pub gamma: Vec<f64>,
    pub zeta: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, Flag>,
    pub quad_error: BTreeMap<String, f64>,
    pub checks: Vec<RuleCheck>,
}

impl SumRuleReport {
    /// Rows `rule,lhs,rhs,residual,quad_error`.
    pub fn residual_csv(&self) -> String {
        let mut s = String::from("rule,lhs,rhs,residual,quad_error\n");
        for c in &self.checks {
            s.push_str(&format!(
                "{},{:?},{:?},{:?},{:?}\n",
                c.rule, c.lhs, c.rhs, c.residual, c.quad_error
            ));
        }
        s
    }
}

/// Assembles the full report and checks `rules`.
pub fn build_report(
    j: &JacobiCoefficients,
    rules: &[Rule],
    quad: &QuadratureSpec,
    opts: &SpectrumOptions,
) -> Result<SumRuleReport> {
    let lmax = rules.iter().map(Rule::ell).max().unwrap_or(0).max(4);
    let ctx = RuleContext::new(j, quad, opts, lmax)?;
    let horizon = j.rank().max(1);
    let traces = a_functionals(j, horizon);
    let mut zeta = BTreeMap::new();
    let mut depths = vec![1usize];
    if j.rank() > 1 {
        depths.push(j.rank());
    }
    for &n in &depths {
        for ell in 0..=lmax {
            zeta.insert(format!("{n},{ell}"), zeta_ell(j, n, ell, n + ell as usize + 1)?);
        }
    }
    let checks = rules.iter().map(|r| ctx.check(*r)).collect::<Result<Vec<_>>>()?;
    let z = &ctx.z;
    let finite = |names: &[&str]| names.iter().map(|n| (n.to_string(), Flag::Finite)).collect();
    Ok(SumRuleReport {
        z: z.z,
        z1_plus: z.z1_plus(),
        z1_minus: z.z1_minus(),
        z2_minus: z.z2_minus(),
        y: z.y.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        a2: ATraces::last(&traces.a2),
        a0: traces.a0,
        a1_plus: traces.a1_plus,
        a1_minus: traces.a1_minus,
        e0: ctx.eigen.e0,
        e1_plus: ctx.eigen.e1_plus,
        e1_minus: ctx.eigen.e1_minus,
        e2: ctx.eigen.e2,
        gamma: traces.gamma,
        zeta,
        residuals: checks.iter().map(|c| (c.rule.clone(), c.residual)).collect(),
        flags: finite(&[
            "Z", "Z1plus", "Z1minus", "Z2minus", "A0", "A1plus", "A1minus", "A2", "E0", "E1plus", "E1minus", "E2",
        ]),
        quad_error: [("Z", z.quad_error), ("Z_stripped", ctx.z_stripped.quad_error)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        checks,
    })
}
