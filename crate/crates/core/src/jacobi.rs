//! Jacobi coefficient sequences: construction from families, stripping and
//! truncation.
//!
//! Sequences are indexed from 1 as in the three-term recurrence. Everything
//! past the stored prefix is free (a_n = 1, b_n = 0), so every value of
//! [`JacobiCoefficients`] is an eventually free matrix.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::tridiag::Tridiagonal;

/// Error term added to a Coulomb family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ErrorModel {
    #[default]
    None,
    /// E_a(n) = E_b(n) = gamma / (n + n₀)^p.
    Power { gamma: f64, p: f64 },
}

impl ErrorModel {
    fn eval(&self, shifted_n: f64) -> f64 {
        match *self {
            ErrorModel::None => 0.0,
            ErrorModel::Power { gamma, p } => gamma / shifted_n.powf(p),
        }
    }
}

fn default_amplitude() -> f64 {
    0.5
}

/// A rule generating a_n, b_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Listed values; missing entries are free.
    Explicit {
        #[serde(default)]
        a: Vec<f64>,
        #[serde(default)]
        b: Vec<f64>,
    },
    /// a_n = 1 + α/(n+n₀) + E_a(n), b_n = β/(n+n₀) + E_b(n).
    Coulomb {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        offset: usize,
        #[serde(default)]
        error: ErrorModel,
    },
    /// a_n = 1 + (−1)ⁿ α/(n+n₀), b_n = (−1)ⁿ β/(n+n₀).
    Alternating {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        offset: usize,
    },
    /// a_n = 1 + A·u_n·n^(−decay), b_n = A·v_n·n^(−decay) with u, v uniform
    /// on [−1, 1] from a seeded ChaCha8 stream.
    RandomDecay {
        seed: u64,
        decay: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

impl FamilySpec {
    pub fn coulomb(alpha: f64, beta: f64) -> Self {
        FamilySpec::Coulomb {
            alpha,
            beta,
            offset: 0,
            error: ErrorModel::None,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidFamily(format!("{name} must be finite")))
            }
        };
        match self {
            FamilySpec::Explicit { .. } => Ok(()),
            FamilySpec::Coulomb { alpha, beta, error, .. } => {
                finite(*alpha, "alpha")?;
                finite(*beta, "beta")?;
                if let ErrorModel::Power { gamma, p } = error {
                    finite(*gamma, "gamma")?;
                    finite(*p, "p")?;
                    if *p < 1.0 {
                        return Err(Error::InvalidFamily("error exponent p must be >= 1".into()));
                    }
                }
                Ok(())
            }
            FamilySpec::Alternating { alpha, beta, .. } => {
                finite(*alpha, "alpha")?;
                finite(*beta, "beta")
            }
            FamilySpec::RandomDecay { decay, amplitude, .. } => {
                finite(*decay, "decay")?;
                finite(*amplitude, "amplitude")
            }
        }
    }

    /// Default materialization length when a config gives none.
    pub fn default_cutoff(&self) -> usize {
        match self {
            FamilySpec::Explicit { a, b } => a.len().max(b.len()).max(1),
            _ => 1000,
        }
    }

    /// Smallest offset n₀ making every a_n positive for a Coulomb-type
    /// leading term α/(n+n₀) (error terms not included).
    pub fn minimal_offset(alpha: f64) -> usize {
        let mut n0 = 0usize;
        while 1.0 + alpha / (1.0 + n0 as f64) <= 0.0 {
            n0 += 1;
        }
        n0
    }

    fn materialize(&self, cutoff: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            FamilySpec::Explicit { a, b } => {
                let av = (0..cutoff).map(|i| a.get(i).copied().unwrap_or(1.0)).collect();
                let bv = (0..cutoff).map(|i| b.get(i).copied().unwrap_or(0.0)).collect();
                (av, bv)
            }
            FamilySpec::Coulomb {
                alpha,
                beta,
                offset,
                error,
            } => (1..=cutoff)
                .map(|n| {
                    let s = (n + offset) as f64;
                    let e = error.eval(s);
                    (1.0 + alpha / s + e, beta / s + e)
                })
                .unzip(),
            FamilySpec::Alternating { alpha, beta, offset } => (1..=cutoff)
                .map(|n| {
                    let s = (n + offset) as f64;
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    (1.0 + sign * alpha / s, sign * beta / s)
                })
                .unzip(),
            FamilySpec::RandomDecay { seed, decay, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (1..=cutoff)
                    .map(|n| {
                        let scale = amplitude * (n as f64).powf(-decay);
                        let u: f64 = rng.gen_range(-1.0..=1.0);
                        let v: f64 = rng.gen_range(-1.0..=1.0);
                        (1.0 + scale * u, scale * v)
                    })
                    .unzip()
            }
        }
    }
}

/// How the sequence continues past the stored prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// a_n = 1, b_n = 0 for n > rank.
    FreeBeyond(usize),
    /// Family values up to `cutoff`, free beyond.
    Generated { family: FamilySpec, cutoff: usize },
}

/// Jacobi parameters {a_n}, {b_n} of an eventually free matrix.
///
/// The stored prefix always has canonical length: its last entry differs
/// from the free values, or the prefix is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
    tail: Tail,
}

impl JacobiCoefficients {
    /// The free matrix J₀.
    pub fn free() -> Self {
        Self {
            a: Vec::new(),
            b: Vec::new(),
            tail: Tail::FreeBeyond(0),
        }
    }

    /// Finite-rank perturbation of J₀ from explicit lists. Lists of unequal
    /// length are padded with free values.
    pub fn from_lists(a: &[f64], b: &[f64]) -> Result<Self> {
        let len = a.len().max(b.len());
        let mut av: Vec<f64> = (0..len).map(|i| a.get(i).copied().unwrap_or(1.0)).collect();
        let mut bv: Vec<f64> = (0..len).map(|i| b.get(i).copied().unwrap_or(0.0)).collect();
        validate(&av, &bv)?;
        canonicalize(&mut av, &mut bv);
        let rank = av.len();
        Ok(Self {
            a: av,
            b: bv,
            tail: Tail::FreeBeyond(rank),
        })
    }

    /// Materializes `spec` for n ≤ cutoff; free beyond.
    pub fn build(spec: &FamilySpec, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
        }
        spec.validate()?;
        let (mut a, mut b) = spec.materialize(cutoff);
        validate(&a, &b)?;
        canonicalize(&mut a, &mut b);
        let tail = match spec {
            FamilySpec::Explicit { .. } => Tail::FreeBeyond(a.len()),
            _ => Tail::Generated {
                family: spec.clone(),
                cutoff,
            },
        };
        Ok(Self { a, b, tail })
    }

    /// Canonical rank r: a_n = 1 and b_n = 0 for all n > r.
    pub fn rank(&self) -> usize {
        self.a.len()
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn is_free(&self) -> bool {
        self.a.is_empty()
    }

    /// a_n, 1-indexed.
    pub fn a(&self, n: usize) -> f64 {
        assert!(n >= 1, "Jacobi parameters are indexed from 1");
        self.a.get(n - 1).copied().unwrap_or(1.0)
    }

    /// b_n, 1-indexed.
    pub fn b(&self, n: usize) -> f64 {
        assert!(n >= 1, "Jacobi parameters are indexed from 1");
        self.b.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Stored prefix a_1..a_r.
    pub fn a_prefix(&self) -> &[f64] {
        &self.a
    }

    /// Stored prefix b_1..b_r.
    pub fn b_prefix(&self) -> &[f64] {
        &self.b
    }

    pub fn sup_norms(&self) -> (f64, f64) {
        let amax = self.a.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let bmax = self.b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        (amax, bmax)
    }

    /// J^(n): the first n rows and columns removed.
    pub fn strip(&self, n: usize) -> Self {
        if n == 0 {
            return self.clone();
        }
        let start = n.min(self.rank());
        let a = self.a[start..].to_vec();
        let b = self.b[start..].to_vec();
        let rank = a.len();
        Self {
            a,
            b,
            tail: Tail::FreeBeyond(rank),
        }
    }

    /// Upper-left m×m block: diagonal b_1..b_m, off-diagonal a_1..a_{m−1}.
    pub fn truncate(&self, m: usize) -> Tridiagonal {
        assert!(m >= 1, "truncation dimension must be positive");
        let diag = (1..=m).map(|n| self.b(n)).collect();
        let off = (1..m).map(|n| self.a(n)).collect();
        Tridiagonal::new(diag, off)
    }

    /// J_n of the truncation sequence: a_ℓ → 1 for ℓ ≥ n and b_ℓ → 0 for
    /// ℓ ≥ n + 1.
    pub fn truncation_sequence(&self, n: usize) -> Self {
        let keep = n.min(self.rank());
        let mut a = self.a[..keep].to_vec();
        let mut b = self.b[..keep].to_vec();
        if n >= 1 && n <= a.len() {
            a[n - 1] = 1.0;
        }
        canonicalize(&mut a, &mut b);
        let rank = a.len();
        Self {
            a,
            b,
            tail: Tail::FreeBeyond(rank),
        }
    }
}

fn validate(a: &[f64], b: &[f64]) -> Result<()> {
    for (i, (&av, &bv)) in a.iter().zip(b).enumerate() {
        if !av.is_finite() || !bv.is_finite() {
            return Err(Error::NonFiniteCoefficient { index: i + 1 });
        }
        if av <= 0.0 {
            return Err(Error::NonPositiveCoefficient {
                index: i + 1,
                value: av,
            });
        }
    }
    Ok(())
}

fn canonicalize(a: &mut Vec<f64>, b: &mut Vec<f64>) {
    while let (Some(&al), Some(&bl)) = (a.last(), b.last()) {
        if al == 1.0 && bl == 0.0 {
            a.pop();
            b.pop();
        } else {
            break;
        }
    }
}

/// A family plus its materialization length, as read from a JSON config.
///
/// Accepted shapes: `{"kind": "coulomb", "alpha": .., "beta": .., "offset":
/// .., "cutoff": .., "error": {"type": "none"}}`, the same with `"family"` in
/// place of `"kind"`, or a bare `{"a": [..], "b": [..]}` for explicit lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

impl FamilyConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::InvalidFamily("config must be a JSON object".into()))?;
        if !obj.contains_key("kind") {
            match obj.remove("family") {
                Some(kind) => {
                    obj.insert("kind".into(), kind);
                }
                None => {
                    obj.insert("kind".into(), Value::String("explicit".into()));
                }
            }
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff.unwrap_or_else(|| self.family.default_cutoff())
    }

    pub fn build(&self) -> Result<JacobiCoefficients> {
        JacobiCoefficients::build(&self.family, self.cutoff())
    }

    /// True when the family is a materialized truncation of an infinite
    /// sequence rather than a genuinely finite-rank list.
    pub fn is_generated(&self) -> bool {
        !matches!(self.family, FamilySpec::Explicit { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_coulomb_is_free() {
        let j = JacobiCoefficients::build(&FamilySpec::coulomb(0.0, 0.0), 10).unwrap();
        assert_eq!(j.rank(), 0);
        assert_eq!(j.a(5), 1.0);
        assert_eq!(j.b(5), 0.0);
    }

    #[test]
    fn coulomb_diagonal_values() {
        let j = JacobiCoefficients::build(&FamilySpec::coulomb(0.0, 1.0), 3).unwrap();
        assert_eq!(j.rank(), 3);
        assert_eq!(j.b_prefix(), &[1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(j.a_prefix(), &[1.0, 1.0, 1.0]);
        assert_eq!(j.b(4), 0.0);
    }

    #[test]
    fn coulomb_rejects_vanishing_a1() {
        let err = JacobiCoefficients::build(&FamilySpec::coulomb(-1.0, 0.0), 1).unwrap_err();
        match err {
            Error::NonPositiveCoefficient { index, value } => {
                assert_eq!(index, 1);
                assert_eq!(value, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn offset_repairs_negative_alpha() {
        let spec = FamilySpec::Coulomb {
            alpha: -1.0,
            beta: 0.0,
            offset: FamilySpec::minimal_offset(-1.0),
            error: ErrorModel::None,
        };
        let j = JacobiCoefficients::build(&spec, 5).unwrap();
        assert_eq!(j.a(1), 0.5);
    }

    #[test]
    fn strip_examples() {
        assert_eq!(JacobiCoefficients::free().strip(5), JacobiCoefficients::free());
        let j = JacobiCoefficients::from_lists(&[2.0], &[]).unwrap();
        assert_eq!(j.strip(1), JacobiCoefficients::free());
        let c = JacobiCoefficients::from_lists(&[], &[1.0, 0.5, 1.0 / 3.0]).unwrap();
        let s = c.strip(2);
        assert_eq!(s.rank(), 1);
        assert_eq!(s.b_prefix(), &[1.0 / 3.0]);
    }

    #[test]
    fn truncate_examples() {
        let t = JacobiCoefficients::free().truncate(3);
        assert_eq!(t.diag, vec![0.0; 3]);
        assert_eq!(t.off, vec![1.0; 2]);
        let t = JacobiCoefficients::from_lists(&[], &[2.0]).unwrap().truncate(2);
        assert_eq!(t.diag, vec![2.0, 0.0]);
        assert_eq!(t.off, vec![1.0]);
        let j = JacobiCoefficients::build(&FamilySpec::coulomb(1.0, 0.0), 50).unwrap();
        let t = j.truncate(2);
        assert_eq!(t.diag, vec![0.0, 0.0]);
        assert_eq!(t.off, vec![2.0]);
    }

    #[test]
    fn truncation_sequence_replaces_last_a() {
        let j = JacobiCoefficients::from_lists(&[2.0, 3.0, 4.0], &[1.0, 1.0, 1.0]).unwrap();
        let j2 = j.truncation_sequence(2);
        assert_eq!(j2.a_prefix(), &[2.0, 1.0]);
        assert_eq!(j2.b_prefix(), &[1.0, 1.0]);
        assert!(j.truncation_sequence(0).is_free());
    }

    #[test]
    fn config_shapes() {
        let c = FamilyConfig::from_json_str(
            r#"{"kind": "coulomb", "alpha": 0.5, "beta": 1.0, "offset": 0, "cutoff": 1000, "error": {"type": "none"}}"#,
        )
        .unwrap();
        assert_eq!(c.cutoff(), 1000);
        assert_eq!(c.family, FamilySpec::coulomb(0.5, 1.0));

        let c = FamilyConfig::from_json_str(r#"{"family": "coulomb", "alpha": 0, "beta": 1}"#).unwrap();
        assert!(c.is_generated());

        let c = FamilyConfig::from_json_str(r#"{"b": [2]}"#).unwrap();
        let j = c.build().unwrap();
        assert_eq!(j.rank(), 1);
        assert_eq!(j.b(1), 2.0);

        let c = FamilyConfig::from_json_str(
            r#"{"kind": "coulomb", "alpha": 1, "beta": 0, "error": {"type": "power", "gamma": 0.5, "p": 2}}"#,
        )
        .unwrap();
        let j = JacobiCoefficients::build(&c.family, 2).unwrap();
        assert!((j.a(2) - (1.5 + 0.125)).abs() < 1e-15);

        assert!(FamilyConfig::from_json_str("[1, 2]").is_err());
        assert!(FamilyConfig::from_json_str(r#"{"kind": "bogus"}"#).is_err());
    }

    #[test]
    fn config_round_trip() {
        let c = FamilyConfig {
            family: FamilySpec::RandomDecay {
                seed: 9,
                decay: 1.5,
                amplitude: 0.25,
            },
            cutoff: Some(40),
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(FamilyConfig::from_json_str(&text).unwrap(), c);
    }

    fn arb_jacobi() -> impl Strategy<Value = JacobiCoefficients> {
        (0usize..10)
            .prop_flat_map(|r| {
                (
                    proptest::collection::vec(0.3f64..3.0, r),
                    proptest::collection::vec(-3.0f64..3.0, r),
                )
            })
            .prop_map(|(a, b)| JacobiCoefficients::from_lists(&a, &b).unwrap())
    }

    proptest! {
        #[test]
        fn strip_composes(j in arb_jacobi(), n in 0usize..12, k in 0usize..12) {
            prop_assert_eq!(j.strip(n).strip(k), j.strip(n + k));
        }

        #[test]
        fn strip_at_rank_is_free(j in arb_jacobi()) {
            prop_assert!(j.strip(j.rank()).is_free());
        }

        #[test]
        fn truncate_of_strip_is_lower_block(j in arb_jacobi(), n in 0usize..12, m in 1usize..15) {
            let small = j.strip(n).truncate(m);
            let big = j.truncate(m + n);
            prop_assert_eq!(&small.diag[..], &big.diag[n..]);
            prop_assert_eq!(&small.off[..], &big.off[n..]);
        }

        #[test]
        fn build_is_deterministic(seed in 0u64..1000, decay in 0.5f64..3.0) {
            let spec = FamilySpec::RandomDecay { seed, decay, amplitude: 0.5 };
            prop_assert_eq!(
                JacobiCoefficients::build(&spec, 64).unwrap(),
                JacobiCoefficients::build(&spec, 64).unwrap()
            );
        }
    }
}
