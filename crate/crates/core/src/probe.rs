//! Growth diagnostics along the truncation sequence J_N.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{JacobiCoefficients, Tail};
use crate::numeric::ls_slope;
use crate::quadrature::QuadratureSpec;
use crate::spectral::{eigen_functionals, eigs_outside, SpectrumOptions};
use crate::sumrules::{a_functionals, z_functionals, ATraces, Flag};

/// Relative part of the Cauchy threshold on successive differences.
pub const TOL_DIV_REL: f64 = 1e-3;
/// Absolute part of the Cauchy threshold on successive differences.
pub const TOL_DIV_ABS: f64 = 1e-4;

/// Column names of [`ProbeRow`], in CSV order.
pub const QUANTITIES: [&str; 14] = [
    "Z", "Z1plus", "Z1minus", "Z2minus", "Y1", "A0", "A1plus", "A1minus", "A2", "E0", "E1plus", "E1minus", "E2",
    "C0gap",
];

/// Functionals of J_N for one cutoff N.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Values in [`QUANTITIES`] order.
    pub values: Vec<f64>,
    pub quad_error: f64,
}

impl ProbeRow {
    pub fn get(&self, name: &str) -> f64 {
        let k = QUANTITIES.iter().position(|q| *q == name).expect("known quantity");
        self.values[k]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceProbe {
    pub rows: Vec<ProbeRow>,
    /// Least-squares slope of each quantity against ln N.
    pub slopes: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, Flag>,
}

impl DivergenceProbe {
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(name)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("N,{},quad_error\n", QUANTITIES.join(","));
        for r in &self.rows {
            s.push_str(&r.n.to_string());
            for v in &r.values {
                s.push_str(&format!(",{v:?}"));
            }
            s.push_str(&format!(",{:?}\n", r.quad_error));
        }
        s
    }
}

/// Finite when the last successive difference is below
/// TOL_DIV_REL·|v| + TOL_DIV_ABS; otherwise the sign pattern of the
/// differences over the second half decides.
pub fn classify_sequence(values: &[f64]) -> Flag {
    let n = values.len();
    if n < 2 {
        return Flag::Finite;
    }
    let last = values[n - 1];
    if (last - values[n - 2]).abs() < TOL_DIV_REL * last.abs() + TOL_DIV_ABS {
        return Flag::Finite;
    }
    let diffs: Vec<f64> = values[(n / 2).max(1) - 1..].windows(2).map(|w| w[1] - w[0]).collect();
    let diffs = if diffs.is_empty() {
        vec![last - values[n - 2]]
    } else {
        diffs
    };
    if diffs.iter().all(|d| *d > 0.0) {
        Flag::DivergesPlus
    } else if diffs.iter().all(|d| *d < 0.0) {
        Flag::DivergesMinus
    } else {
        Flag::Oscillates
    }
}

fn row(j: &JacobiCoefficients, n: usize, quad: &QuadratureSpec, opts: &SpectrumOptions) -> Result<ProbeRow> {
    let jn = j.truncation_sequence(n);
    let z = z_functionals(&jn, quad, 2)?;
    let e = eigen_functionals(&eigs_outside(&jn, opts)?);
    let a = a_functionals(&jn, n);
    let a0 = ATraces::last(&a.a0);
    let values = vec![
        z.z,
        z.z1_plus(),
        z.z1_minus(),
        z.z2_minus(),
        z.y[&1],
        a0,
        ATraces::last(&a.a1_plus),
        ATraces::last(&a.a1_minus),
        ATraces::last(&a.a2),
        e.e0,
        e.e1_plus,
        e.e1_minus,
        e.e2,
        z.z - (a0 + e.e0),
    ];
    Ok(ProbeRow {
        n,
        values,
        quad_error: z.quad_error,
    })
}

/// Evaluates the functionals of J_N for each cutoff N (increasing), fits
/// slopes against ln N and flags each quantity.
pub fn divergence_probe(
    j: &JacobiCoefficients,
    cutoffs: &[usize],
    quad: &QuadratureSpec,
    opts: &SpectrumOptions,
) -> Result<DivergenceProbe> {
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[1] <= w[0]) || cutoffs[0] == 0 {
        return Err(Error::InvalidArgument(
            "cutoffs must be positive and strictly increasing".into(),
        ));
    }
    if let Tail::Generated { cutoff, .. } = j.tail() {
        if let Some(&n) = cutoffs.iter().find(|&&n| n > *cutoff) {
            return Err(Error::InvalidArgument(format!(
                "cutoff {n} exceeds the materialized length {cutoff}"
            )));
        }
    }
    let rows = cutoffs
        .par_iter()
        .map(|&n| row(j, n, quad, opts))
        .collect::<Result<Vec<_>>>()?;
    let ln_n: Vec<f64> = cutoffs.iter().map(|&n| (n as f64).ln()).collect();
    let mut slopes = BTreeMap::new();
    let mut flags = BTreeMap::new();
    for (k, name) in QUANTITIES.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r.values[k]).collect();
        slopes.insert(
            name.to_string(),
            if col.len() >= 2 { ls_slope(&ln_n, &col) } else { 0.0 },
        );
        flags.insert(name.to_string(), classify_sequence(&col));
    }
    Ok(DivergenceProbe { rows, slopes, flags })
}

/// Cutoffs c, 2c, 4c, … up to and including `max`.
pub fn doubling_cutoffs(start: usize, max: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut n = start.max(1);
    while n < max {
        v.push(n);
        n *= 2;
    }
    v.push(max);
    v
}
