//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands.
//!
//! All components share one panel set; a panel's error is the largest
//! |K15 − G7| over the components. Nodes are interior, so integrable log
//! singularities at panel ends are never evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Settings for the adaptive integrator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    /// Deepest bisection level of any panel.
    pub max_depth: u32,
    pub max_panels: usize,
    /// |integral| above this is reported as divergence.
    pub divergence_cap: f64,
    /// Mandatory interior breakpoints.
    #[serde(default)]
    pub splits: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 60,
            max_panels: 200_000,
            divergence_cap: 1e3,
            splits: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadResult {
    pub values: Vec<f64>,
    /// Per-component error estimates (sums of panel |K − G|).
    pub errors: Vec<f64>,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    values: Vec<f64>,
    errors: Vec<f64>,
    err: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn gk15<F>(f: &F, a: f64, b: f64, k: usize, buf: &mut [f64]) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; k];
    let mut gauss = vec![0.0; k];
    for (i, &x) in XGK.iter().enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for s in nodes {
            f(c + s * h * x, buf);
            for j in 0..k {
                let v = buf[j];
                if !v.is_finite() {
                    return Err(Error::DivergenceDetected {
                        quantity: format!("integrand component {j}"),
                        detail: format!("non-finite value at x = {}", c + s * h * x),
                    });
                }
                kron[j] += WGK[i] * v;
                if i % 2 == 1 {
                    gauss[j] += WG[i / 2] * v;
                }
            }
        }
    }
    let errs = kron.iter().zip(&gauss).map(|(kv, gv)| ((kv - gv) * h).abs()).collect();
    Ok((kron.into_iter().map(|v| v * h).collect(), errs))
}

/// Integrates the `k`-component function `f` over [a, b].
pub fn integrate_vec<F>(f: F, a: f64, b: f64, k: usize, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64, &mut [f64]),
{
    assert!(spec.abs_tol > 0.0, "quadrature tolerance must be positive");
    let mut cuts = vec![a];
    let mut interior: Vec<f64> = spec.splits.iter().copied().filter(|&s| s > a && s < b).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    cuts.extend(interior);
    cuts.push(b);

    let mut buf = vec![0.0; k];
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut make = |a: f64, b: f64, depth: u32, buf: &mut [f64]| -> Result<Panel> {
        let (values, errors) = gk15(&f, a, b, k, buf)?;
        let err = errors.iter().fold(0.0, |m: f64, e| m.max(*e));
        seq += 1;
        Ok(Panel {
            a,
            b,
            depth,
            values,
            errors,
            err,
            seq,
        })
    };
    for w in cuts.windows(2) {
        heap.push(make(w[0], w[1], 0, &mut buf)?);
    }

    let mut frozen: Vec<Panel> = Vec::new();
    let mut refinements = 0usize;
    let mut total: f64 = heap.iter().map(|p: &Panel| p.err).sum();
    while total > spec.abs_tol {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= spec.max_depth || mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            continue;
        }
        if heap.len() + frozen.len() + 2 > spec.max_panels {
            heap.push(worst);
            break;
        }
        let left = make(worst.a, mid, worst.depth + 1, &mut buf)?;
        let right = make(mid, worst.b, worst.depth + 1, &mut buf)?;
        total += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        refinements += 1;
        // resynchronize the running total against drift
        if refinements.is_multiple_of(256) {
            total = heap.iter().chain(frozen.iter()).map(|p| p.err).sum();
        }
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut values = vec![KahanSum::default(); k];
    let mut errors = vec![KahanSum::default(); k];
    let mut total_err = KahanSum::default();
    for p in &panels {
        for j in 0..k {
            values[j].add(p.values[j]);
            errors[j].add(p.errors[j]);
        }
        total_err.add(p.err);
    }
    let values: Vec<f64> = values.iter().map(KahanSum::value).collect();
    let errors: Vec<f64> = errors.iter().map(KahanSum::value).collect();
    if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| v.abs() > spec.divergence_cap) {
        return Err(Error::DivergenceDetected {
            quantity: format!("integral component {j}"),
            detail: format!("|value| = {v:e} exceeds cap {:e}", spec.divergence_cap),
        });
    }
    let worst = errors.iter().fold(0.0, |m: f64, e| m.max(*e));
    if worst > spec.abs_tol {
        return Err(Error::QuadFailure {
            estimate: worst,
            tolerance: spec.abs_tol,
        });
    }
    Ok(QuadResult {
        values,
        errors,
        panels: panels.len(),
    })
}

/// Scalar convenience wrapper: (value, error estimate).
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), a, b, 1, spec)?;
    Ok((r.values[0], r.errors[0]))
}
