//! Szegő-condition regions of Coulomb families in the (α, β) plane.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{ErrorModel, FamilySpec, JacobiCoefficients};
use crate::numeric::ls_slope;
use crate::sumrules::a_functionals;

/// Default |slope| separating growth from boundedness.
pub const TOL_SLOPE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LabelSource {
    Predicted,
    Empirical,
}

/// Verdicts at +2 and −2, the predicted pair, and slope diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionLabel {
    pub alpha: f64,
    pub beta: f64,
    pub at_plus2: Verdict,
    pub at_minus2: Verdict,
    pub predicted: (Verdict, Verdict),
    pub source: LabelSource,
    /// Per side: the cell lies in the boundary band or the slope is a tie,
    /// so the verdict copies the prediction.
    pub ambiguous: (bool, bool),
    pub slope_plus: f64,
    pub slope_minus: f64,
}

impl RegionLabel {
    pub fn agrees(&self) -> bool {
        (self.at_plus2, self.at_minus2) == self.predicted
    }
}

/// Holds at ±2 iff 2α ± β ≥ 0.
pub fn predicted_label(alpha: f64, beta: f64) -> (Verdict, Verdict) {
    let v = |x: f64| if x >= 0.0 { Verdict::Holds } else { Verdict::Fails };
    (v(2.0 * alpha + beta), v(2.0 * alpha - beta))
}

/// Region letter: (a) fails at both ends, (b) holds at both, (c) holds
/// at +2 only, (d) holds at −2 only.
pub fn region(alpha: f64, beta: f64) -> char {
    match predicted_label(alpha, beta) {
        (Verdict::Fails, Verdict::Fails) => 'a',
        (Verdict::Holds, Verdict::Holds) => 'b',
        (Verdict::Holds, Verdict::Fails) => 'c',
        (Verdict::Fails, Verdict::Holds) => 'd',
    }
}

/// Coulomb family a_n = 1 + α/(n+n₀), b_n = β/(n+n₀) with the smallest
/// admissible offset.
pub fn coulomb_family(alpha: f64, beta: f64) -> FamilySpec {
    FamilySpec::Coulomb {
        alpha,
        beta,
        offset: FamilySpec::minimal_offset(alpha),
        error: ErrorModel::None,
    }
}

/// Fits −Σ_{j≤n}(a_j − 1 ± ½b_j) against ln n over n ∈ [N/2, N].
/// Fails at ±2 when the slope exceeds `tol_slope`, holds when it is below
/// −tol_slope; ties and cells with |2α ± β| < 4·tol_slope copy the
/// prediction and are marked ambiguous.
pub fn classify_region(alpha: f64, beta: f64, n: usize, tol_slope: f64) -> Result<RegionLabel> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!(
            "classification needs N >= 100, got {n}"
        )));
    }
    let j = JacobiCoefficients::build(&coulomb_family(alpha, beta), n)?;
    let t = a_functionals(&j, n);
    let start = n / 2;
    let x: Vec<f64> = (start..=n).map(|k| (k as f64).ln()).collect();
    let slope_plus = ls_slope(&x, &t.a1_plus[start - 1..]);
    let slope_minus = ls_slope(&x, &t.a1_minus[start - 1..]);
    let predicted = predicted_label(alpha, beta);
    let decide = |slope: f64, margin: f64, pred: Verdict| -> (Verdict, bool) {
        if margin.abs() < 4.0 * tol_slope - 1e-9 {
            (pred, true)
        } else if slope > tol_slope {
            (Verdict::Fails, false)
        } else if slope < -tol_slope {
            (Verdict::Holds, false)
        } else {
            (pred, true)
        }
    };
    let (at_plus2, amb_p) = decide(slope_plus, 2.0 * alpha + beta, predicted.0);
    let (at_minus2, amb_m) = decide(slope_minus, 2.0 * alpha - beta, predicted.1);
    Ok(RegionLabel {
        alpha,
        beta,
        at_plus2,
        at_minus2,
        predicted,
        source: LabelSource::Empirical,
        ambiguous: (amb_p, amb_m),
        slope_plus,
        slope_minus,
    })
}

/// A range `min:max:step` with values min + i·step ≤ max.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.min + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

impl FromStr for Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("range must be min:max:step, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let r = Range {
            min: v[0],
            max: v[1],
            step: v[2],
        };
        if !(r.step > 0.0) || !r.min.is_finite() || !r.max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "range step must be positive, got {s:?}"
            )));
        }
        if r.max < r.min {
            return Err(Error::InvalidArgument(format!("range max below min in {s:?}")));
        }
        Ok(r)
    }
}

/// Labels of a rectangular grid, row-major in α then β.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub cells: Vec<RegionLabel>,
}

/// Classifies every grid cell in parallel; output order is row-major.
pub fn scan(alpha: &Range, beta: &Range, n: usize, tol_slope: f64) -> Result<ScanGrid> {
    let alphas = alpha.values();
    let betas = beta.values();
    let pairs: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(a, b)| classify_region(a, b, n, tol_slope))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanGrid { alphas, betas, cells })
}

impl ScanGrid {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,beta,pred_plus,pred_minus,emp_plus,emp_minus,slope_plus,slope_minus\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{:?},{:?},{},{},{},{},{:?},{:?}",
                c.alpha,
                c.beta,
                c.predicted.0.as_str(),
                c.predicted.1.as_str(),
                c.at_plus2.as_str(),
                c.at_minus2.as_str(),
                c.slope_plus,
                c.slope_minus
            );
        }
        s
    }

    /// Heat map: green where empirical and predicted agree, red where they
    /// differ, grey where either side is ambiguous. α runs left to right,
    /// β bottom to top.
    pub fn to_svg(&self) -> String {
        let cell = 24.0;
        let (na, nb) = (self.alphas.len(), self.betas.len());
        let (w, h) = (cell * na as f64 + 80.0, cell * nb as f64 + 60.0);
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        );
        for (k, c) in self.cells.iter().enumerate() {
            let (ia, ib) = (k / nb, k % nb);
            let x = 60.0 + cell * ia as f64;
            let y = 20.0 + cell * (nb - 1 - ib) as f64;
            let fill = if c.ambiguous.0 || c.ambiguous.1 {
                "#bbbbbb"
            } else if c.agrees() {
                "#4caf50"
            } else {
                "#e53935"
            };
            let _ = writeln!(
                s,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{fill}\" stroke=\"white\"><title>alpha={} beta={} region {}</title></rect>",
                c.alpha,
                c.beta,
                region(c.alpha, c.beta)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">alpha</text>",
            60.0 + cell * na as f64 / 2.0,
            h - 10.0
        );
        let _ = writeln!(s, "<text x=\"10\" y=\"{}\">beta</text>", 20.0 + cell * nb as f64 / 2.0);
        s.push_str("</svg>\n");
        s
    }
}

/// Minimal SVG line plot of several series against a shared x axis.
pub fn svg_line_plot(title: &str, x: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let finite = |v: &f64| v.is_finite();
    let (xmin, xmax) = bounds(x.iter().copied().filter(finite));
    let (ymin, ymax) = bounds(series.iter().flat_map(|(_, v)| v.iter().copied()).filter(finite));
    let sx = |v: f64| pad + (v - xmin) / (xmax - xmin) * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - (v - ymin) / (ymax - ymin) * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n<text x=\"{pad}\" y=\"20\">{title}</text>\n"
    );
    let _ = writeln!(
        s,
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>",
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = colors[k % colors.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| format!("{:.2},{:.2}", sx(*a), sy(*b)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>",
            w - pad + 4.0,
            pad + 14.0 * k as f64
        );
    }
    let _ = writeln!(s, "<text x=\"{pad}\" y=\"{}\">{xmin:.4}</text>", h - pad + 14.0);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\">{xmax:.4}</text>",
        w - pad - 30.0,
        h - pad + 14.0
    );
    let _ = writeln!(s, "<text x=\"2\" y=\"{}\">{ymin:.4}</text>", h - pad);
    let _ = writeln!(s, "<text x=\"2\" y=\"{}\">{ymax:.4}</text>", pad + 4.0);
    s.push_str("</svg>\n");
    s
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_conventions() {
        assert_eq!(region(-1.0, 0.0), 'a');
        assert_eq!(region(1.0, 0.0), 'b');
        assert_eq!(region(0.0, 0.0), 'b');
        assert_eq!(region(0.0, 1.0), 'c');
        assert_eq!(region(0.0, -1.0), 'd');
        // β = −2α with β > 0 belongs to (c); β = 2α with β < 0 to (d)
        assert_eq!(region(-0.5, 1.0), 'c');
        assert_eq!(region(-0.5, -1.0), 'd');
    }

    #[test]
    fn classification_examples() {
        let l = classify_region(0.0, 1.0, 10_000, TOL_SLOPE).unwrap();
        assert_eq!((l.at_plus2, l.at_minus2), (Verdict::Holds, Verdict::Fails));
        assert!((l.slope_minus - 0.5).abs() < 0.01);
        let l = classify_region(1.0, 0.0, 10_000, TOL_SLOPE).unwrap();
        assert_eq!((l.at_plus2, l.at_minus2), (Verdict::Holds, Verdict::Holds));
        let l = classify_region(-1.0, 0.0, 10_000, TOL_SLOPE).unwrap();
        assert_eq!((l.at_plus2, l.at_minus2), (Verdict::Fails, Verdict::Fails));
        assert!(classify_region(0.0, 0.0, 99, TOL_SLOPE).is_err());
    }

    #[test]
    fn ranges() {
        let r: Range = "-1:1:0.5".parse().unwrap();
        assert_eq!(r.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let r: Range = "0.3:0.3:1".parse().unwrap();
        assert_eq!(r.values(), vec![0.3]);
        assert!("0:1:0".parse::<Range>().is_err());
        assert!("0:1:-1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
    }
}
