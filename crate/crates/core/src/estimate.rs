//! Ratio curves and growth-exponent regression.
//!
//! A [`RatioCurve`] records, for each exponent `p`, the largest ratio a
//! family of test functions produces. These are lower bounds for best
//! constants; [`fit_exponent`] turns a curve into a log-log slope.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// `c`: `||Op f||_p / ||f||_p`; `t`: `||f||_p / ||Op f||_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RatioKind {
    Cotype,
    Type,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioPoint {
    pub p: f64,
    pub value: f64,
    pub error: f64,
    /// Index of the family member attaining the max.
    pub argmax: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioCurve {
    pub operator: String,
    pub family: String,
    pub kind: RatioKind,
    pub points: Vec<RatioPoint>,
}

impl RatioCurve {
    pub fn ps(&self) -> Vec<f64> {
        self.points.iter().map(|q| q.p).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|q| q.value).collect()
    }

    pub fn value_at(&self, p: f64) -> Option<f64> {
        self.points.iter().find(|q| q.p == p).map(|q| q.value)
    }
}

/// One measured member: `||Op f||_p`, `||f||_p` and a quadrature error tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub op_norm: f64,
    pub f_norm: f64,
    pub error: f64,
}

/// Builds a curve by maximizing the ratio over the family at each `p`.
/// `measure(member, p)` is called once per (member, p) pair.
pub fn ratio_curve(
    operator: &str,
    family: &str,
    members: usize,
    ps: &[f64],
    kind: RatioKind,
    mut measure: impl FnMut(usize, f64) -> Result<Measurement>,
) -> Result<RatioCurve> {
    if members == 0 {
        return Err(Error::Degenerate(format!("family '{family}' is empty")));
    }
    let mut points = Vec::with_capacity(ps.len());
    for &p in ps {
        let mut best: Option<RatioPoint> = None;
        for i in 0..members {
            let m = measure(i, p)?;
            let ratio = match kind {
                RatioKind::Cotype => m.op_norm / m.f_norm,
                RatioKind::Type => m.f_norm / m.op_norm,
            };
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(Error::Degenerate(format!(
                    "member {i} of '{family}' gives ratio {ratio} at p = {p}"
                )));
            }
            if best.as_ref().map_or(true, |b| ratio > b.value) {
                best = Some(RatioPoint {
                    p,
                    value: ratio,
                    error: m.error,
                    argmax: i,
                });
            }
        }
        points.push(best.expect("family is nonempty"));
    }
    Ok(RatioCurve {
        operator: operator.into(),
        family: family.into(),
        kind,
        points,
    })
}

/// Regressor for a growth fit: `log p` as `p -> inf`, `log p'` as `p -> 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Regime {
    PToInfinity,
    PToOne,
}

impl Regime {
    pub fn regressor(self, p: f64) -> f64 {
        match self {
            Regime::PToInfinity => libm::log(p),
            Regime::PToOne => libm::log(conjugate(p)),
        }
    }
}

/// Conjugate exponent `p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentFit {
    pub regime: Regime,
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared residuals in log space.
    pub residual: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl ExponentFit {
    pub fn slope_within(&self, lo: f64, hi: f64) -> bool {
        (lo..=hi).contains(&self.slope)
    }
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, residual sum of squares)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - slope * x - intercept;
            e * e
        })
        .sum();
    (slope, intercept, residual)
}

pub const MIN_FIT_POINTS: usize = 4;

/// Fits raw `(p, value)` samples inside `window` (inclusive).
pub fn fit_points(ps: &[f64], values: &[f64], regime: Regime, window: (f64, f64)) -> Result<ExponentFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = ps
        .iter()
        .zip(values)
        .filter(|(p, _)| **p >= window.0 && **p <= window.1)
        .map(|(&p, &v)| (regime.regressor(p), libm::log(v)))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            need: MIN_FIT_POINTS,
            got: xs.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!("cannot fit nonpositive value {v}")));
    }
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    Ok(ExponentFit {
        regime,
        slope,
        intercept,
        residual,
        window,
        points: xs.len(),
    })
}

pub fn fit_exponent(curve: &RatioCurve, regime: Regime, window: (f64, f64)) -> Result<ExponentFit> {
    fit_points(&curve.ps(), &curve.values(), regime, window)
}

/// How a verdict row resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Outcome {
    Pass,
    Fail,
    /// No claim to test; the curve is reported only.
    Exploratory,
}

pub const EXPLORATORY_TAG: &str = "exploratory \u{2014} no paper verdict";

/// One claim check: what was measured, the window it had to fall in, and the result.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdict {
    pub experiment: String,
    pub citation: String,
    /// Acceptance window for `observed`, if any.
    pub window: Option<(f64, f64)>,
    pub slope: Option<f64>,
    pub observed: f64,
    pub outcome: Outcome,
}

impl Verdict {
    /// Passes iff `observed` lies in `window`.
    pub fn windowed(experiment: &str, citation: &str, observed: f64, window: (f64, f64), slope: Option<f64>) -> Self {
        let pass = observed >= window.0 && observed <= window.1;
        Self {
            experiment: experiment.into(),
            citation: citation.into(),
            window: Some(window),
            slope,
            observed,
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        }
    }

    pub fn exploratory(experiment: &str, observed: f64, slope: Option<f64>) -> Self {
        Self {
            experiment: experiment.into(),
            citation: EXPLORATORY_TAG.into(),
            window: None,
            slope,
            observed,
            outcome: Outcome::Exploratory,
        }
    }

    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Fail
    }
}

/// Everything one experiment produced.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentOutcome {
    pub name: String,
    pub curves: Vec<RatioCurve>,
    pub fits: Vec<ExponentFit>,
    pub verdicts: Vec<Verdict>,
}

pub const REPORT_SCHEMA: &str = "lpsq-report/1";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantReport {
    pub schema: String,
    pub experiments: Vec<String>,
    /// `(experiment, curve)` rows.
    pub curves: Vec<(String, RatioCurve)>,
    pub fits: Vec<(String, ExponentFit)>,
    pub verdicts: Vec<Verdict>,
}

impl ConstantReport {
    pub fn passed(&self) -> bool {
        !self.verdicts.iter().any(Verdict::failed)
    }
}

/// Flattens experiment outcomes into one report, preserving order.
pub fn constant_report(outcomes: &[ExperimentOutcome]) -> ConstantReport {
    let mut report = ConstantReport {
        schema: REPORT_SCHEMA.into(),
        experiments: Vec::new(),
        curves: Vec::new(),
        fits: Vec::new(),
        verdicts: Vec::new(),
    };
    for o in outcomes {
        report.experiments.push(o.name.clone());
        report.curves.extend(o.curves.iter().map(|c| (o.name.clone(), c.clone())));
        report.fits.extend(o.fits.iter().map(|f| (o.name.clone(), f.clone())));
        report.verdicts.extend(o.verdicts.iter().cloned());
    }
    report
}
