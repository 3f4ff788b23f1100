//! Quality of a prevalence estimate and of the classifier behind it.

use std::fmt;

use crate::classify::ThresholdClassifier;
use crate::error::{invalid, Result};
use crate::quantify::TestEvaluator;

/// `|est - q| / min(q, 1 - q)`, the larger of the two class-wise
/// relative errors.
pub fn relative_error(true_q: f64, estimate: f64) -> Result<f64> {
    if !(true_q > 0.0 && true_q < 1.0) {
        return Err(invalid("true_q", format!("must lie in (0, 1), got {true_q}")));
    }
    if !estimate.is_finite() {
        return Err(invalid("estimate", format!("not finite: {estimate}")));
    }
    Ok((estimate - true_q).abs() / true_q.min(1.0 - true_q))
}

/// F-measure for class 0. Undefined when the classifier never predicts
/// class 0, since precision then has no denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FMeasure {
    Value(f64),
    Undefined,
}

impl FMeasure {
    /// The value, with `NaN` standing in for undefined.
    pub fn as_f64(&self) -> f64 {
        match self {
            FMeasure::Value(v) => *v,
            FMeasure::Undefined => f64::NAN,
        }
    }
}

impl fmt::Display for FMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FMeasure::Value(v) => write!(f, "{v}"),
            FMeasure::Undefined => f.write_str("NaN"),
        }
    }
}

/// `Q[g(X) = Y]`
pub fn accuracy(ev: &dyn TestEvaluator, clf: &ThresholdClassifier) -> Result<f64> {
    let r = ev.labelled_rates(clf)?;
    let q = r.prevalence0;
    Ok(q * r.zero_given_zero + (1.0 - q) * (1.0 - r.zero_given_one))
}

/// `2 Q[g=0, Y=0] / (Q[g=0] + Q[Y=0])`
pub fn f_measure(ev: &dyn TestEvaluator, clf: &ThresholdClassifier) -> Result<FMeasure> {
    let r = ev.labelled_rates(clf)?;
    let q = r.prevalence0;
    let both = q * r.zero_given_zero;
    let predicted = both + (1.0 - q) * r.zero_given_one;
    if predicted <= 0.0 || q <= 0.0 {
        return Ok(FMeasure::Undefined);
    }
    Ok(FMeasure::Value(2.0 * both / (predicted + q)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub relative_error: f64,
    pub accuracy: f64,
    pub f_measure: FMeasure,
}

pub fn report(
    ev: &dyn TestEvaluator,
    clf: &ThresholdClassifier,
    true_q: f64,
    estimate: f64,
) -> Result<MetricReport> {
    Ok(MetricReport {
        relative_error: relative_error(true_q, estimate)?,
        accuracy: accuracy(ev, clf)?,
        f_measure: f_measure(ev, clf)?,
    })
}
