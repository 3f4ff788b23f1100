//! Large-sample standard errors of the estimators, evaluated at population
//! values. Used to judge whether a sample-panel estimate is compatible with
//! its population counterpart.

use crate::classify::{adapt_threshold, CostPair};
use crate::error::{invalid, Result};
use crate::models::{DensityRatio, PopulationModel};
use crate::quantify::{TestEvaluator, TrainingRates};
use crate::shift::likelihood_term;

/// `sqrt(rate (1 - rate) / n)`
pub fn binomial_stderr(rate: f64, n: usize) -> f64 {
    let r = rate.clamp(0.0, 1.0);
    (r * (1.0 - r) / n as f64).sqrt()
}

/// Classify & Count on `n` test points.
pub fn cc_stderr(rate: f64, n: usize) -> f64 {
    binomial_stderr(rate, n)
}

/// Delta-method error of `(c - fpr) / (tpr - fpr)` when the test rate `c`
/// and both training rates are estimated from independent samples.
pub fn acc_stderr(
    test_rate: f64,
    rates: TrainingRates,
    n_test: usize,
    n_train0: usize,
    n_train1: usize,
) -> Result<f64> {
    let denom = rates.tpr - rates.fpr;
    if denom.abs() < 1e-12 {
        return Err(crate::Error::DegenerateClassifier(denom.abs()));
    }
    let q = (test_rate - rates.fpr) / denom;
    let var = binomial_stderr(test_rate, n_test).powi(2)
        + q * q * binomial_stderr(rates.tpr, n_train0).powi(2)
        + (1.0 - q) * (1.0 - q) * binomial_stderr(rates.fpr, n_train1).powi(2);
    Ok(var.sqrt() / denom.abs())
}

/// M-estimator error of the likelihood root: `1 / sqrt(n E_Q[psi(q)^2])`.
pub fn em_stderr(ev: &dyn TestEvaluator, ratio: &DensityRatio, q: f64, n: usize) -> Result<f64> {
    let info = ev.expect(&|x| likelihood_term(ratio.ln_eval(x), q).powi(2))?;
    if !(info > 0.0) {
        return Err(invalid("q", "zero Fisher information"));
    }
    Ok(1.0 / (n as f64 * info).sqrt())
}

/// One CDE-Iterate step: `q -> Q[g_q(X) = 0]` with `g_q` adapted to `q`.
pub fn cde_map(train: &PopulationModel, ev: &dyn TestEvaluator, q: f64) -> Result<f64> {
    Ok(ev.predicted_zero_rate(&adapt_threshold(train, q, CostPair::unit())?))
}

/// Central-difference slope of [`cde_map`], one-sided near the boundaries.
pub fn cde_map_slope(train: &PopulationModel, ev: &dyn TestEvaluator, q: f64) -> Result<f64> {
    const H: f64 = 1e-5;
    let lo = (q - H).max(H);
    let hi = (q + H).min(1.0 - H);
    if !(hi > lo) {
        return Err(invalid("q", "no room for a difference quotient"));
    }
    Ok((cde_map(train, ev, hi)? - cde_map(train, ev, lo)?) / (hi - lo))
}

/// Error of the second iterate `F(q0)` with `q0` itself a count on `n`
/// points; the two noise terms are added without assuming independence.
pub fn cde2_stderr(train: &PopulationModel, ev: &dyn TestEvaluator, q0: f64, n: usize) -> Result<f64> {
    let slope = cde_map_slope(train, ev, q0)?;
    let q1 = cde_map(train, ev, q0)?;
    Ok(slope.abs() * binomial_stderr(q0, n) + binomial_stderr(q1, n))
}

/// Standardised population residual `|F(q) - q| / se` at a sample limit.
///
/// A sample CDE-Iterate limit solves `F_n(q) = q`, so the population
/// residual at that point is pure counting noise. The standard error is
/// floored at one count so that boundary limits stay finite.
pub fn cde_limit_score(train: &PopulationModel, ev: &dyn TestEvaluator, q: f64, n: usize) -> Result<f64> {
    let f = cde_map(train, ev, q)?;
    let resid = (f - q).abs();
    if resid == 0.0 {
        return Ok(0.0);
    }
    Ok(resid / binomial_stderr(f, n).max(1.0 / n as f64))
}
