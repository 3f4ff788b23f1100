//! Cost-sensitive Bayes classifiers on a one-dimensional feature.
//!
//! With costs `c0` (predict 1 when the class is 0) and `c1` (predict 0 when
//! the class is 1) and training prevalence `p`, the minimiser of the
//! cost-weighted error is the set `{a1 f1 < a0 f0}` with `a0 = c0 p` and
//! `a1 = c1 (1 - p)`, i.e. the posterior rule `P[Y=0|x] > c1 / (c0 + c1)`.
//! Because every ratio in scope is monotone, the rule is stored as a cut
//! point in feature space.

use crate::error::{invalid, Result};
use crate::models::{Density, Orientation, PopulationModel};

/// Misclassification costs. `c0` is charged for predicting 1 on a class-0
/// instance, `c1` for predicting 0 on a class-1 instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPair {
    pub c0: f64,
    pub c1: f64,
}

impl CostPair {
    pub fn new(c0: f64, c1: f64) -> Result<Self> {
        if !(c0 >= 0.0 && c1 >= 0.0) || !(c0 + c1 > 0.0) || !(c0 + c1).is_finite() {
            return Err(invalid(
                "costs",
                format!("need c0, c1 >= 0 with c0 + c1 > 0, got ({c0}, {c1})"),
            ));
        }
        Ok(Self { c0, c1 })
    }

    pub fn unit() -> Self {
        Self { c0: 1.0, c1: 1.0 }
    }
}

/// Decision rule "class 0 iff x is on the class-0 side of `cut`".
///
/// Points exactly at the cut go to class 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdClassifier {
    pub cut: f64,
    pub orientation: Orientation,
    pub posterior_threshold: f64,
}

impl ThresholdClassifier {
    pub fn always_zero() -> Self {
        Self {
            cut: f64::INFINITY,
            orientation: Orientation::ZeroBelow,
            posterior_threshold: 0.0,
        }
    }

    pub fn always_one() -> Self {
        Self {
            cut: f64::NEG_INFINITY,
            orientation: Orientation::ZeroBelow,
            posterior_threshold: 1.0,
        }
    }

    pub fn is_always_zero(&self) -> bool {
        match self.orientation {
            Orientation::ZeroBelow => self.cut == f64::INFINITY,
            Orientation::ZeroAbove => self.cut == f64::NEG_INFINITY,
        }
    }

    pub fn is_always_one(&self) -> bool {
        match self.orientation {
            Orientation::ZeroBelow => self.cut == f64::NEG_INFINITY,
            Orientation::ZeroAbove => self.cut == f64::INFINITY,
        }
    }

    pub fn classify(&self, x: f64) -> u8 {
        let zero = match self.orientation {
            Orientation::ZeroBelow => x < self.cut,
            Orientation::ZeroAbove => x > self.cut,
        };
        if zero {
            0
        } else {
            1
        }
    }

    /// Probability that a draw from `d` is labelled 0.
    pub fn zero_probability(&self, d: &dyn Density) -> f64 {
        if self.is_always_zero() {
            return 1.0;
        }
        if self.is_always_one() {
            return 0.0;
        }
        let below = d.cdf(self.cut);
        match self.orientation {
            Orientation::ZeroBelow => below,
            Orientation::ZeroAbove => 1.0 - below,
        }
    }
}

pub fn classify(clf: &ThresholdClassifier, x: f64) -> u8 {
    clf.classify(x)
}

/// Rule `P[Y=0|x] > threshold` under the training posterior.
///
/// Thresholds at or above 1 give the constant class-1 rule and thresholds
/// at or below 0 the constant class-0 rule.
pub fn posterior_threshold_classifier(train: &PopulationModel, threshold: f64) -> Result<ThresholdClassifier> {
    if threshold.is_nan() {
        return Err(invalid("threshold", "NaN posterior threshold"));
    }
    if threshold >= 1.0 {
        return Ok(ThresholdClassifier {
            posterior_threshold: threshold,
            ..ThresholdClassifier::always_one()
        });
    }
    if threshold <= 0.0 {
        return Ok(ThresholdClassifier {
            posterior_threshold: threshold,
            ..ThresholdClassifier::always_zero()
        });
    }
    let p = train.prevalence0();
    let ratio_threshold = threshold / (1.0 - threshold) * (1.0 - p) / p;
    let cut = train.require_ratio()?.invert_threshold(ratio_threshold)?;
    Ok(ThresholdClassifier {
        cut: cut.cut,
        orientation: cut.orientation,
        posterior_threshold: threshold,
    })
}

/// Minimiser of `c1 P[g=0, Y=1] + c0 P[g=1, Y=0]` under the training model.
pub fn bayes_classifier(train: &PopulationModel, costs: CostPair) -> Result<ThresholdClassifier> {
    posterior_threshold_classifier(train, costs.c1 / (costs.c0 + costs.c1))
}

/// Training-posterior rule that is Bayes-optimal for a test population
/// with class-0 prevalence `q_hat`, assuming prior probability shift.
///
/// Out-of-range estimates are legal: `q_hat <= 0` gives the constant
/// class-1 rule, `q_hat >= 1` the constant class-0 rule.
pub fn adapt_threshold(train: &PopulationModel, q_hat: f64, costs: CostPair) -> Result<ThresholdClassifier> {
    if q_hat.is_nan() {
        return Err(invalid("q_hat", "NaN prevalence estimate"));
    }
    if q_hat <= 0.0 {
        return Ok(ThresholdClassifier::always_one());
    }
    if q_hat >= 1.0 {
        return Ok(ThresholdClassifier::always_zero());
    }
    let p = train.prevalence0();
    let shifted = CostPair {
        c0: costs.c0 * q_hat / p,
        c1: costs.c1 * (1.0 - q_hat) / (1.0 - p),
    };
    bayes_classifier(train, shifted)
}

/// `a0 P0[g = 1] + a1 P1[g = 0]` with `a0 = c0 p`, `a1 = c1 (1 - p)`.
pub fn cost_weighted_error(pop: &PopulationModel, clf: &ThresholdClassifier, costs: CostPair) -> f64 {
    let p = pop.prevalence0();
    let a0 = costs.c0 * p;
    let a1 = costs.c1 * (1.0 - p);
    a0 * (1.0 - clf.zero_probability(pop.class0().as_ref()))
        + a1 * clf.zero_probability(pop.class1().as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BinormalParams;

    fn train(p: f64) -> PopulationModel {
        PopulationModel::binormal(&BinormalParams::default(), p).unwrap()
    }

    fn cut_grid() -> Vec<ThresholdClassifier> {
        (0..200)
            .map(|i| -6.0 + 14.0 * i as f64 / 199.0)
            .map(|cut| ThresholdClassifier {
                cut,
                orientation: Orientation::ZeroBelow,
                posterior_threshold: f64::NAN,
            })
            .chain([ThresholdClassifier::always_zero(), ThresholdClassifier::always_one()])
            .collect()
    }

    #[test]
    fn min_error_rule_is_midpoint() {
        let clf = bayes_classifier(&train(0.5), CostPair::unit()).unwrap();
        assert!((clf.cut - 1.0).abs() < 1e-15);
        assert_eq!(clf.orientation, Orientation::ZeroBelow);
        assert_eq!(clf.classify(0.0), 0);
        assert_eq!(clf.classify(1.0), 1);
        assert_eq!(ThresholdClassifier::always_one().classify(-1e300), 1);
        assert_eq!(ThresholdClassifier::always_zero().classify(1e300), 0);
    }

    #[test]
    fn cde_step_threshold() {
        // a0 = 0.1655, a1 = 0.8345 at p = 0.5 means c0 = 0.331, c1 = 1.669
        let costs = CostPair::new(0.1655 / 0.5, 0.8345 / 0.5).unwrap();
        let clf = bayes_classifier(&train(0.5), costs).unwrap();
        assert!((clf.posterior_threshold - 0.8345).abs() < 1e-12);
        // inverting the logistic posterior: 2x - 2 = ln(0.1655 / 0.8345)
        let expected = ((0.1655f64 / 0.8345).ln() + 2.0) / 2.0;
        assert!((clf.cut - expected).abs() < 1e-12);
        assert!((clf.cut - 0.191).abs() < 1e-3);
    }

    #[test]
    fn adaptation_examples() {
        let tr = train(0.5);
        let clf = adapt_threshold(&tr, 0.1655, CostPair::unit()).unwrap();
        assert!((clf.posterior_threshold - 0.8345).abs() < 1e-12);
        let same = adapt_threshold(&tr, 0.5, CostPair::unit()).unwrap();
        assert_eq!(same, bayes_classifier(&tr, CostPair::unit()).unwrap());
        assert!(adapt_threshold(&tr, 0.0, CostPair::unit()).unwrap().is_always_one());
        assert!(adapt_threshold(&tr, -0.2, CostPair::unit()).unwrap().is_always_one());
        assert!(adapt_threshold(&tr, 1.3, CostPair::unit()).unwrap().is_always_zero());
    }

    #[test]
    fn adaptation_at_training_prevalence_is_bayes_for_any_costs() {
        for p in [0.2, 0.5, 0.7] {
            let tr = train(p);
            for costs in [CostPair::new(1.0, 3.0).unwrap(), CostPair::new(0.2, 0.9).unwrap()] {
                let a = adapt_threshold(&tr, p, costs).unwrap();
                let b = bayes_classifier(&tr, costs).unwrap();
                assert!((a.cut - b.cut).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bayes_rule_beats_cut_grid() {
        for (c0, c1, p) in [(1.0, 1.0, 0.5), (2.0, 0.5, 0.3), (0.1, 4.0, 0.8), (0.0, 1.0, 0.4)] {
            let costs = CostPair::new(c0, c1).unwrap();
            let tr = train(p);
            let best = bayes_classifier(&tr, costs).unwrap();
            let e_best = cost_weighted_error(&tr, &best, costs);
            for alt in cut_grid() {
                assert!(cost_weighted_error(&tr, &alt, costs) - e_best >= -1e-12);
            }
        }
    }

    #[test]
    fn adapted_rule_minimises_test_error_under_prior_shift() {
        let tr = train(0.5);
        for q in [0.05, 0.3, 0.9] {
            let test = tr.with_prevalence(q).unwrap();
            let clf = adapt_threshold(&tr, q, CostPair::unit()).unwrap();
            let e = cost_weighted_error(&test, &clf, CostPair::unit());
            for alt in cut_grid() {
                assert!(cost_weighted_error(&test, &alt, CostPair::unit()) - e >= -1e-12);
            }
        }
    }

    #[test]
    fn threshold_decreases_in_estimate() {
        let tr = train(0.5);
        let costs = CostPair::new(1.0, 2.0).unwrap();
        let ts: Vec<f64> = (1..100)
            .map(|i| adapt_threshold(&tr, i as f64 / 100.0, costs).unwrap().posterior_threshold)
            .collect();
        assert!(ts.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn invalid_costs() {
        assert!(CostPair::new(0.0, 0.0).is_err());
        assert!(CostPair::new(-1.0, 2.0).is_err());
        assert!(CostPair::new(f64::NAN, 1.0).is_err());
    }
}
