//! Prevalence estimators: Classify & Count, CDE-Iterate, Adjusted Classify
//! & Count and the maximum-likelihood (EM) estimator.
//!
//! Each estimator reads the test set only through a [`TestEvaluator`], so
//! the same code runs on a whole population and on a finite sample.

use std::cell::Cell;
use std::fmt;

use crate::classify::{adapt_threshold, bayes_classifier, CostPair, ThresholdClassifier};
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::models::{DensityRatio, PopulationModel};
use crate::numerics::{find_root_bracketed, Bracket, QuadratureSpec};
use crate::sampling::LabeledDataset;
use crate::shift::likelihood_term;

/// Class-conditional rates of a classifier on a labelled test set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelledRates {
    /// `Q[g = 0 | Y = 0]`
    pub zero_given_zero: f64,
    /// `Q[g = 0 | Y = 1]`
    pub zero_given_one: f64,
    /// `Q[Y = 0]`
    pub prevalence0: f64,
}

/// Read access to a test distribution.
///
/// `predicted_zero_rate` and `expect` see features only; `labelled_rates`
/// is for evaluation metrics and may refuse when labels are hidden.
pub trait TestEvaluator: Sync {
    /// `Q[g(X) = 0]`
    fn predicted_zero_rate(&self, clf: &ThresholdClassifier) -> f64;
    /// `E_Q[f(X)]`
    fn expect(&self, f: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64>;
    fn labelled_rates(&self, clf: &ThresholdClassifier) -> Result<LabelledRates>;
}

/// Exact evaluation on a population via CDFs and quadrature.
#[derive(Debug, Clone)]
pub struct PopulationEvaluator {
    pub model: PopulationModel,
    pub spec: QuadratureSpec,
}

impl PopulationEvaluator {
    pub fn new(model: PopulationModel) -> Self {
        Self {
            model,
            spec: QuadratureSpec::default(),
        }
    }
}

impl TestEvaluator for PopulationEvaluator {
    fn predicted_zero_rate(&self, clf: &ThresholdClassifier) -> f64 {
        let r = self.labelled_rates(clf).expect("population rates are always available");
        r.prevalence0 * r.zero_given_zero + (1.0 - r.prevalence0) * r.zero_given_one
    }

    fn expect(&self, f: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
        self.model.expect(f, &self.spec)
    }

    fn labelled_rates(&self, clf: &ThresholdClassifier) -> Result<LabelledRates> {
        Ok(LabelledRates {
            zero_given_zero: clf.zero_probability(self.model.class0().as_ref()),
            zero_given_one: clf.zero_probability(self.model.class1().as_ref()),
            prevalence0: self.model.prevalence0(),
        })
    }
}

/// Empirical evaluation on a finite sample.
#[derive(Debug, Clone)]
pub struct SampleEvaluator {
    dataset: LabeledDataset,
    labels_hidden: bool,
}

impl SampleEvaluator {
    pub fn new(dataset: LabeledDataset) -> Result<Self> {
        if dataset.is_empty() {
            return Err(invalid("dataset", "empty sample"));
        }
        Ok(Self {
            dataset,
            labels_hidden: false,
        })
    }

    /// Evaluator that refuses label-based queries.
    pub fn hidden(dataset: LabeledDataset) -> Result<Self> {
        let mut e = Self::new(dataset)?;
        e.labels_hidden = true;
        Ok(e)
    }

    pub fn dataset(&self) -> &LabeledDataset {
        &self.dataset
    }

    pub fn len(&self) -> usize {
        self.dataset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dataset.is_empty()
    }
}

impl TestEvaluator for SampleEvaluator {
    fn predicted_zero_rate(&self, clf: &ThresholdClassifier) -> f64 {
        let k = exec::count_where(self.dataset.features(), |&x| clf.classify(x) == 0);
        k as f64 / self.dataset.len() as f64
    }

    fn expect(&self, f: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
        let s = exec::sum_by(self.dataset.features(), |&x| f(x));
        if !s.is_finite() {
            return Err(Error::NonFinite { x: f64::NAN, value: s });
        }
        Ok(s / self.dataset.len() as f64)
    }

    fn labelled_rates(&self, clf: &ThresholdClassifier) -> Result<LabelledRates> {
        if self.labels_hidden {
            return Err(Error::LabelsHidden);
        }
        let (mut n0, mut n1, mut k0, mut k1) = (0usize, 0usize, 0usize, 0usize);
        for (&x, &y) in self.dataset.features().iter().zip(self.dataset.labels()) {
            let zero = clf.classify(x) == 0;
            if y == 0 {
                n0 += 1;
                k0 += zero as usize;
            } else {
                n1 += 1;
                k1 += zero as usize;
            }
        }
        let rate = |k: usize, n: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Ok(LabelledRates {
            zero_given_zero: rate(k0, n0),
            zero_given_one: rate(k1, n1),
            prevalence0: n0 as f64 / self.dataset.len() as f64,
        })
    }
}

/// Estimation approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Classify & Count, the first CDE-Iterate step.
    Cc,
    /// Second CDE-Iterate step.
    Cde2,
    /// Converged CDE-Iterate.
    CdeInf,
    Acc,
    Em,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Cc, Method::Cde2, Method::CdeInf, Method::Acc, Method::Em];

    /// Row label used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            Method::Cc => "CDE1",
            Method::Cde2 => "CDE2",
            Method::CdeInf => "CDEinf",
            Method::Acc => "ACC",
            Method::Em => "EM",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.label() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    /// `E_Q[R] <= 1`; the likelihood is maximised at 0.
    BoundaryLow,
    /// `E_Q[1/R] <= 1`; the likelihood is maximised at 1.
    BoundaryHigh,
    /// Unclamped value outside `[0, 1]`.
    RawOutOfRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrevalenceEstimate {
    pub value: f64,
    pub method: Method,
    /// CDE-Iterate iterates `q_0, q_1, ...`; empty for other methods.
    pub trace: Vec<f64>,
    pub status: Status,
}

impl PrevalenceEstimate {
    fn plain(value: f64, method: Method, status: Status) -> Self {
        Self {
            value,
            method,
            trace: Vec::new(),
            status,
        }
    }
}

/// Share of the test set the classifier labels 0.
pub fn classify_and_count(ev: &dyn TestEvaluator, clf: &ThresholdClassifier) -> PrevalenceEstimate {
    PrevalenceEstimate::plain(ev.predicted_zero_rate(clf), Method::Cc, Status::Converged)
}

/// Training-set true and false positive rates, with class 0 as positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingRates {
    /// `P[g = 0 | Y = 0]`
    pub tpr: f64,
    /// `P[g = 0 | Y = 1]`
    pub fpr: f64,
}

pub fn training_rates(train: &PopulationModel, clf: &ThresholdClassifier) -> TrainingRates {
    TrainingRates {
        tpr: clf.zero_probability(train.class0().as_ref()),
        fpr: clf.zero_probability(train.class1().as_ref()),
    }
}

/// Rates measured on a labelled training sample.
pub fn training_rates_from_sample(train: &LabeledDataset, clf: &ThresholdClassifier) -> Result<TrainingRates> {
    if train.class_count(0) == 0 || train.class_count(1) == 0 {
        return Err(invalid("train", "training sample needs both classes"));
    }
    let r = SampleEvaluator::new(train.clone())?.labelled_rates(clf)?;
    Ok(TrainingRates {
        tpr: r.zero_given_zero,
        fpr: r.zero_given_one,
    })
}

/// `(Q[g = 0] - fpr) / (tpr - fpr)`, reported unclamped.
pub fn acc_estimate(
    ev: &dyn TestEvaluator,
    clf: &ThresholdClassifier,
    rates: TrainingRates,
) -> Result<PrevalenceEstimate> {
    let denom = rates.tpr - rates.fpr;
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateClassifier(denom.abs()));
    }
    let value = (ev.predicted_zero_rate(clf) - rates.fpr) / denom;
    let status = if (0.0..=1.0).contains(&value) {
        Status::Converged
    } else {
        Status::RawOutOfRange
    };
    Ok(PrevalenceEstimate::plain(value, Method::Acc, status))
}

/// Bisection tolerance for the likelihood equation.
pub const EM_TOL: f64 = 1e-10;

/// Root in `[0, 1]` of `q -> E_Q[(R - 1) / (1 + q (R - 1))]`.
///
/// When `E_Q[R] <= 1` the estimate is 0, when `E_Q[1/R] <= 1` it is 1.
pub fn em_estimate(ev: &dyn TestEvaluator, ratio: &DensityRatio) -> Result<PrevalenceEstimate> {
    let e_ratio = ev.expect(&|x| ratio.eval(x))?;
    if e_ratio <= 1.0 {
        return Ok(PrevalenceEstimate::plain(0.0, Method::Em, Status::BoundaryLow));
    }
    let e_inverse = ev.expect(&|x| (-ratio.ln_eval(x)).exp())?;
    if e_inverse <= 1.0 {
        return Ok(PrevalenceEstimate::plain(1.0, Method::Em, Status::BoundaryHigh));
    }
    let failure = Cell::new(None);
    let root = find_root_bracketed(
        |q| match q {
            // endpoint values are the existence moments
            q if q <= 0.0 => e_ratio - 1.0,
            q if q >= 1.0 => 1.0 - e_inverse,
            q => match ev.expect(&|x| likelihood_term(ratio.ln_eval(x), q)) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            },
        },
        Bracket::new(0.0, 1.0)?,
        EM_TOL,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(PrevalenceEstimate::plain(root?, Method::Em, Status::Converged))
}

/// Default CDE-Iterate stopping rule.
pub const CDE_TOL: f64 = 1e-8;
pub const CDE_MAX_ITER: usize = 1000;

/// CDE-Iterate: start from Classify & Count with the minimum-error Bayes
/// classifier, then repeatedly re-threshold the training posterior as if
/// the last estimate were the test prevalence and count again.
///
/// Stops once successive iterates differ by at most `tol`, or after
/// `max_iter` re-thresholding steps. The trace holds every iterate.
pub fn cde_iterate(
    train: &PopulationModel,
    ev: &dyn TestEvaluator,
    max_iter: usize,
    tol: f64,
) -> Result<PrevalenceEstimate> {
    if max_iter < 1 {
        return Err(invalid("max_iter", "need at least one iteration"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let first = bayes_classifier(train, CostPair::unit())?;
    let mut trace = vec![ev.predicted_zero_rate(&first)];
    let mut status = Status::MaxIterations;
    for _ in 0..max_iter {
        let q = *trace.last().unwrap();
        let clf = adapt_threshold(train, q, CostPair::unit())?;
        let next = ev.predicted_zero_rate(&clf);
        trace.push(next);
        if (next - q).abs() <= tol {
            status = Status::Converged;
            break;
        }
    }
    Ok(PrevalenceEstimate {
        value: *trace.last().unwrap(),
        method: Method::CdeInf,
        trace,
        status,
    })
}

/// `Q[R(X) > (1 - q) / q] - q`; zero at a CDE-Iterate limit.
pub fn fixed_point_residual(train: &PopulationModel, ev: &dyn TestEvaluator, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid("q", "must lie in (0, 1)"));
    }
    let cut = train.require_ratio()?.invert_threshold((1.0 - q) / q)?;
    let clf = ThresholdClassifier {
        cut: cut.cut,
        orientation: cut.orientation,
        posterior_threshold: f64::NAN,
    };
    Ok(ev.predicted_zero_rate(&clf) - q)
}
