//! Test populations related to a training population by prior probability
//! shift, invariant-density-ratio shift, or the square-root-ratio variant.
//!
//! The derived kinds start from a normal envelope density `h*` and split it
//! into `q* h0 + (1 - q*) h1` with a prescribed ratio `h0 / h1`. The weight
//! `q*` is the root of `q -> E_h*[(R - 1) / (1 + q (R - 1))]`, which is
//! strictly decreasing on (0, 1), so bisection is safe once both moment
//! conditions `E_h*[R] > 1` and `E_h*[1/R] > 1` hold.

use std::cell::Cell;
use std::sync::Arc;

use crate::error::{invalid, Error, MomentCondition, Result};
use crate::models::{
    conditionals_from_posterior, expect_under, Density, DensityRatio, Normal,
    PosteriorConditional, PopulationModel, RatioPosterior,
};
use crate::numerics::{find_root_bracketed, Bracket, QuadratureSpec};

/// Margin by which each existence moment must exceed 1.
pub const EXISTENCE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    PriorShift,
    InvariantRatio,
    SqrtRatio,
}

impl ShiftKind {
    pub const ALL: [ShiftKind; 3] = [
        ShiftKind::PriorShift,
        ShiftKind::InvariantRatio,
        ShiftKind::SqrtRatio,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ShiftKind::PriorShift => "prior_shift",
            ShiftKind::InvariantRatio => "invariant_ratio",
            ShiftKind::SqrtRatio => "sqrt_ratio",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "prior_shift" | "prior" => Some(ShiftKind::PriorShift),
            "invariant_ratio" | "invariant" => Some(ShiftKind::InvariantRatio),
            "sqrt_ratio" | "sqrt" => Some(ShiftKind::SqrtRatio),
            _ => None,
        }
    }
}

/// Mean and standard deviation of the normal density `h*` that is
/// decomposed for the derived scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    pub theta: f64,
    pub tau: f64,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        Self {
            theta: 0.5,
            tau: 1.4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShiftScenario {
    pub kind: ShiftKind,
    pub train: PopulationModel,
    pub test_prevalence0: f64,
    pub envelope: EnvelopeParams,
}

/// `(R - 1) / (1 + q (R - 1))` from `ln R`, stable for extreme ratios.
pub fn likelihood_term(ln_ratio: f64, q: f64) -> f64 {
    if ln_ratio > 0.0 {
        // divide through by R
        let one_minus_inv = -(-ln_ratio).exp_m1();
        let inv = (-ln_ratio).exp();
        one_minus_inv / ((1.0 - q) * inv + q)
    } else {
        let r_minus_one = ln_ratio.exp_m1();
        r_minus_one / ((1.0 - q) + q * ln_ratio.exp())
    }
}

/// Result of splitting `h*` into a two-class mixture.
#[derive(Debug, Clone)]
pub struct MixtureDecomposition {
    pub q_star: f64,
    pub class0: Arc<PosteriorConditional>,
    pub class1: Arc<PosteriorConditional>,
    pub ratio: DensityRatio,
}

/// `E_h*[(R - 1) / (1 + q (R - 1))]`.
pub fn mixture_equation(h_star: &dyn Density, ratio: &DensityRatio, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    expect_under(h_star, |x| likelihood_term(ratio.ln_eval(x), q), spec)
}

/// Finds `q*` and the conditionals `h0 = R h* / (1 + q* (R - 1))`,
/// `h1 = h* / (1 + q* (R - 1))`.
pub fn decompose_mixture(h_star: Arc<dyn Density>, ratio: DensityRatio) -> Result<MixtureDecomposition> {
    let spec = QuadratureSpec::default();
    let e_ratio = expect_under(h_star.as_ref(), |x| ratio.eval(x), &spec)?;
    if !(e_ratio > 1.0 + EXISTENCE_MARGIN) {
        return Err(Error::NoInteriorSolution {
            condition: MomentCondition::Ratio,
            value: e_ratio,
        });
    }
    let e_inverse = expect_under(h_star.as_ref(), |x| (-ratio.ln_eval(x)).exp(), &spec)?;
    if !(e_inverse > 1.0 + EXISTENCE_MARGIN) {
        return Err(Error::NoInteriorSolution {
            condition: MomentCondition::InverseRatio,
            value: e_inverse,
        });
    }
    let failure = Cell::new(None);
    let q_star = find_root_bracketed(
        |q| match mixture_equation(h_star.as_ref(), &ratio, q, &spec) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        },
        Bracket::new(1e-10, 1.0 - 1e-10)?,
        1e-12,
    );
    let q_star = match (q_star, failure.take()) {
        (_, Some(e)) => return Err(e),
        (r, None) => r?,
    };
    let posterior = RatioPosterior {
        ratio,
        weight0: q_star,
    };
    let (class0, class1) = conditionals_from_posterior(h_star, Arc::new(posterior), q_star)?;
    Ok(MixtureDecomposition {
        q_star,
        class0,
        class1,
        ratio,
    })
}

/// Test conditionals for one scenario kind; the prevalence is a free dial.
#[derive(Debug, Clone)]
pub struct TestFamily {
    pub kind: ShiftKind,
    class0: Arc<dyn Density>,
    class1: Arc<dyn Density>,
    ratio: Option<DensityRatio>,
    pub q_star: Option<f64>,
}

impl TestFamily {
    pub fn new(kind: ShiftKind, train: &PopulationModel, envelope: EnvelopeParams) -> Result<Self> {
        match kind {
            ShiftKind::PriorShift => Ok(Self {
                kind,
                class0: Arc::clone(train.class0()),
                class1: Arc::clone(train.class1()),
                ratio: train.ratio().copied(),
                q_star: None,
            }),
            ShiftKind::InvariantRatio | ShiftKind::SqrtRatio => {
                let base = *train.require_ratio()?;
                let target = if kind == ShiftKind::SqrtRatio {
                    base.powf(0.5)
                } else {
                    base
                };
                let h_star = Arc::new(Normal::new(envelope.theta, envelope.tau)?);
                let d = decompose_mixture(h_star, target)?;
                Ok(Self {
                    kind,
                    class0: d.class0,
                    class1: d.class1,
                    ratio: Some(target),
                    q_star: Some(d.q_star),
                })
            }
        }
    }

    pub fn at(&self, prevalence0: f64) -> Result<PopulationModel> {
        PopulationModel::new(
            Arc::clone(&self.class0),
            Arc::clone(&self.class1),
            prevalence0,
            self.ratio,
        )
    }
}

pub fn make_test_population(scenario: &ShiftScenario) -> Result<PopulationModel> {
    if !(scenario.test_prevalence0 > 0.0 && scenario.test_prevalence0 < 1.0) {
        return Err(invalid("test_prevalence0", "must lie in (0, 1)"));
    }
    TestFamily::new(scenario.kind, &scenario.train, scenario.envelope)?.at(scenario.test_prevalence0)
}

/// Largest posterior discrepancy `|P[Y=0|x] - Q[Y=0|x]|` on a 1000-point
/// grid spanning both populations.
pub fn covariate_shift_identity_check(train: &PopulationModel, test: &PopulationModel) -> f64 {
    let (a0, b0) = train.span(6.0);
    let (a1, b1) = test.span(6.0);
    let (lo, hi) = (a0.max(a1), b0.min(b1));
    let (lo, hi) = if lo < hi { (lo, hi) } else { (a0.min(a1), b0.max(b1)) };
    (0..1000)
        .map(|i| lo + (hi - lo) * i as f64 / 999.0)
        .map(|x| (train.posterior(x) - test.posterior(x)).abs())
        .fold(0.0, f64::max)
}
