//! Class-prevalence quantification under dataset shift.
//!
//! The crate implements three estimators of the class-0 prevalence of an
//! unlabelled test set, given a labelled training distribution:
//!
//! - Classify & Count and its iterated, cost-rethresholded refinement
//!   CDE-Iterate ([`quantify::cde_iterate`]),
//! - Adjusted Classify & Count ([`quantify::acc_estimate`]),
//! - the maximum-likelihood (EM) estimator, computed as the root of the
//!   likelihood equation ([`quantify::em_estimate`]).
//!
//! Every estimator runs against a [`quantify::TestEvaluator`], which is
//! either an exact population backend (CDFs and quadrature) or a finite
//! sample backend (empirical frequencies and means). Test populations are
//! generated from a binormal training model by prior probability shift,
//! invariant-density-ratio shift, or a square-root-ratio perturbation of
//! the latter ([`shift`]).
//!
//! Inner loops over samples and over grid cells go through [`exec`], which
//! uses rayon when the `parallel` feature is on and plain iteration
//! otherwise. Both paths produce bit-identical results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod models;
pub mod numerics;
pub mod quantify;
pub mod sampling;
pub mod shift;
pub mod uncertainty;

pub use error::{Error, Result};
