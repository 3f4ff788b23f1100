//! Stratified labelled samples and accept-reject draws from derived densities.

use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::models::PopulationModel;
use crate::numerics::RngStream;

/// Relative slack before an envelope breach is reported.
pub const ENVELOPE_SLACK: f64 = 1e-9;

/// Accepted draws and the number of proposals it took.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptReject {
    pub draws: Vec<f64>,
    pub proposals: usize,
}

impl AcceptReject {
    pub fn acceptance_rate(&self) -> f64 {
        self.draws.len() as f64 / self.proposals as f64
    }
}

/// Draws `count` variates from `target` by thinning proposals from the
/// candidate: a proposal `x` is kept when `u * M * candidate(x) <= target(x)`.
pub fn accept_reject_sample<T, S, C>(
    target: T,
    mut candidate_sampler: S,
    candidate_density: C,
    m: f64,
    count: usize,
    rng: &mut RngStream,
) -> Result<AcceptReject>
where
    T: Fn(f64) -> f64,
    S: FnMut(&mut RngStream) -> Result<f64>,
    C: Fn(f64) -> f64,
{
    if !(m >= 1.0) || !m.is_finite() {
        return Err(invalid("M", format!("envelope constant must be finite and >= 1, got {m}")));
    }
    let mut draws = Vec::with_capacity(count);
    let mut proposals = 0usize;
    while draws.len() < count {
        let x = candidate_sampler(rng)?;
        proposals += 1;
        let bound = m * candidate_density(x);
        let t = target(x);
        if t > bound * (1.0 + ENVELOPE_SLACK) {
            return Err(Error::EnvelopeViolation { x, target: t, bound });
        }
        let u = rng.next_uniform();
        if u * bound < t {
            draws.push(x);
        }
    }
    Ok(AcceptReject { draws, proposals })
}

/// Which generator produced a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream_id: u64,
}

/// Features with class labels; class-0 rows come first.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    labels: Vec<u8>,
    seed_record: Option<SeedRecord>,
}

impl LabeledDataset {
    pub fn new(features: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(invalid(
                "labels",
                format!("{} features but {} labels", features.len(), labels.len()),
            ));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(invalid("labels", "labels must be 0 or 1"));
        }
        Ok(Self {
            features,
            labels,
            seed_record: None,
        })
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn seed_record(&self) -> Option<SeedRecord> {
        self.seed_record
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn class_count(&self, class: u8) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Features of one class, in dataset order.
    pub fn class_features(&self, class: u8) -> Vec<f64> {
        self.features
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == class)
            .map(|(&x, _)| x)
            .collect()
    }

    /// Two-column CSV with a `feature,label` header. Features use the
    /// shortest decimal form that round-trips.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(["feature", "label"]).map_err(io)?;
        for (x, l) in self.features.iter().zip(&self.labels) {
            out.write_record([x.to_string(), l.to_string()]).map_err(io)?;
        }
        out.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let parse_err = |what: &str| Error::Io(format!("row {}: bad {what}", i + 1));
            let x: f64 = rec.get(0).ok_or_else(|| parse_err("feature"))?.trim().parse()
                .map_err(|_| parse_err("feature"))?;
            let l: u8 = rec.get(1).ok_or_else(|| parse_err("label"))?.trim().parse()
                .map_err(|_| parse_err("label"))?;
            features.push(x);
            labels.push(l);
        }
        Self::new(features, labels)
    }
}

/// `round(n * p)` with halves rounded up.
pub fn stratified_class0_count(n: usize, prevalence0: f64) -> usize {
    ((n as f64 * prevalence0 + 0.5).floor() as usize).min(n)
}

/// Draws exactly `round(n * prevalence0)` class-0 rows and the rest from
/// class 1, each from its class-conditional density.
pub fn stratified_sample(pop: &PopulationModel, n: usize, rng: &mut RngStream) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    let n0 = stratified_class0_count(n, pop.prevalence0());
    let mut features = pop.class0().sample(n0, rng)?;
    features.extend(pop.class1().sample(n - n0, rng)?);
    let mut labels = vec![0u8; n0];
    labels.resize(n, 1);
    Ok(LabeledDataset {
        features,
        labels,
        seed_record: Some(SeedRecord {
            seed: rng.seed(),
            stream_id: rng.stream_id(),
        }),
    })
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
