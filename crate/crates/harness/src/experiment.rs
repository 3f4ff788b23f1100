//! Grid runs of all five estimators at population and sample level.

use std::fmt::Write as _;

use prevalence::classify::{adapt_threshold, bayes_classifier, CostPair, ThresholdClassifier};
use prevalence::exec;
use prevalence::metrics::{accuracy, f_measure, relative_error};
use prevalence::models::{binormal_density_ratio, DensityRatio, PopulationModel};
use prevalence::numerics::RngStream;
use prevalence::quantify::{
    acc_estimate, cde_iterate, em_estimate, training_rates, training_rates_from_sample, Method,
    PopulationEvaluator, PrevalenceEstimate, SampleEvaluator, TestEvaluator, TrainingRates,
    CDE_MAX_ITER, CDE_TOL,
};
use prevalence::sampling::{stratified_sample, LabeledDataset};
use prevalence::shift::{ShiftKind, TestFamily};
use prevalence::Result;

use crate::config::{ExperimentConfig, Output, Panel};
use crate::table::ResultTable;

/// Everything a grid cell needs that does not depend on the test prevalence.
#[derive(Debug, Clone)]
pub struct ScenarioSetup {
    pub kind: ShiftKind,
    pub train: PopulationModel,
    pub family: TestFamily,
    /// Training density ratio, used by EM on every test set.
    pub ratio: DensityRatio,
    pub min_error: ThresholdClassifier,
}

impl ScenarioSetup {
    pub fn new(kind: ShiftKind, cfg: &ExperimentConfig) -> Result<Self> {
        let train = PopulationModel::binormal(&cfg.binormal, cfg.train_prevalence0)?;
        let family = TestFamily::new(kind, &train, cfg.envelope)?;
        Ok(Self {
            kind,
            ratio: binormal_density_ratio(&cfg.binormal),
            min_error: bayes_classifier(&train, CostPair::unit())?,
            train,
            family,
        })
    }

    pub fn test_population(&self, prevalence0: f64) -> Result<PopulationModel> {
        self.family.at(prevalence0)
    }
}

/// Estimates and metrics of one grid cell, indexed in [`Method::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub prevalence0: f64,
    pub estimates: [f64; 5],
    pub relative_error: [f64; 5],
    pub accuracy: [f64; 5],
    pub f_measure: [f64; 5],
    pub cde: PrevalenceEstimate,
    pub acc: PrevalenceEstimate,
    pub em: PrevalenceEstimate,
}

impl CellResult {
    pub fn value(&self, output: Output, method: Method) -> f64 {
        let i = Method::ALL.iter().position(|m| *m == method).unwrap();
        match output {
            Output::Prevalence => self.estimates[i],
            Output::RelativeError => self.relative_error[i],
            Output::Accuracy => self.accuracy[i],
            Output::FMeasure => self.f_measure[i],
        }
    }
}

fn evaluate_cell(
    setup: &ScenarioSetup,
    prevalence0: f64,
    estimation: &dyn TestEvaluator,
    labelled: &dyn TestEvaluator,
    rates: TrainingRates,
) -> Result<CellResult> {
    let cde = cde_iterate(&setup.train, estimation, CDE_MAX_ITER, CDE_TOL)?;
    let acc = acc_estimate(estimation, &setup.min_error, rates)?;
    let em = em_estimate(estimation, &setup.ratio)?;
    let estimates = [cde.trace[0], cde.trace[1], cde.value, acc.value, em.value];

    let mut cell = CellResult {
        prevalence0,
        estimates,
        relative_error: [0.0; 5],
        accuracy: [0.0; 5],
        f_measure: [0.0; 5],
        cde,
        acc,
        em,
    };
    for (i, &est) in estimates.iter().enumerate() {
        let clf = adapt_threshold(&setup.train, est, CostPair::unit())?;
        cell.relative_error[i] = relative_error(prevalence0, est)?;
        cell.accuracy[i] = accuracy(labelled, &clf)?;
        cell.f_measure[i] = f_measure(labelled, &clf)?.as_f64();
    }
    Ok(cell)
}

/// Exact cell: CDFs and quadrature under the test population.
pub fn population_cell(setup: &ScenarioSetup, prevalence0: f64) -> Result<CellResult> {
    let ev = PopulationEvaluator::new(setup.test_population(prevalence0)?);
    let rates = training_rates(&setup.train, &setup.min_error);
    evaluate_cell(setup, prevalence0, &ev, &ev, rates)
}

/// Stream id for a scenario, repetition and grid cell. Cell 0 is the
/// training sample; grid index `i` uses cell `i + 1`.
pub fn stream_id(kind: ShiftKind, repetition: usize, cell: usize) -> u64 {
    let s = ShiftKind::ALL.iter().position(|k| *k == kind).unwrap() as u64;
    (s << 48) | ((repetition as u64) << 24) | cell as u64
}

pub fn training_sample(setup: &ScenarioSetup, n: usize, seed: u64, repetition: usize) -> Result<LabeledDataset> {
    let mut rng = RngStream::new(seed, stream_id(setup.kind, repetition, 0));
    stratified_sample(&setup.train, n, &mut rng)
}

pub fn test_sample(
    setup: &ScenarioSetup,
    prevalence0: f64,
    grid_index: usize,
    n: usize,
    seed: u64,
    repetition: usize,
) -> Result<LabeledDataset> {
    let mut rng = RngStream::new(seed, stream_id(setup.kind, repetition, grid_index + 1));
    stratified_sample(&setup.test_population(prevalence0)?, n, &mut rng)
}

/// Sample cell: estimators see features only, metrics use the labels.
/// ACC takes its rates from the training sample.
pub fn sample_cell(
    setup: &ScenarioSetup,
    test: LabeledDataset,
    prevalence0: f64,
    rates: TrainingRates,
) -> Result<CellResult> {
    let hidden = SampleEvaluator::hidden(test.clone())?;
    let labelled = SampleEvaluator::new(test)?;
    evaluate_cell(setup, prevalence0, &hidden, &labelled, rates)
}

fn mean_cells(cells: Vec<CellResult>) -> CellResult {
    let k = cells.len() as f64;
    let mut out = cells[0].clone();
    let avg = |pick: fn(&CellResult) -> &[f64; 5]| {
        let mut a = [0.0; 5];
        for c in &cells {
            for (s, v) in a.iter_mut().zip(pick(c)) {
                *s += v;
            }
        }
        a.map(|s| s / k)
    };
    out.estimates = avg(|c| &c.estimates);
    out.relative_error = avg(|c| &c.relative_error);
    out.accuracy = avg(|c| &c.accuracy);
    out.f_measure = avg(|c| &c.f_measure);
    out
}

/// All cells of one panel, in grid order.
pub fn run_panel(setup: &ScenarioSetup, cfg: &ExperimentConfig, panel: Panel) -> Result<Vec<CellResult>> {
    let grid: Vec<(usize, f64)> = cfg.test_prevalence_grid.iter().copied().enumerate().collect();
    match panel {
        Panel::Population => exec::map_collect(&grid, |&(_, q)| population_cell(setup, q))
            .into_iter()
            .collect(),
        Panel::Sample => {
            let rates = (0..cfg.repetitions)
                .map(|r| {
                    let train = training_sample(setup, cfg.sample_size, cfg.seed, r)?;
                    training_rates_from_sample(&train, &setup.min_error)
                })
                .collect::<Result<Vec<_>>>()?;
            exec::map_collect(&grid, |&(i, q)| {
                let reps = rates
                    .iter()
                    .enumerate()
                    .map(|(r, &rt)| {
                        let test = test_sample(setup, q, i, cfg.sample_size, cfg.seed, r)?;
                        sample_cell(setup, test, q, rt)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(mean_cells(reps))
            })
            .into_iter()
            .collect()
        }
    }
}

pub fn tables_from_cells(
    kind: ShiftKind,
    panel: Panel,
    outputs: &[Output],
    cells: &[CellResult],
) -> Vec<ResultTable> {
    let columns: Vec<f64> = cells.iter().map(|c| c.prevalence0).collect();
    outputs
        .iter()
        .map(|&output| {
            let mut t = ResultTable::new(kind, output, panel, columns.clone());
            for m in Method::ALL {
                t.rows.push((m, cells.iter().map(|c| c.value(output, m)).collect()));
            }
            t
        })
        .collect()
}

/// Runs every configured scenario and panel. Tables come out ordered by
/// scenario, then panel, then output.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let mut tables = Vec::new();
    for &kind in &cfg.scenarios {
        let setup = ScenarioSetup::new(kind, cfg)?;
        for &panel in &cfg.panels {
            let cells = if cfg.test_prevalence_grid.is_empty() {
                Vec::new()
            } else {
                run_panel(&setup, cfg, panel)?
            };
            let mut t = tables_from_cells(kind, panel, &cfg.outputs, &cells);
            if cells.is_empty() {
                for table in &mut t {
                    table.rows.clear();
                }
            }
            tables.extend(t);
        }
    }
    Ok(tables)
}

pub const DENSITY_GRID_POINTS: usize = 1001;
pub const DENSITY_GRID_RANGE: (f64, f64) = (-6.0, 8.0);

/// Training and test class-conditional densities on an even grid, as CSV.
pub fn density_grid_csv(setup: &ScenarioSetup) -> Result<String> {
    let test = setup.test_population(0.5)?;
    let (lo, hi) = DENSITY_GRID_RANGE;
    let mut out = String::from("x,train_class0,train_class1,test_class0,test_class1\n");
    for i in 0..DENSITY_GRID_POINTS {
        let x = lo + (hi - lo) * i as f64 / (DENSITY_GRID_POINTS - 1) as f64;
        writeln!(
            out,
            "{x},{},{},{},{}",
            setup.train.class0().pdf(x),
            setup.train.class1().pdf(x),
            test.class0().pdf(x),
            test.class1().pdf(x)
        )
        .unwrap();
    }
    Ok(out)
}
