//! Comparison of computed population tables with the embedded expected ones.

use std::fmt::Write as _;

use prevalence::quantify::Method;

use crate::config::{ExperimentConfig, Output, Panel};
use crate::experiment::run_experiment;
use crate::reference::{ReferenceTable, REFERENCE_TABLES};
use crate::table::{format_cell, ResultTable};

/// Per-cell tolerance. Relative errors divide by `min(q, 1 - q)` and get
/// a looser bound.
pub fn tolerance_for(output: Output) -> f64 {
    match output {
        Output::RelativeError => 2e-3,
        _ => 1e-3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMismatch {
    pub method: Method,
    pub prevalence0: f64,
    pub expected: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCheck {
    pub reference: u8,
    pub stem: String,
    pub tolerance: f64,
    pub cells: usize,
    pub max_abs_diff: f64,
    pub mismatches: Vec<CellMismatch>,
}

impl TableCheck {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Cell-by-cell comparison. An undefined expected cell must be undefined.
pub fn compare(reference: &ReferenceTable, table: &ResultTable) -> TableCheck {
    let tolerance = tolerance_for(reference.output);
    let mut check = TableCheck {
        reference: reference.number,
        stem: table.stem(),
        tolerance,
        cells: 0,
        max_abs_diff: 0.0,
        mismatches: Vec::new(),
    };
    for m in Method::ALL {
        let expected = reference.row(m);
        for (j, &q) in table.columns.iter().enumerate() {
            let actual = table.cell(m, j).unwrap_or(f64::NAN);
            let want = expected[j];
            check.cells += 1;
            let ok = if want.is_nan() || actual.is_nan() {
                want.is_nan() && actual.is_nan()
            } else {
                let d = (actual - want).abs();
                check.max_abs_diff = check.max_abs_diff.max(d);
                d <= tolerance
            };
            if !ok {
                check.mismatches.push(CellMismatch {
                    method: m,
                    prevalence0: q,
                    expected: want,
                    actual,
                });
            }
        }
    }
    check
}

/// Runs the default population panels and checks all eight tables.
pub fn verify_population() -> prevalence::Result<Vec<TableCheck>> {
    let cfg = ExperimentConfig {
        panels: vec![Panel::Population],
        ..ExperimentConfig::default()
    };
    let tables = run_experiment(&cfg)?;
    let mut checks: Vec<TableCheck> = REFERENCE_TABLES
        .iter()
        .filter_map(|r| {
            tables
                .iter()
                .find(|t| t.scenario == r.scenario && t.output == r.output)
                .map(|t| compare(r, t))
        })
        .collect();
    checks.sort_by_key(|c| c.reference);
    Ok(checks)
}

pub fn render_report(checks: &[TableCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{verdict} table {} {}: {}/{} cells within {:e}, max |diff| {:.2e}",
            c.reference,
            c.stem,
            c.cells - c.mismatches.len(),
            c.cells,
            c.tolerance,
            c.max_abs_diff
        )
        .unwrap();
        for m in &c.mismatches {
            writeln!(
                out,
                "    {} at {}: expected {}, got {:.6}",
                m.method,
                m.prevalence0,
                format_cell(m.expected),
                m.actual
            )
            .unwrap();
        }
    }
    out
}
