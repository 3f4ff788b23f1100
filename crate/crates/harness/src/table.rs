//! Result tables and their CSV / markdown renderings.

use std::fmt::Write as _;
use std::io::{Read, Write};

use prevalence::quantify::Method;
use prevalence::shift::ShiftKind;

use crate::config::{Output, Panel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

/// One table: an estimator per row, a test prevalence per column.
/// Undefined cells hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub scenario: ShiftKind,
    pub output: Output,
    pub panel: Panel,
    pub caption: String,
    pub columns: Vec<f64>,
    pub rows: Vec<(Method, Vec<f64>)>,
}

impl ResultTable {
    pub fn new(scenario: ShiftKind, output: Output, panel: Panel, columns: Vec<f64>) -> Self {
        Self {
            scenario,
            output,
            panel,
            caption: caption(scenario, output, panel),
            columns,
            rows: Vec::new(),
        }
    }

    /// `<scenario>_<metric>_<panel>`
    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.scenario.name(), self.output.name(), self.panel.name())
    }

    pub fn row(&self, method: Method) -> Option<&[f64]> {
        self.rows.iter().find(|(m, _)| *m == method).map(|(_, v)| v.as_slice())
    }

    pub fn cell(&self, method: Method, column: usize) -> Option<f64> {
        self.row(method).and_then(|r| r.get(column).copied())
    }
}

fn caption(scenario: ShiftKind, output: Output, panel: Panel) -> String {
    let test = match scenario {
        ShiftKind::PriorShift => "Binormal with equal variances",
        ShiftKind::InvariantRatio => "Non-normal densities, binormal density ratio",
        ShiftKind::SqrtRatio => "Non-normal densities, non-binormal density ratio",
    };
    let on = match panel {
        Panel::Population => "populations",
        Panel::Sample => "samples",
    };
    format!(
        "{} on {on}. Training set: Binormal with equal variances. Test sets: {test}.",
        output.title()
    )
}

/// Four decimals, `NaN` for undefined cells.
pub fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v == 0.0 {
        "0.0000".into()
    } else {
        format!("{v:.4}")
    }
}

/// Plain decimal with 17 significant digits.
pub fn format_full(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else { format!("{v}") };
    }
    if v == 0.0 {
        return format!("{:.16}", 0.0);
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

fn header_label(q: f64) -> String {
    let s = format!("{q:.2}");
    if s.parse::<f64>() == Ok(q) {
        s
    } else {
        format!("{q}")
    }
}

pub fn emit_table(table: &ResultTable, format: Format) -> String {
    match format {
        Format::Csv => emit_csv(table, format_cell),
        Format::Markdown => emit_markdown(table),
    }
}

/// Companion CSV carrying 17 significant digits per cell.
pub fn emit_full_csv(table: &ResultTable) -> String {
    emit_csv(table, format_full)
}

fn emit_csv(table: &ResultTable, cell: fn(f64) -> String) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["Q[Y=0]".to_string()];
    header.extend(table.columns.iter().map(|&q| header_label(q)));
    w.write_record(&header).expect("write to memory");
    for (m, vals) in &table.rows {
        let mut rec = vec![m.label().to_string()];
        rec.extend(vals.iter().map(|&v| cell(v)));
        w.write_record(&rec).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
}

fn md_label(m: Method) -> &'static str {
    match m {
        Method::CdeInf => "CDE∞",
        other => other.label(),
    }
}

fn emit_markdown(table: &ResultTable) -> String {
    let mut out = String::new();
    writeln!(out, "**{}**", table.caption).unwrap();
    writeln!(out).unwrap();
    write!(out, "| Q[Y=0] |").unwrap();
    for &q in &table.columns {
        write!(out, " {} |", header_label(q)).unwrap();
    }
    writeln!(out).unwrap();
    write!(out, "|:--|").unwrap();
    for _ in &table.columns {
        write!(out, "--:|").unwrap();
    }
    writeln!(out).unwrap();
    for (m, vals) in &table.rows {
        write!(out, "| {} |", md_label(*m)).unwrap();
        for &v in vals {
            write!(out, " {} |", format_cell(v)).unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum TableParseError {
    #[error("bad file name `{0}`, expected <scenario>_<metric>_<panel>_full.csv")]
    FileName(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Content { row: usize, message: String },
}

/// Splits `<scenario>_<metric>_<panel>` into its parts.
pub fn parse_stem(stem: &str) -> Option<(ShiftKind, Output, Panel)> {
    let scenario = ShiftKind::ALL.into_iter().find(|k| stem.starts_with(&format!("{}_", k.name())))?;
    let rest = &stem[scenario.name().len() + 1..];
    let output = Output::ALL.into_iter().find(|o| rest.starts_with(&format!("{}_", o.name())))?;
    let panel = Panel::parse(&rest[output.name().len() + 1..])?;
    Some((scenario, output, panel))
}

/// Reads a table written by [`emit_full_csv`].
pub fn read_full_csv<R: Read>(stem: &str, r: R) -> Result<ResultTable, TableParseError> {
    let (scenario, output, panel) = parse_stem(stem).ok_or_else(|| TableParseError::FileName(stem.into()))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rdr.records();
    let header = records.next().ok_or(TableParseError::Content {
        row: 1,
        message: "missing header".into(),
    })??;
    let num = |s: &str, row: usize| {
        s.parse::<f64>().map_err(|_| TableParseError::Content {
            row,
            message: format!("`{s}` is not a number"),
        })
    };
    let columns = header.iter().skip(1).map(|s| num(s, 1)).collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new(scenario, output, panel, columns);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let row = i + 2;
        let label = rec.get(0).unwrap_or("");
        let method = Method::from_label(label).ok_or_else(|| TableParseError::Content {
            row,
            message: format!("unknown estimator `{label}`"),
        })?;
        let vals = rec.iter().skip(1).map(|s| num(s, row)).collect::<Result<Vec<_>, _>>()?;
        if vals.len() != table.columns.len() {
            return Err(TableParseError::Content {
                row,
                message: "cell count does not match header".into(),
            });
        }
        table.rows.push((method, vals));
    }
    Ok(table)
}

pub fn write_text<W: Write>(mut w: W, text: &str) -> std::io::Result<()> {
    w.write_all(text.as_bytes())
}
