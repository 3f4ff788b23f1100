//! Flat `key = value` experiment configuration.

use std::fmt;

use prevalence::models::BinormalParams;
use prevalence::shift::{EnvelopeParams, ShiftKind};

pub const DEFAULT_GRID: [f64; 9] = [0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99];
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Panel {
    Population,
    Sample,
}

impl Panel {
    pub fn name(&self) -> &'static str {
        match self {
            Panel::Population => "population",
            Panel::Sample => "sample",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "population" => Some(Panel::Population),
            "sample" => Some(Panel::Sample),
            _ => None,
        }
    }
}

/// Quantity tabulated per estimator and grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    Prevalence,
    RelativeError,
    Accuracy,
    FMeasure,
}

impl Output {
    pub const ALL: [Output; 4] = [
        Output::Prevalence,
        Output::RelativeError,
        Output::Accuracy,
        Output::FMeasure,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Output::Prevalence => "prevalence",
            Output::RelativeError => "relative_error",
            Output::Accuracy => "accuracy",
            Output::FMeasure => "f_measure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Output::ALL.into_iter().find(|o| o.name() == s)
    }

    pub fn title(&self) -> &'static str {
        match self {
            Output::Prevalence => "Class 0 prevalence estimates",
            Output::RelativeError => "Relative error of class 0 prevalence estimates",
            Output::Accuracy => "Classification accuracy",
            Output::FMeasure => "Classifier F-measure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenarios: Vec<ShiftKind>,
    pub binormal: BinormalParams,
    pub envelope: EnvelopeParams,
    pub train_prevalence0: f64,
    pub test_prevalence_grid: Vec<f64>,
    pub sample_size: usize,
    pub seed: u64,
    pub panels: Vec<Panel>,
    pub outputs: Vec<Output>,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenarios: ShiftKind::ALL.to_vec(),
            binormal: BinormalParams::default(),
            envelope: EnvelopeParams::default(),
            train_prevalence0: 0.5,
            test_prevalence_grid: DEFAULT_GRID.to_vec(),
            sample_size: 10_000,
            seed: DEFAULT_SEED,
            panels: vec![Panel::Sample, Panel::Population],
            outputs: Output::ALL.to_vec(),
            repetitions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line number, 0 when the problem is not tied to a line.
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.key, self.message)
        } else {
            write!(f, "line {}: {}: {}", self.line, self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

const KEYS: [&str; 13] = [
    "scenario",
    "mu",
    "nu",
    "sigma",
    "theta",
    "tau",
    "train_prevalence0",
    "test_prevalence_grid",
    "sample_size",
    "seed",
    "panels",
    "outputs",
    "repetitions",
];

/// Parses a configuration document. Missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<(&str, usize)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |key: &str, message: String| ConfigError {
            line: line_no,
            key: key.to_string(),
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line, "expected `key = value`".into()))?;
        let key = key.trim();
        let value = value.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(err(key, "unknown key".into()));
        };
        if let Some((_, first)) = seen.iter().find(|(k, _)| *k == known) {
            return Err(err(key, format!("duplicate key, first set on line {first}")));
        }
        seen.push((known, line_no));

        let real = || -> Result<f64, ConfigError> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(key, format!("expected a finite number, got `{value}`")))
        };
        let count = || -> Result<usize, ConfigError> {
            value
                .parse::<usize>()
                .map_err(|_| err(key, format!("expected a non-negative integer, got `{value}`")))
        };
        let items = || value.split(',').map(str::trim).filter(|s| !s.is_empty());

        match known {
            "scenario" => {
                cfg.scenarios = if value == "all" {
                    ShiftKind::ALL.to_vec()
                } else {
                    items()
                        .map(|s| ShiftKind::parse(s).ok_or_else(|| err(key, format!("unknown scenario `{s}`"))))
                        .collect::<Result<_, _>>()?
                };
                if cfg.scenarios.is_empty() {
                    return Err(err(key, "no scenario given".into()));
                }
            }
            "mu" => cfg.binormal.mu = real()?,
            "nu" => cfg.binormal.nu = real()?,
            "sigma" => {
                cfg.binormal.sigma = real()?;
                if !(cfg.binormal.sigma > 0.0) {
                    return Err(err(key, "must be positive".into()));
                }
            }
            "theta" => cfg.envelope.theta = real()?,
            "tau" => {
                cfg.envelope.tau = real()?;
                if !(cfg.envelope.tau > 0.0) {
                    return Err(err(key, "must be positive".into()));
                }
            }
            "train_prevalence0" => {
                cfg.train_prevalence0 = real()?;
                if !(cfg.train_prevalence0 > 0.0 && cfg.train_prevalence0 < 1.0) {
                    return Err(err(key, "must lie in (0, 1)".into()));
                }
            }
            "test_prevalence_grid" => {
                let grid = items()
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| err(key, format!("`{s}` is not a number")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(bad) = grid.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
                    return Err(err(key, format!("{bad} is outside (0, 1)")));
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err(key, "values must be strictly increasing".into()));
                }
                cfg.test_prevalence_grid = grid;
            }
            "sample_size" => {
                let n = count()?;
                if n < 1 {
                    return Err(err(key, "must be at least 1".into()));
                }
                cfg.sample_size = n;
            }
            "seed" => {
                cfg.seed = value
                    .parse::<u64>()
                    .map_err(|_| err(key, format!("expected an unsigned integer, got `{value}`")))?
            }
            "panels" => {
                cfg.panels = items()
                    .map(|s| Panel::parse(s).ok_or_else(|| err(key, format!("unknown panel `{s}`"))))
                    .collect::<Result<_, _>>()?;
            }
            "outputs" => {
                cfg.outputs = items()
                    .map(|s| Output::parse(s).ok_or_else(|| err(key, format!("unknown output `{s}`"))))
                    .collect::<Result<_, _>>()?;
            }
            "repetitions" => {
                cfg.repetitions = count()?;
                if cfg.repetitions < 1 {
                    return Err(err(key, "must be at least 1".into()));
                }
            }
            _ => unreachable!(),
        }
    }

    if cfg.binormal.mu == cfg.binormal.nu {
        let line = seen
            .iter()
            .find(|(k, _)| *k == "nu")
            .or_else(|| seen.iter().find(|(k, _)| *k == "mu"))
            .map_or(0, |(_, l)| *l);
        return Err(ConfigError {
            line,
            key: "nu".into(),
            message: "class means must differ".into(),
        });
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.test_prevalence_grid, DEFAULT_GRID);
        assert_eq!(cfg.sample_size, 10_000);
        assert_eq!(cfg.train_prevalence0, 0.5);
        assert_eq!((cfg.envelope.theta, cfg.envelope.tau), (0.5, 1.4));
    }

    #[test]
    fn single_cell_grid() {
        let cfg = parse_config("test_prevalence_grid = 0.5").unwrap();
        assert_eq!(cfg.test_prevalence_grid, vec![0.5]);
    }

    #[test]
    fn negative_sigma_names_line() {
        let e = parse_config("# model\nmu = 0\nsigma = -1\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.key, "sigma");
        assert!(e.to_string().contains("line 3"));
    }

    #[test]
    fn comments_and_lists() {
        let text = "scenario = prior_shift, sqrt_ratio  # two of three\n\
                    panels = population\n\
                    outputs = prevalence,accuracy\n\
                    seed = 7\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.scenarios, vec![ShiftKind::PriorShift, ShiftKind::SqrtRatio]);
        assert_eq!(cfg.panels, vec![Panel::Population]);
        assert_eq!(cfg.outputs, vec![Output::Prevalence, Output::Accuracy]);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn rejects_bad_input() {
        for (text, line, key) in [
            ("bogus = 1", 1, "bogus"),
            ("\nno equals sign", 2, "no equals sign"),
            ("test_prevalence_grid = 0.5, 0.3", 1, "test_prevalence_grid"),
            ("test_prevalence_grid = 0, 0.3", 1, "test_prevalence_grid"),
            ("sample_size = 0", 1, "sample_size"),
            ("seed = -4", 1, "seed"),
            ("mu = 1\nmu = 2", 2, "mu"),
            ("nu = 0", 1, "nu"),
            ("panels = both", 1, "panels"),
            ("train_prevalence0 = 1", 1, "train_prevalence0"),
            ("tau = nan", 1, "tau"),
        ] {
            let e = parse_config(text).unwrap_err();
            assert_eq!((e.line, e.key.as_str()), (line, key), "{text}");
        }
    }

    #[test]
    fn empty_grid_is_allowed() {
        assert!(parse_config("test_prevalence_grid =").unwrap().test_prevalence_grid.is_empty());
    }
}
