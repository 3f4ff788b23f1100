use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use prevalence_harness::config::{parse_config, ConfigError, ExperimentConfig, Panel};
use prevalence_harness::experiment::{density_grid_csv, run_experiment, ScenarioSetup};
use prevalence_harness::table::{emit_full_csv, emit_table, read_full_csv, Format, TableParseError};
use prevalence_harness::verify::{render_report, verify_population};

#[derive(Parser)]
#[command(name = "prevalence", version, about = "Prevalence estimation under dataset shift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid and write result tables
    Run {
        /// key = value configuration file; defaults apply when omitted
        config: Option<PathBuf>,
        #[arg(short, long, default_value = "results")]
        outdir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long, value_enum)]
        panel: Option<PanelArg>,
    },
    /// Re-render stored full-precision tables
    Tables {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
    },
    /// Check the population tables against the embedded expected values
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Markdown => Format::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PanelArg {
    Population,
    Sample,
    Both,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Table { path: PathBuf, source: TableParseError },
    #[error("numerical failure: {0}")]
    Numerical(#[from] prevalence::Error),
    #[error("verification failed")]
    Verification,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Table { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

fn run(
    config: Option<PathBuf>,
    outdir: PathBuf,
    seed: Option<u64>,
    format: Format,
    panel: Option<PanelArg>,
) -> Result<(), CliError> {
    let mut cfg = match &config {
        Some(p) => parse_config(&fs::read_to_string(p).map_err(io_err(p))?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    match panel {
        Some(PanelArg::Population) => cfg.panels = vec![Panel::Population],
        Some(PanelArg::Sample) => cfg.panels = vec![Panel::Sample],
        Some(PanelArg::Both) => cfg.panels = vec![Panel::Sample, Panel::Population],
        None => {}
    }

    fs::create_dir_all(&outdir).map_err(io_err(&outdir))?;
    let tables = run_experiment(&cfg)?;
    for t in &tables {
        let stem = t.stem();
        write_file(&outdir.join(format!("{stem}.csv")), &emit_table(t, Format::Csv))?;
        write_file(&outdir.join(format!("{stem}_full.csv")), &emit_full_csv(t))?;
        if format == Format::Markdown {
            write_file(&outdir.join(format!("{stem}.md")), &emit_table(t, Format::Markdown))?;
        }
        println!("{}", emit_table(t, format));
    }
    for &kind in &cfg.scenarios {
        let setup = ScenarioSetup::new(kind, &cfg)?;
        write_file(
            &outdir.join(format!("{}_densities.csv", kind.name())),
            &density_grid_csv(&setup)?,
        )?;
    }
    eprintln!("wrote {} tables to {}", tables.len(), outdir.display());
    Ok(())
}

fn tables(dir: PathBuf, format: Format) -> Result<(), CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(io_err(&dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with("_full.csv"))
        .collect();
    paths.sort();
    for p in paths {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        let stem = name.trim_end_matches("_full.csv");
        let file = fs::File::open(&p).map_err(io_err(&p))?;
        let t = read_full_csv(stem, file).map_err(|source| CliError::Table {
            path: p.clone(),
            source,
        })?;
        println!("{}", emit_table(&t, format));
    }
    Ok(())
}

fn verify() -> Result<(), CliError> {
    let checks = verify_population()?;
    print!("{}", render_report(&checks));
    if checks.iter().all(|c| c.passed()) {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            outdir,
            seed,
            format,
            panel,
        } => run(config, outdir, seed, format.into(), panel),
        Command::Tables { dir, format } => tables(dir, format.into()),
        Command::Verify => verify(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
