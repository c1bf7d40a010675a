//! Command-line front end: figure data, parameter sweeps, instrument
//! calibration and campaign emulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_config, Format, RunConfig};
use crate::error::CliError;
use crate::figures::{Artifacts, FigureId};
use crate::output::{resolve_out_dir, Emitter, Manifest};

#[derive(Debug, Parser)]
#[command(name = "rfsqueeze", version, about = "Squeezed resonance fluorescence: figures, sweeps, calibration and campaigns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for this run.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Random seed; overrides output.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated output formats.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regenerate the data behind one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: FigureId,
    },
    /// Emulate, postselect and analyse a phase-binned measurement campaign.
    Campaign,
    /// Variance over the saturation and phase grids.
    Sweep,
    /// Fit an instrument width to a target squeezing level.
    Calibrate,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Self::Reproduce { figure } => format!("reproduce {}", figure.name()),
            Self::Campaign => "campaign".into(),
            Self::Sweep => "sweep".into(),
            Self::Calibrate => "calibrate".into(),
        }
    }

    fn dir_name(&self) -> &'static str {
        match self {
            Self::Reproduce { figure } => figure.name(),
            Self::Campaign => "campaign",
            Self::Sweep => "sweep",
            Self::Calibrate => "calibrate",
        }
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default().resolve()?,
    };
    if let Some(seed) = cli.seed {
        config.output.seed = seed;
    }
    if let Some(formats) = &cli.format {
        if formats.is_empty() {
            return Err(CliError::Config(vec!["--format needs at least one of csv, json, svg".into()]));
        }
        config.output.formats = formats.clone();
    }
    Ok(config)
}

fn emit(emitter: &mut Emitter, artifacts: &Artifacts) -> Result<(), CliError> {
    for (name, table) in &artifacts.tables {
        emitter.table(name, table)?;
    }
    for (name, doc) in &artifacts.svgs {
        emitter.svg(name, || doc.clone())?;
    }
    Ok(())
}

/// Runs one invocation and returns the directory it wrote.
pub fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let config = effective_config(cli)?;
    let dir = resolve_out_dir(cli.out.as_deref(), &config, cli.command.dir_name());
    let svg = config.output.formats.contains(&Format::Svg);
    let seed = config.output.seed;
    let mut emitter = Emitter::create(&dir, &config.output.formats)?;
    let artifacts = match &cli.command {
        Command::Reproduce { figure } => figures::reproduce(*figure, &config, svg)?,
        Command::Sweep => commands::sweep(&config, svg)?,
        Command::Calibrate => {
            let (artifacts, calibration) = commands::calibrate(&config, svg)?;
            emitter.json("calibration", &calibration)?;
            artifacts
        }
        Command::Campaign => {
            let run = commands::campaign(&config, seed)?;
            let provenance = Manifest {
                command: cli.command.name(),
                config: config.clone(),
                seed,
                summary: serde_json::Value::Null,
                notes: Vec::new(),
            }
            .provenance();
            let files = run.result.write_dir(&dir.join("campaign"), Some(provenance))?;
            emitter.record(files);
            if let Some(calibration) = &run.calibration {
                emitter.json("calibration", calibration)?;
            }
            run.artifacts
        }
    };
    emit(&mut emitter, &artifacts)?;
    emitter.finish(Manifest {
        command: cli.command.name(),
        config,
        seed,
        summary: artifacts.summary,
        notes: artifacts.notes,
    })?;
    Ok(dir)
}

/// Parses `args`, runs, reports and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_CONFIG } else { error::EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(dir) => {
            println!("{}", display(&dir));
            error::EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn display(dir: &Path) -> String {
    dir.display().to_string()
}
