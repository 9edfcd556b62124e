use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lppl_core::Space;

use crate::commands::{
    cmd_fit, cmd_forecast, cmd_ingest, cmd_roll, cmd_synth, write_outputs, Outcome,
};
use crate::config::{ModelChoice, Overrides, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "lppl",
    version,
    about = "Fit LPPL and hyperbolic bubble models to daily price series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one window; writes fit.json and curve.csv.
    Fit(Common),
    /// Refit over a sweep of end dates; writes rolling.csv, stability.json, extrapolation.json.
    Roll(Common),
    /// Crash window and price range from earlier fit or roll outputs in the out directory.
    Forecast(Common),
    /// Write a synthetic price CSV from the config's `synth` section.
    Synth(Common),
    /// Validate a price CSV and print it normalized.
    Ingest(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpaceArg {
    Price,
    Log,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub deflator: Option<PathBuf>,
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub window_start: Option<NaiveDate>,
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub window_end: Option<NaiveDate>,
    #[arg(long)]
    pub space: Option<SpaceArg>,
    #[arg(long)]
    pub model: Option<ModelChoice>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

impl Common {
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(Overrides {
            input: self.input.clone(),
            deflator: self.deflator.clone(),
            window_start: self.window_start,
            window_end: self.window_end,
            space: self.space.map(|s| match s {
                SpaceArg::Price => Space::Price,
                SpaceArg::Log => Space::LogPrice,
            }),
            model: self.model,
            out: self.out.clone(),
            seed: self.seed,
        });
        Ok(cfg)
    }
}

fn execute(command: &Command) -> Result<Outcome> {
    let (common, f): (&Common, fn(&RunConfig) -> Result<Outcome>) = match command {
        Command::Fit(c) => (c, cmd_fit),
        Command::Roll(c) => (c, cmd_roll),
        Command::Forecast(c) => (c, cmd_forecast),
        Command::Synth(c) => (c, cmd_synth),
        Command::Ingest(c) => (c, cmd_ingest),
    };
    let cfg = common.run_config()?;
    let outcome = f(&cfg)?;
    write_outputs(&cfg.out, &outcome.files)?;
    Ok(outcome)
}

/// Run the CLI and return its exit code: 0 success, 2 results produced
/// without convergence, 1 any error (including bad arguments).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            let _ = stderr.write_all(outcome.stderr.as_bytes());
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            outcome.status.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
