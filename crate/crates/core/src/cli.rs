//! Command-line front end. Exit status: 0 success, 1 I/O failure, 2 bad
//! configuration, arguments or data.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bounds::{assemble_report, BoundKind, BoundValues, ConstraintSource, PowerConstraint};
use crate::datagen::{read_dataset_csv, DataFileError};
use crate::decoders::{icp_mdd, icp_mdd_known, mii_known};
use crate::format::fmt10;
use crate::harness::{
    diagnostics_csv, emit_csv, run_scenario, sidecar_path, trials_csv, ConfigError,
    ExperimentScenario, HarnessError,
};
use crate::model::{CoefficientVector, EnvironmentData};
use crate::support::SupportSet;

pub const THREADS_VAR: &str = "ICPMAC_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "icpmac", version, about = "Support-recovery error bounds and decoders for multi-environment linear models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo scenario from a JSON config and write its CSV.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write per-trial records and diagnostics next to the output.
        #[arg(long)]
        keep_trials: bool,
    },
    /// Evaluate the lower bounds on a dataset.
    Bounds {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: Option<PathBuf>,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<f64>,
        #[arg(long)]
        sigma_min: f64,
        /// Declared budget; fitted to the data when omitted.
        #[arg(long, requires = "q_e")]
        p_e: Option<f64>,
        #[arg(long, requires = "p_e")]
        q_e: Option<f64>,
    },
    /// Estimate the support from a dataset.
    Decode {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        w: Option<Vec<f64>>,
        #[arg(long)]
        p: Option<f64>,
        /// Noise level assumed by mii_known.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Method {
    IcpMddKnown,
    MiiKnown,
    IcpMdd,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DataFileError> for CliError {
    fn from(e: DataFileError) -> Self {
        match e {
            DataFileError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses a config file: every scenario field plus an optional `output`.
pub fn parse_config(text: &str) -> Result<(ExperimentScenario, Option<PathBuf>), ConfigError> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError {
        field: "<root>".into(),
        msg: e.to_string(),
    })?;
    let output = match value.as_object_mut().and_then(|o| o.remove("output")) {
        None => None,
        Some(serde_json::Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => {
            return Err(ConfigError {
                field: "output".into(),
                msg: "must be a string".into(),
            })
        }
    };
    Ok((ExperimentScenario::from_json(&value.to_string())?, output))
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
    }
}

fn cmd_experiment(
    config: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
    output: Option<PathBuf>,
    keep_trials: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| io_err(config, e))?;
    let (mut scenario, configured) = parse_config(&text)?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    if let Some(t) = trials {
        scenario.trials = t;
    }
    scenario.validate()?;
    let path = output
        .or(configured)
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", scenario.name)));
    let result = run_scenario(&scenario, threads_from_env()?).map_err(|e| match e {
        HarnessError::Config(c) => CliError::from(c),
        other => CliError::Usage(other.to_string()),
    })?;
    emit_csv(&result.rows, &path).map_err(|e| io_err(&path, e))?;
    if keep_trials {
        for (tag, text) in [
            ("trials", trials_csv(&result.records)),
            ("diagnostics", diagnostics_csv(&result.rows)),
        ] {
            let side = sidecar_path(&path, tag);
            std::fs::write(&side, text).map_err(|e| io_err(&side, e))?;
        }
    }
    let total = scenario.trials * scenario.grid.len();
    writeln!(out, "{}", path.display()).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out, "trials: {total}").map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn bound_row(label: &str, v: &BoundValues<f64>) -> String {
    let cells: Vec<String> = BoundKind::ALL
        .iter()
        .map(|&k| v.get(k).map(fmt10).unwrap_or_default())
        .collect();
    format!("{label},{}", cells.join(","))
}

fn cmd_bounds(
    x: &Path,
    y: Option<&Path>,
    w: Vec<f64>,
    sigma_min: f64,
    budget: Option<(f64, f64)>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let envs = read_dataset_csv(x, y)?;
    let w = CoefficientVector::new(w)?;
    let source = match budget {
        Some((p_e, q_e)) => ConstraintSource::Uniform(PowerConstraint { p_e, q_e }),
        None => ConstraintSource::FromData,
    };
    let report = assemble_report(&envs, &w, sigma_min, &source)?;
    let mut text = String::from("env,prop1,prop2,cor1,prop3,cor2\n");
    for e in &report.per_env {
        text.push_str(&bound_row(&e.env_id.to_string(), &e.values));
        text.push('\n');
    }
    text.push_str(&bound_row("overall", &report.overall));
    text.push('\n');
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

/// `[1,3]`, `[]`, or `NONE` for an abstention.
pub fn format_estimate(estimate: Option<SupportSet>) -> String {
    match estimate {
        None => "NONE".into(),
        Some(s) => format!("[{}]", s.indices().map(|i| i.to_string()).collect::<Vec<_>>().join(",")),
    }
}

fn cmd_decode(
    x: &Path,
    y: &Path,
    method: Method,
    w: Option<Vec<f64>>,
    p: Option<f64>,
    sigma: f64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let known_w = |w: Option<Vec<f64>>| -> Result<CoefficientVector<f64>, CliError> {
        let w = w.ok_or_else(|| CliError::Usage(format!("--w is required for {method:?}")))?;
        Ok(CoefficientVector::new(w)?)
    };
    let outcome = match method {
        Method::IcpMddKnown => {
            let w = known_w(w)?;
            icp_mdd_known(&load(x, y)?, &w)?
        }
        Method::MiiKnown => {
            let w = known_w(w)?;
            mii_known(&load(x, y)?, &w, sigma)?
        }
        Method::IcpMdd => {
            let p = p.ok_or_else(|| CliError::Usage("--p is required for icp_mdd".into()))?;
            icp_mdd(&load(x, y)?, p)?
        }
    };
    writeln!(out, "{}", format_estimate(outcome.estimate)).map_err(|e| CliError::Io(e.to_string()))
}

fn load(x: &Path, y: &Path) -> Result<Vec<EnvironmentData<f64>>, CliError> {
    Ok(read_dataset_csv(x, Some(y))?)
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Experiment {
            config,
            seed,
            trials,
            output,
            keep_trials,
        } => cmd_experiment(&config, seed, trials, output, keep_trials, out),
        Command::Bounds {
            x,
            y,
            w,
            sigma_min,
            p_e,
            q_e,
        } => cmd_bounds(&x, y.as_deref(), w, sigma_min, p_e.zip(q_e), out),
        Command::Decode {
            x,
            y,
            method,
            w,
            p,
            sigma,
        } => cmd_decode(&x, &y, method, w, p, sigma, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_format() {
        assert_eq!(format_estimate(None), "NONE");
        assert_eq!(format_estimate(Some(SupportSet::EMPTY)), "[]");
        assert_eq!(format_estimate(SupportSet::from_indices([3, 1]).ok()), "[1,3]");
    }

    #[test]
    fn output_key_is_split_off() {
        let mut v = serde_json::to_value(crate::harness::builtin("fig1a").unwrap()).unwrap();
        v["output"] = "x.csv".into();
        let (s, out) = parse_config(&v.to_string()).unwrap();
        assert_eq!(s.name, "fig1a");
        assert_eq!(out, Some(PathBuf::from("x.csv")));
        v["output"] = 3.into();
        assert_eq!(parse_config(&v.to_string()).unwrap_err().field, "output");
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["icpmac", "bounds", "--x", "a.csv", "--sigma-min", "1"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["icpmac", "--help"], &mut o, &mut e), EXIT_OK);
    }
}
