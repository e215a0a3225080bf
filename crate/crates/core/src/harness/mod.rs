//! Monte Carlo experiments: simulate, decode, bound, aggregate, write CSV.

mod builtin;
mod output;
mod run;
mod scenario;

pub use builtin::{builtin, BUILTIN_NAMES, SAMPLE_SIZES};
pub use output::{
    aggregate, diagnostics_csv, emit_csv, rows_csv, sidecar_path, trials_csv, AggregateRow,
    CSV_HEADER, MII_TEST_NOTE,
};
pub use run::{
    run_scenario, run_with_decoders, simulate_trial, trial_bounds, HarnessError, ScenarioOutput,
    Trial, TrialDecoder, TrialRecord,
};
pub use scenario::{
    ConfigError, DecoderSpec, DeclaredBudget, EdgeSetting, ExperimentScenario, GeneratorKind,
    Grid, WPolicy,
};
