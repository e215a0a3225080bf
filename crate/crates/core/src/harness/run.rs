use std::sync::OnceLock;

use rayon::prelude::*;

use crate::bounds::{
    constrained_bounds, data_dependent_from_table, tight_constraints_from_data, BoundValues,
    PowerConstraint,
};
use crate::datagen::{
    generate_response, random_sem, sample_sem_environment, simplex_codebook, uniform_coefficient,
    EdgePolicy, SemConfig,
};
use crate::decoders::{icp_mdd_known, mii_known, DecodeOutcome, SubsetResiduals};
use crate::error::{Error, Result};
use crate::geometry::SignalBook;
use crate::harness::output::{aggregate, AggregateRow};
use crate::harness::scenario::{
    ConfigError, DecoderSpec, EdgeSetting, ExperimentScenario, GeneratorKind, WPolicy,
};
use crate::model::{CoefficientVector, EnvironmentData, ModelSpec, NoiseSpec};
use crate::rng::{trial_stream, Purpose};
use crate::support::SupportSet;

/// One simulated dataset with everything a decoder may use.
pub struct Trial {
    pub envs: Vec<EnvironmentData<f64>>,
    pub model: ModelSpec<f64>,
    residuals: OnceLock<Result<SubsetResiduals<f64>>>,
}

impl Trial {
    pub fn new(envs: Vec<EnvironmentData<f64>>, model: ModelSpec<f64>) -> Self {
        Trial {
            envs,
            model,
            residuals: OnceLock::new(),
        }
    }

    /// Pooled subset fits, computed on first use and shared by every
    /// threshold.
    pub fn residuals(&self) -> Result<&SubsetResiduals<f64>> {
        self.residuals
            .get_or_init(|| SubsetResiduals::compute(&self.envs))
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// A decoder the harness can score.
pub trait TrialDecoder: Sync {
    fn label(&self) -> String;
    fn decode(&self, trial: &Trial) -> Result<DecodeOutcome>;
}

impl TrialDecoder for DecoderSpec {
    fn label(&self) -> String {
        DecoderSpec::label(self)
    }

    fn decode(&self, trial: &Trial) -> Result<DecodeOutcome> {
        match self {
            DecoderSpec::IcpMddKnown => icp_mdd_known(&trial.envs, &trial.model.w),
            DecoderSpec::MiiKnown => mii_known(&trial.envs, &trial.model.w, trial.model.noise.sigma),
            DecoderSpec::IcpMdd { p } => trial.residuals()?.decode(*p),
        }
    }
}

/// Outcome of one decoder on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scenario: String,
    pub seed: u64,
    pub grid_index: usize,
    pub grid_value: f64,
    pub trial: usize,
    pub method: String,
    /// Estimate differs from `S*`; abstentions count.
    pub error: bool,
    pub abstained: bool,
    pub low_confidence: bool,
    /// Requested bounds, maximized over environments.
    pub bounds: BoundValues<f64>,
    pub collision: bool,
    pub m: usize,
    pub s_star: SupportSet,
    pub estimate: Option<SupportSet>,
}

/// Aggregated rows plus the per-trial records they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub rows: Vec<AggregateRow>,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trial {trial} at grid point {grid_index}: {source}")]
    Trial {
        grid_index: usize,
        trial: usize,
        source: Error,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

fn weights(scenario: &ExperimentScenario, m: usize, drawn: impl FnOnce() -> Vec<f64>) -> Result<CoefficientVector<f64>> {
    match &scenario.w_policy {
        WPolicy::AllOnes => Ok(CoefficientVector::ones(m)),
        WPolicy::Drawn => CoefficientVector::new(drawn()),
        WPolicy::Fixed(w) => CoefficientVector::new(w.clone()),
    }
}

/// Generates the dataset for one (grid point, trial) pair.
pub fn simulate_trial(scenario: &ExperimentScenario, grid_index: usize, trial: usize) -> Result<Trial> {
    let seed = scenario.seed;
    let n = scenario.samples_for(grid_index);
    let noise = NoiseSpec::known(scenario.sigma)?;
    let mut model_rng = trial_stream(seed, grid_index, trial, 0, Purpose::Model);
    let (designs, model) = match scenario.generator {
        GeneratorKind::Simplex => {
            let s_star = SupportSet::from_bits(rand::Rng::random_range(&mut model_rng, 0..8u32));
            let w = weights(scenario, 3, || (0..3).map(|_| uniform_coefficient(&mut model_rng)).collect())?;
            let designs = (0..scenario.env_count)
                .map(|e| simplex_codebook(e, n))
                .collect::<Result<Vec<_>>>()?;
            (designs, ModelSpec::new(w, s_star, noise)?)
        }
        GeneratorKind::SemKnown | GeneratorKind::SemUnknown => {
            let means = (0..scenario.env_count)
                .map(|e| scenario.mean_for(grid_index, e))
                .collect();
            let edges = match scenario.edges {
                EdgeSetting::Random => EdgePolicy::Uniform,
                EdgeSetting::None => EdgePolicy::Independent,
            };
            let [lo, hi] = scenario.m_range;
            let config = SemConfig::new((lo, hi), edges, means)?;
            let sem = random_sem(&mut model_rng, &config);
            let w = weights(scenario, sem.m, || sem.y_coefficients.as_slice().to_vec())?;
            let designs = (0..scenario.env_count)
                .map(|e| {
                    let mut rng = trial_stream(seed, grid_index, trial, e, Purpose::Design);
                    sample_sem_environment(&sem, e, n, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            (designs, ModelSpec::new(w, sem.s_star, noise)?)
        }
    };
    let envs = designs
        .iter()
        .map(|env| {
            let mut rng = trial_stream(seed, grid_index, trial, env.env_id, Purpose::Noise);
            generate_response(env, &model, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trial::new(envs, model))
}

/// Requested bounds (max over environments) and the collision flag.
pub fn trial_bounds(scenario: &ExperimentScenario, trial: &Trial) -> Result<(BoundValues<f64>, bool)> {
    let sigma_min = scenario.sigma_min();
    let w = &trial.model.w;
    let mut overall: Option<BoundValues<f64>> = None;
    let mut collision = false;
    for env in &trial.envs {
        let table = SignalBook::new(env, w)?.distances();
        collision |= table.has_collision();
        if scenario.bounds.is_empty() {
            continue;
        }
        let budget = match &scenario.constraints {
            Some(c) => PowerConstraint { p_e: c.p_e, q_e: c.q_e },
            None => tight_constraints_from_data(env, w)?,
        };
        let mut values = constrained_bounds(env.m(), env.n(), budget, sigma_min);
        values.prop1 = Some(data_dependent_from_table(&table, sigma_min));
        overall = Some(match overall {
            Some(acc) => acc.max_with(&values),
            None => values,
        });
    }
    let mut kept = BoundValues::default();
    if let Some(all) = overall {
        for &kind in &scenario.bounds {
            kept.set(kind, all.get(kind));
        }
    }
    Ok((kept, collision))
}

fn run_one(
    scenario: &ExperimentScenario,
    decoders: &[&dyn TrialDecoder],
    grid_index: usize,
    trial_index: usize,
) -> Result<Vec<TrialRecord>> {
    let trial = simulate_trial(scenario, grid_index, trial_index)?;
    let (bounds, collision) = trial_bounds(scenario, &trial)?;
    let s_star = trial.model.s_star;
    decoders
        .iter()
        .map(|d| {
            let out = d.decode(&trial)?;
            Ok(TrialRecord {
                scenario: scenario.name.clone(),
                seed: scenario.seed,
                grid_index,
                grid_value: scenario.grid.value(grid_index),
                trial: trial_index,
                method: d.label(),
                error: !out.is_correct(s_star),
                abstained: out.estimate.is_none(),
                low_confidence: out.low_confidence,
                bounds,
                collision,
                m: trial.model.m(),
                s_star,
                estimate: out.estimate,
            })
        })
        .collect()
}

/// Runs the scenario's configured decoders.
pub fn run_scenario(scenario: &ExperimentScenario, threads: Option<usize>) -> std::result::Result<ScenarioOutput, HarnessError> {
    let decoders: Vec<&dyn TrialDecoder> = scenario.decoders.iter().map(|d| d as &dyn TrialDecoder).collect();
    run_with_decoders(scenario, &decoders, threads)
}

/// Runs arbitrary decoders over the scenario's simulated trials. Results do
/// not depend on `threads`; `None` uses rayon's default pool.
pub fn run_with_decoders(
    scenario: &ExperimentScenario,
    decoders: &[&dyn TrialDecoder],
    threads: Option<usize>,
) -> std::result::Result<ScenarioOutput, HarnessError> {
    scenario.validate()?;
    let jobs: Vec<(usize, usize)> = (0..scenario.grid.len())
        .flat_map(|g| (0..scenario.trials).map(move |t| (g, t)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(g, t)| {
                run_one(scenario, decoders, g, t).map_err(|source| HarnessError::Trial {
                    grid_index: g,
                    trial: t,
                    source,
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()
    };
    let per_trial = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let rows = aggregate(&records).expect("records share one scenario");
    Ok(ScenarioOutput { rows, records })
}
