//! Declarative description of one Monte Carlo experiment.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundKind;
use crate::support::MAX_PREDICTORS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Three simplex codewords of radius `√n_e` in every environment.
    Simplex,
    /// Random Gaussian SEM; decoders are given the true weights.
    SemKnown,
    /// Random Gaussian SEM; intended for the unknown-weight decoder.
    SemUnknown,
}

/// The swept quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Grid {
    /// Samples per environment.
    SampleSizes(Vec<usize>),
    /// Intervention mean of the second environment.
    Env2Means(Vec<f64>),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::SampleSizes(v) => v.len(),
            Grid::Env2Means(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, k: usize) -> f64 {
        match self {
            Grid::SampleSizes(v) => v[k] as f64,
            Grid::Env2Means(v) => v[k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderSpec {
    IcpMddKnown,
    MiiKnown,
    IcpMdd { p: f64 },
}

impl DecoderSpec {
    /// Column value in the output CSV.
    pub fn label(&self) -> String {
        match self {
            DecoderSpec::IcpMddKnown => "icp_mdd_known".into(),
            DecoderSpec::MiiKnown => "mii_known".into(),
            DecoderSpec::IcpMdd { p } => format!("icp_mdd(p={})", crate::format::fmt10(*p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WPolicy {
    AllOnes,
    Drawn,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeSetting {
    /// Uniform edge count on `0..=C(m,2)`.
    #[default]
    Random,
    /// Independent predictors.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredBudget {
    pub p_e: f64,
    pub q_e: f64,
}

fn default_m_range() -> [usize; 2] {
    [3, 8]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentScenario {
    pub name: String,
    pub generator: GeneratorKind,
    pub grid: Grid,
    pub env_count: usize,
    pub trials: usize,
    pub seed: u64,
    pub decoders: Vec<DecoderSpec>,
    pub bounds: Vec<BoundKind>,
    pub sigma: f64,
    /// Defaults to `sigma`.
    #[serde(default)]
    pub sigma_min: Option<f64>,
    pub w_policy: WPolicy,
    /// Samples per environment when the grid sweeps means.
    #[serde(default)]
    pub samples_per_env: Option<usize>,
    /// Top-level mean shift per environment; defaults to `e` for environment `e`.
    #[serde(default)]
    pub intervention_means: Option<Vec<f64>>,
    #[serde(default)]
    pub edges: EdgeSetting,
    #[serde(default = "default_m_range")]
    pub m_range: [usize; 2],
    /// Budgets for the constrained bounds; fitted to each dataset when absent.
    #[serde(default)]
    pub constraints: Option<DeclaredBudget>,
}

/// Invalid scenario field; `field` is the JSON path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid scenario field `{field}`: {msg}")]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

fn bad(field: impl Into<String>, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        msg: msg.into(),
    }
}

impl ExperimentScenario {
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min.unwrap_or(self.sigma)
    }

    /// Intervention mean of environment `env` at grid point `k`.
    pub fn mean_for(&self, k: usize, env: usize) -> f64 {
        if env == 1 {
            if let Grid::Env2Means(v) = &self.grid {
                return v[k];
            }
        }
        match &self.intervention_means {
            Some(means) => means[env],
            None => env as f64,
        }
    }

    pub fn samples_for(&self, k: usize) -> usize {
        match &self.grid {
            Grid::SampleSizes(v) => v[k],
            Grid::Env2Means(_) => self.samples_per_env.expect("validated"),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains([',', '\n', '"']) {
            return Err(bad("name", "must be non-empty and free of commas, quotes and newlines"));
        }
        if self.grid.is_empty() {
            return Err(bad("grid", "must contain at least one point"));
        }
        if self.trials == 0 {
            return Err(bad("trials", "must be at least 1"));
        }
        if self.env_count == 0 {
            return Err(bad("env_count", "must be at least 1"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(bad("sigma", "must be positive and finite"));
        }
        let sigma_min = self.sigma_min();
        if !(sigma_min > 0.0 && sigma_min.is_finite()) {
            return Err(bad("sigma_min", "must be positive and finite"));
        }
        if self.decoders.is_empty() {
            return Err(bad("decoders", "at least one decoder is required"));
        }
        for (k, d) in self.decoders.iter().enumerate() {
            if let DecoderSpec::IcpMdd { p } = d {
                if !(*p >= 0.0 && p.is_finite()) {
                    return Err(bad(format!("decoders[{k}].p"), "must be finite and non-negative"));
                }
            }
            if self.decoders[..k].contains(d) {
                return Err(bad(format!("decoders[{k}]"), "duplicate decoder"));
            }
        }
        let min_samples = if self.generator == GeneratorKind::Simplex { 2 } else { 1 };
        match &self.grid {
            Grid::SampleSizes(v) => {
                if let Some(k) = v.iter().position(|&n| n < min_samples) {
                    return Err(bad(format!("grid.sample_sizes[{k}]"), format!("must be at least {min_samples}")));
                }
            }
            Grid::Env2Means(v) => {
                if self.generator == GeneratorKind::Simplex {
                    return Err(bad("grid", "simplex designs have no intervention means to sweep"));
                }
                if self.env_count < 2 {
                    return Err(bad("env_count", "a mean sweep of environment 2 needs at least 2 environments"));
                }
                if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                    return Err(bad(format!("grid.env2_means[{k}]"), "must be finite"));
                }
                match self.samples_per_env {
                    Some(n) if n >= min_samples => {}
                    Some(_) => return Err(bad("samples_per_env", format!("must be at least {min_samples}"))),
                    None => return Err(bad("samples_per_env", "required when the grid sweeps env2_means")),
                }
            }
        }
        if let Some(means) = &self.intervention_means {
            if means.len() != self.env_count {
                return Err(bad("intervention_means", format!("expected {} entries", self.env_count)));
            }
            if means.iter().any(|x| !x.is_finite()) {
                return Err(bad("intervention_means", "must be finite"));
            }
        }
        let [lo, hi] = self.m_range;
        if lo == 0 || lo > hi || hi > MAX_PREDICTORS {
            return Err(bad("m_range", format!("need 1 <= lo <= hi <= {MAX_PREDICTORS}")));
        }
        if let WPolicy::Fixed(w) = &self.w_policy {
            let m = match self.generator {
                GeneratorKind::Simplex => Some(3),
                _ if lo == hi => Some(lo),
                _ => None,
            };
            match m {
                None => return Err(bad("w_policy.fixed", "a fixed w needs a fixed m (m_range lo == hi)")),
                Some(m) if w.len() != m => {
                    return Err(bad("w_policy.fixed", format!("expected {m} entries, found {}", w.len())))
                }
                _ => {}
            }
            if let Some(k) = w.iter().position(|x| *x == 0.0 || !x.is_finite()) {
                return Err(bad(format!("w_policy.fixed[{k}]"), "must be finite and non-zero"));
            }
        }
        if let Some(c) = &self.constraints {
            if !(c.p_e >= 0.0 && c.p_e.is_finite()) {
                return Err(bad("constraints.p_e", "must be finite and non-negative"));
            }
            if !(c.q_e >= 0.0 && c.q_e.is_finite()) {
                return Err(bad("constraints.q_e", "must be finite and non-negative"));
            }
        }
        for (k, b) in self.bounds.iter().enumerate() {
            if self.bounds[..k].contains(b) {
                return Err(bad(format!("bounds[{k}]"), "duplicate bound"));
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON scenario; errors carry the JSON path of
    /// the offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: ExperimentScenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            bad(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }
}
