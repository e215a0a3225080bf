//! The stock experiments.

use crate::bounds::BoundKind;
use crate::harness::scenario::{
    DecoderSpec, EdgeSetting, ExperimentScenario, GeneratorKind, Grid, WPolicy,
};

pub const SAMPLE_SIZES: [usize; 7] = [2, 5, 10, 20, 50, 100, 200];

pub const BUILTIN_NAMES: [&str; 5] = ["fig1a", "fig1b", "fig1c", "fig2a", "fig2b"];

fn known_decoders() -> Vec<DecoderSpec> {
    vec![DecoderSpec::IcpMddKnown, DecoderSpec::MiiKnown]
}

fn unknown_decoders() -> Vec<DecoderSpec> {
    [0.01, 0.05, 0.1].into_iter().map(|p| DecoderSpec::IcpMdd { p }).collect()
}

fn base(name: &str, generator: GeneratorKind, decoders: Vec<DecoderSpec>) -> ExperimentScenario {
    ExperimentScenario {
        name: name.to_string(),
        generator,
        grid: Grid::SampleSizes(SAMPLE_SIZES.to_vec()),
        env_count: 2,
        trials: 1000,
        seed: 20_240_601,
        decoders,
        bounds: BoundKind::ALL.to_vec(),
        sigma: 1.0,
        sigma_min: None,
        w_policy: WPolicy::Drawn,
        samples_per_env: None,
        intervention_means: None,
        edges: EdgeSetting::Random,
        m_range: [3, 8],
        constraints: None,
    }
}

/// Looks up a stock scenario by name.
pub fn builtin(name: &str) -> Option<ExperimentScenario> {
    let s = match name {
        "fig1a" => ExperimentScenario {
            w_policy: WPolicy::AllOnes,
            ..base(name, GeneratorKind::Simplex, known_decoders())
        },
        "fig1b" => base(name, GeneratorKind::SemKnown, known_decoders()),
        "fig1c" => ExperimentScenario {
            grid: Grid::Env2Means((-5..=5).map(f64::from).collect()),
            samples_per_env: Some(20),
            intervention_means: Some(vec![0.0, 0.0]),
            ..base(name, GeneratorKind::SemKnown, known_decoders())
        },
        "fig2a" => ExperimentScenario {
            edges: EdgeSetting::None,
            ..base(name, GeneratorKind::SemUnknown, unknown_decoders())
        },
        "fig2b" => base(name, GeneratorKind::SemUnknown, unknown_decoders()),
        _ => return None,
    };
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_valid() {
        for name in BUILTIN_NAMES {
            builtin(name).unwrap().validate().unwrap();
        }
        assert!(builtin("fig3").is_none());
    }
}
