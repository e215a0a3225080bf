use crate::decoders::{argmin_first, DecodeOutcome};
use crate::error::{Error, Result};
use crate::geometry::for_each_signal;
use crate::model::{CoefficientVector, EnvironmentData};
use crate::scalar::Real;
use crate::support::{support_count, SupportSet};

/// `argmin_S ‖Y^e - Σ_{i∈S} w_i x_i^e‖`, earliest support on ties.
pub fn decode_min_distance<T: Real>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
) -> Result<SupportSet> {
    let y = env.response()?;
    let mut sq = vec![T::zero(); support_count(env.m())?];
    for_each_signal(env, w, |s, v| {
        sq[s.bits() as usize] = y
            .iter()
            .zip(v.iter())
            .map(|(&a, &b)| (a - b).pow2())
            .sum();
    })?;
    let best = argmin_first(sq.iter().copied()).expect("at least the empty support");
    Ok(SupportSet::from_bits(best as u32))
}

/// Minimum distance decoding in each environment; returns the common
/// estimate when all environments agree and abstains otherwise.
pub fn icp_mdd_known<T: Real>(
    envs: &[EnvironmentData<T>],
    w: &CoefficientVector<T>,
) -> Result<DecodeOutcome> {
    if envs.is_empty() {
        return Err(Error::invalid("envs", "at least one environment is required"));
    }
    let per_env = envs
        .iter()
        .map(|env| Ok((env.env_id, decode_min_distance(env, w)?)))
        .collect::<Result<Vec<_>>>()?;
    let first = per_env[0].1;
    let estimate = per_env.iter().all(|&(_, s)| s == first).then_some(first);
    Ok(DecodeOutcome {
        estimate,
        accepted_sets: None,
        per_env_estimates: per_env,
        low_confidence: false,
    })
}
