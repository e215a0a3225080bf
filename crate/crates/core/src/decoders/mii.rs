//! Invariance testing with known weights and known noise level.
//!
//! For a candidate `S` the residual `r^e = Y^e - X^e_S w_S` should be
//! `N(0, σ² I)` in every environment. Two tests check this per environment:
//! a two-sided z-test of mean zero, and a two-sided chi-square test of
//! `Σ r_t² / σ²` against `n_e` degrees of freedom. They are combined as
//! `min(1, 2·min(p_mean, p_var))` (Bonferroni) and the subset score is the
//! minimum over environments.

use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::decoders::DecodeOutcome;
use crate::error::{Error, Result};
use crate::geometry::for_each_signal;
use crate::model::{CoefficientVector, EnvironmentData};
use crate::normal::std_normal_cdf;
use crate::scalar::Real;
use crate::support::{support_count, SupportSet};

/// Component p-values of one residual vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiiTest {
    pub p_mean: f64,
    pub p_var: f64,
    pub combined: f64,
}

/// Chi-square CDF with `df` degrees of freedom, both tails.
fn chi_square_tails(stat: f64, df: f64) -> (f64, f64) {
    if stat <= 0.0 {
        return (0.0, 1.0);
    }
    if stat.is_infinite() {
        return (1.0, 0.0);
    }
    (gamma_lr(df / 2.0, stat / 2.0), gamma_ur(df / 2.0, stat / 2.0))
}

/// Tests a residual vector for zero mean and variance `σ²`.
pub fn invariance_p_value<T: Real>(residual: impl IntoIterator<Item = T>, sigma: T) -> MiiTest {
    let sigma = sigma.to_f64_lossy();
    let (mut n, mut sum, mut sum_sq) = (0usize, 0.0f64, 0.0f64);
    for r in residual {
        let r = r.to_f64_lossy();
        n += 1;
        sum += r;
        sum_sq += r * r;
    }
    let nf = n as f64;
    let z = sum / (sigma * nf.sqrt());
    let p_mean = (2.0 * std_normal_cdf(-z.abs())).min(1.0);
    let (lower, upper) = chi_square_tails(sum_sq / (sigma * sigma), nf);
    let p_var = (2.0 * lower.min(upper)).min(1.0);
    MiiTest {
        p_mean,
        p_var,
        combined: (2.0 * p_mean.min(p_var)).clamp(0.0, 1.0),
    }
}

/// Picks the support whose residuals look most like pure `N(0, σ²)` noise
/// across all environments (largest minimum combined p-value).
pub fn mii_known<T: Real>(
    envs: &[EnvironmentData<T>],
    w: &CoefficientVector<T>,
    sigma: T,
) -> Result<DecodeOutcome> {
    if envs.is_empty() {
        return Err(Error::invalid("envs", "at least one environment is required"));
    }
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    let count = support_count(w.len())?;
    let mut score = vec![f64::INFINITY; count];
    for env in envs {
        let y = env.response()?;
        for_each_signal(env, w, |s, v| {
            let test = invariance_p_value(y.iter().zip(v.iter()).map(|(&a, &b)| a - b), sigma);
            let slot = &mut score[s.bits() as usize];
            *slot = slot.min(test.combined);
        })?;
    }
    let (best, best_score) = score
        .iter()
        .copied()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    Ok(DecodeOutcome {
        estimate: Some(SupportSet::from_bits(best as u32)),
        accepted_sets: None,
        per_env_estimates: Vec::new(),
        low_confidence: best_score <= 0.0,
    })
}
