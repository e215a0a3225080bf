use ndarray::{Array1, Array2, Axis};

use crate::decoders::DecodeOutcome;
use crate::error::{Error, Result};
use crate::linalg::{least_squares, norm, residual, select_columns};
use crate::model::EnvironmentData;
use crate::scalar::Real;
use crate::support::{supports, SupportSet};

/// Pooled least-squares fit of `Y` on the columns in a support.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit<T> {
    /// One coefficient per index of the support, ascending.
    pub gamma_hat: Vec<T>,
    pub residual_norm: T,
    pub rank: usize,
}

struct Pooled<T> {
    x: Array2<T>,
    y: Array1<T>,
}

fn sorted_by_id<T: Real>(envs: &[EnvironmentData<T>]) -> Result<Vec<&EnvironmentData<T>>> {
    if envs.is_empty() {
        return Err(Error::EmptyData);
    }
    let m = envs[0].m();
    if let Some(bad) = envs.iter().find(|e| e.m() != m) {
        return Err(Error::Dimension(format!(
            "environment {} has {} predictors, expected {m}",
            bad.env_id,
            bad.m()
        )));
    }
    let mut sorted: Vec<_> = envs.iter().collect();
    sorted.sort_by_key(|e| e.env_id);
    Ok(sorted)
}

fn pool<T: Real>(sorted: &[&EnvironmentData<T>]) -> Result<Pooled<T>> {
    let xs: Vec<_> = sorted.iter().map(|e| e.x().view()).collect();
    let ys = sorted
        .iter()
        .map(|e| e.response().map(|y| y.view()))
        .collect::<Result<Vec<_>>>()?;
    let x = ndarray::concatenate(Axis(0), &xs).map_err(|e| Error::Dimension(e.to_string()))?;
    let y = ndarray::concatenate(Axis(0), &ys).map_err(|e| Error::Dimension(e.to_string()))?;
    Ok(Pooled { x, y })
}

/// Regresses the pooled response on the pooled columns of `support`, stacking
/// environments in env-id order, no intercept. Rank-deficient and
/// underdetermined systems return the minimum-norm solution.
pub fn pooled_least_squares<T: Real>(
    envs: &[EnvironmentData<T>],
    support: SupportSet,
) -> Result<RegressionFit<T>> {
    let sorted = sorted_by_id(envs)?;
    support.check_fits(sorted[0].m())?;
    let pooled = pool(&sorted)?;
    Ok(fit(&pooled, support))
}

fn fit<T: Real>(pooled: &Pooled<T>, support: SupportSet) -> RegressionFit<T> {
    let cols: Vec<usize> = support.indices().map(|i| i - 1).collect();
    let a = select_columns(pooled.x.view(), &cols);
    let ls = least_squares(a.view(), pooled.y.view());
    let r = residual(a.view(), &ls.solution, pooled.y.view());
    RegressionFit {
        gamma_hat: ls.solution,
        residual_norm: norm(r.view()),
        rank: ls.rank,
    }
}

/// Per-environment residual norms `d^e_S = ‖Y^e - X^e_S γ̂_S‖` of the pooled
/// fit for every support. Computing these once lets several thresholds
/// `p` share the regressions.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetResiduals<T> {
    pub m: usize,
    pub env_ids: Vec<usize>,
    /// `distances[S.bits()][k]` for the k-th environment in env-id order.
    pub distances: Vec<Vec<T>>,
}

impl<T: Real> SubsetResiduals<T> {
    pub fn compute(envs: &[EnvironmentData<T>]) -> Result<Self> {
        let sorted = sorted_by_id(envs)?;
        let m = sorted[0].m();
        let pooled = pool(&sorted)?;
        let mut distances = Vec::new();
        for s in supports(m)? {
            let fitted = fit(&pooled, s);
            let cols: Vec<usize> = s.indices().map(|i| i - 1).collect();
            let row = sorted
                .iter()
                .map(|env| {
                    let a = select_columns(env.x().view(), &cols);
                    let y = env.response().expect("pooled above");
                    norm(residual(a.view(), &fitted.gamma_hat, y.view()).view())
                })
                .collect();
            distances.push(row);
        }
        Ok(SubsetResiduals {
            m,
            env_ids: sorted.iter().map(|e| e.env_id).collect(),
            distances,
        })
    }

    /// Supports with `d^e_S ≤ d^e + p·d^e` in every environment, where
    /// `d^e = min_S d^e_S`.
    pub fn accepted(&self, p: T) -> Vec<SupportSet> {
        let envs = self.env_ids.len();
        let thresholds: Vec<T> = (0..envs)
            .map(|k| {
                let d = self
                    .distances
                    .iter()
                    .map(|row| row[k])
                    .fold(T::infinity(), T::min);
                d + p * d
            })
            .collect();
        self.distances
            .iter()
            .enumerate()
            .filter(|(_, row)| row.iter().zip(&thresholds).all(|(&d, &t)| d <= t))
            .map(|(bits, _)| SupportSet::from_bits(bits as u32))
            .collect()
    }

    /// Intersection of the accepted family; abstains when nothing is accepted.
    pub fn decode(&self, p: T) -> Result<DecodeOutcome> {
        if !(p >= T::zero()) {
            return Err(Error::invalid("p", "must be non-negative"));
        }
        let accepted = self.accepted(p);
        let estimate = if accepted.is_empty() {
            None
        } else {
            Some(
                accepted
                    .iter()
                    .fold(SupportSet::full(self.m), |acc, &s| acc.intersection(s)),
            )
        };
        Ok(DecodeOutcome {
            estimate,
            accepted_sets: Some(accepted),
            per_env_estimates: Vec::new(),
            low_confidence: false,
        })
    }
}

/// Unknown-coefficient decoder: pooled fit per support, per-environment
/// acceptance within a factor `1 + p` of the best residual, intersection of
/// the accepted supports.
pub fn icp_mdd<T: Real>(envs: &[EnvironmentData<T>], p: T) -> Result<DecodeOutcome> {
    if !(p >= T::zero()) {
        return Err(Error::invalid("p", "must be non-negative"));
    }
    SubsetResiduals::compute(envs)?.decode(p)
}
