//! Lower bounds on the support-recovery error probability.
//!
//! Every bound is evaluated for a single environment; the error probability
//! over all environments is at least the maximum of the per-environment
//! values, which [`assemble_report`] takes. Only `σ_min` enters the bounds.
//!
//! | bound   | needs                         | valid for |
//! |---------|-------------------------------|-----------|
//! | `prop1` | the realized design           | any m     |
//! | `prop2` | codeword power budget `P_e`   | m ≥ 2     |
//! | `cor1`  | codeword power budget `P_e`   | m ≥ 2     |
//! | `prop3` | signal power budget `Q_e > 0` | m ≥ 1     |
//! | `cor2`  | signal power budget `Q_e`     | m ≥ 2     |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DistanceTable, SignalBook};
use crate::model::{CoefficientVector, EnvironmentData};
use crate::normal::std_normal_cdf;
use crate::scalar::{pow2i, Real};
use crate::support::{supports, MAX_PREDICTORS};

/// Largest m accepted by [`average_squared_distance`] (it visits all `4^m` pairs).
pub const MAX_PAIRWISE_PREDICTORS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Prop1,
    Prop2,
    Cor1,
    Prop3,
    Cor2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] = [
        BoundKind::Prop1,
        BoundKind::Prop2,
        BoundKind::Cor1,
        BoundKind::Prop3,
        BoundKind::Cor2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Prop1 => "prop1",
            BoundKind::Prop2 => "prop2",
            BoundKind::Cor1 => "cor1",
            BoundKind::Prop3 => "prop3",
            BoundKind::Cor2 => "cor2",
        }
    }

    pub fn needs_constraint(self) -> bool {
        self != BoundKind::Prop1
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-environment power budgets: `p_e` bounds the weighted codeword energy,
/// `q_e` the energy of all `2^m` sendable signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConstraint<T> {
    pub p_e: T,
    pub q_e: T,
}

/// Where the budgets used by the constrained bounds come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSource<T> {
    /// Smallest budgets the realized design satisfies.
    FromData,
    /// One declared budget per environment, in environment order.
    Declared(Vec<PowerConstraint<T>>),
    /// Same declared budget in every environment.
    Uniform(PowerConstraint<T>),
    /// No budgets: only `prop1` is reported.
    Absent,
}

fn check_sigma<T: Real>(sigma_min: T) -> Result<()> {
    if sigma_min > T::zero() && sigma_min.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("sigma_min", "must be positive and finite"))
    }
}

fn check_budget<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be non-negative"))
    }
}

fn check_m(m: usize, min: usize, why: &str) -> Result<()> {
    if m > MAX_PREDICTORS {
        return Err(Error::Capacity {
            m,
            max: MAX_PREDICTORS,
        });
    }
    if m < min {
        return Err(Error::invalid("m", format!("must be at least {min} ({why})")));
    }
    Ok(())
}

fn check_n(n_e: usize) -> Result<()> {
    if n_e == 0 {
        Err(Error::invalid("n_e", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// `Φ(-√ratio)`, with `ratio = +∞` mapping to 0.
fn phi_neg_sqrt<T: Real>(ratio: T) -> T {
    std_normal_cdf(-ratio.sqrt())
}

/// Nearest-neighbour bound for one realized design:
/// `2^{-m} Σ_S Φ(-min_{S'≠S} d_{S,S'} / (2σ_min))`.
pub fn bound_data_dependent<T: Real>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
    sigma_min: T,
) -> Result<T> {
    check_sigma(sigma_min)?;
    let table = SignalBook::new(env, w)?.distances();
    Ok(data_dependent_from_table(&table, sigma_min))
}

/// Same as [`bound_data_dependent`] for a precomputed distance table.
pub fn data_dependent_from_table<T: Real>(table: &DistanceTable<T>, sigma_min: T) -> T {
    let count = table.len();
    let two_sigma = T::lit(2.0) * sigma_min;
    let total: T = (0..count as u32)
        .map(|bits| {
            let d = table.nearest_neighbour(crate::SupportSet::from_bits(bits));
            std_normal_cdf(-d / two_sigma)
        })
        .sum();
    total / T::from_count(count)
}

/// Codeword power-constraint bound:
/// `Σ_{i=1}^{m-1} 2^{-i} Φ(-√(2^{m-i}(m-i) n_e P_e / (4σ²_min(2^{m-i}-1))))`.
pub fn bound_power_constraint<T: Real>(m: usize, n_e: usize, p_e: T, sigma_min: T) -> Result<T> {
    check_m(m, 2, "the sum over i = 1..m-1 is empty otherwise")?;
    check_n(n_e)?;
    check_budget("p_e", p_e)?;
    check_sigma(sigma_min)?;
    let energy = T::from_count(n_e) * p_e / sigma_min.pow2();
    Ok((1..m)
        .map(|i| power_term_weight::<T>(i) * power_term_phi(m - i, energy))
        .sum())
}

fn power_term_weight<T: Real>(i: usize) -> T {
    T::one() / pow2i::<T>(i)
}

/// `Φ(-√(2^j j E / (4(2^j - 1))))` with `E = n_e P_e / σ²_min` and `j = m - i`.
fn power_term_phi<T: Real>(j: usize, energy: T) -> T {
    let size = pow2i::<T>(j);
    let ratio = size * T::from_count(j) * energy / (T::lit(4.0) * (size - T::one()));
    phi_neg_sqrt(ratio)
}

/// The `i`-th weighted summand of [`bound_power_constraint`], `i ∈ 1..m`.
pub fn power_constraint_term<T: Real>(
    m: usize,
    i: usize,
    n_e: usize,
    p_e: T,
    sigma_min: T,
) -> Result<T> {
    check_m(m, 2, "the sum over i = 1..m-1 is empty otherwise")?;
    if i == 0 || i >= m {
        return Err(Error::invalid("i", format!("must lie in 1..{m}")));
    }
    check_n(n_e)?;
    check_budget("p_e", p_e)?;
    check_sigma(sigma_min)?;
    let energy = T::from_count(n_e) * p_e / sigma_min.pow2();
    Ok(power_term_weight::<T>(i) * power_term_phi(m - i, energy))
}

/// Single-term simplification of [`bound_power_constraint`]. With
/// `k0 = ⌊m/2⌋` it evaluates `(1 - 2^{-k0}) Φ(-√(2^{m-k0}(m-k0) n_e P_e /
/// (4σ²_min(2^{m-k0}-1))))`; for even `m` this is
/// `(1 - 2^{-m/2}) Φ(-√(2^{m/2} m n_e P_e / (8σ²_min(2^{m/2}-1))))`.
pub fn bound_power_constraint_simple<T: Real>(
    m: usize,
    n_e: usize,
    p_e: T,
    sigma_min: T,
) -> Result<T> {
    check_m(m, 2, "the underlying sum is empty otherwise")?;
    check_n(n_e)?;
    check_budget("p_e", p_e)?;
    check_sigma(sigma_min)?;
    let k0 = m / 2;
    let energy = T::from_count(n_e) * p_e / sigma_min.pow2();
    Ok((T::one() - T::one() / pow2i::<T>(k0)) * power_term_phi(m - k0, energy))
}

/// Signal power-constraint bound:
/// `2^{-m} Σ_{i=1}^{2^m-1} Φ(-√((2^m-i) n_e Q_e / (2σ²_min(2^m-1-i))))`.
/// The `i = 2^m - 1` summand has a zero denominator and is taken as its
/// `Q_e > 0` limit, 0; `Q_e = 0` is rejected.
pub fn bound_signal_constraint<T: Real>(m: usize, n_e: usize, q_e: T, sigma_min: T) -> Result<T> {
    check_m(m, 1, "no distinct signals exist for m = 0")?;
    check_n(n_e)?;
    if !(q_e > T::zero()) {
        return Err(Error::invalid("q_e", "must be positive"));
    }
    check_sigma(sigma_min)?;
    let size = 1usize << m;
    let energy = T::from_count(n_e) * q_e / sigma_min.pow2();
    let two = T::lit(2.0);
    let total: T = (1..size - 1)
        .map(|i| {
            let ratio = T::from_count(size - i) * energy / (two * T::from_count(size - 1 - i));
            phi_neg_sqrt(ratio)
        })
        .sum();
    Ok(total / T::from_count(size))
}

/// `½ Φ(-√(2^m n_e Q_e / (2σ²_min(2^m - 2))))`.
pub fn bound_signal_constraint_simple<T: Real>(
    m: usize,
    n_e: usize,
    q_e: T,
    sigma_min: T,
) -> Result<T> {
    check_m(m, 2, "2^m - 2 vanishes for m = 1")?;
    check_n(n_e)?;
    check_budget("q_e", q_e)?;
    check_sigma(sigma_min)?;
    let size = pow2i::<T>(m);
    let two = T::lit(2.0);
    let ratio = size * T::from_count(n_e) * q_e / (two * sigma_min.pow2() * (size - two));
    Ok(T::lit(0.5) * phi_neg_sqrt(ratio))
}

/// Smallest budgets that the design satisfies with equality:
/// `P_e = Σ_i Σ_t (w_i x_{i,t})² / (m n_e)` and
/// `Q_e = Σ_t Σ_S v_{S,t}² / (2^m n_e)`.
///
/// `Q_e` uses `Σ_S v_{S,t}² = 2^{m-2}((Σ_i a_i)² + Σ_i a_i²)` with
/// `a_i = w_i x_{i,t}`, so no enumeration over supports is needed.
pub fn tight_constraints_from_data<T: Real>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
) -> Result<PowerConstraint<T>> {
    env.check_weights(w)?;
    let (n, m) = (env.n(), env.m());
    if m == 0 {
        return Ok(PowerConstraint {
            p_e: T::zero(),
            q_e: T::zero(),
        });
    }
    let x = env.x();
    let mut codeword_energy = T::zero();
    let mut signal_energy = T::zero();
    for t in 0..n {
        let mut sum = T::zero();
        let mut sum_sq = T::zero();
        for c in 0..m {
            let a = w[c] * x[[t, c]];
            sum = sum + a;
            sum_sq = sum_sq + a.pow2();
        }
        codeword_energy = codeword_energy + sum_sq;
        signal_energy = signal_energy + sum.pow2() + sum_sq;
    }
    let quarter_count = pow2i::<T>(m) / T::lit(4.0);
    let n_t = T::from_count(n);
    Ok(PowerConstraint {
        p_e: codeword_energy / (T::from_count(m) * n_t),
        q_e: quarter_count * signal_energy / (pow2i::<T>(m) * n_t),
    })
}

/// Mean of `d²_{S,S'}` over unordered pairs of distinct supports. Returns 0
/// when `m = 0` (there are no pairs).
pub fn average_squared_distance<T: Real>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
) -> Result<T> {
    if env.m() > MAX_PAIRWISE_PREDICTORS {
        return Err(Error::Capacity {
            m: env.m(),
            max: MAX_PAIRWISE_PREDICTORS,
        });
    }
    let book = SignalBook::new(env, w)?;
    let all: Vec<_> = supports(env.m())?.collect();
    let mut total = T::zero();
    let mut pairs = 0usize;
    for (k, &a) in all.iter().enumerate() {
        for &b in &all[k + 1..] {
            total = total + book.distance(a, b).pow2();
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Ok(T::zero());
    }
    Ok(total / T::from_count(pairs))
}

/// `2^m m n_e P_e / (2^m - 1)`: the ceiling on the average squared distance
/// of any design meeting the codeword budget `P_e`.
pub fn average_squared_distance_ceiling<T: Real>(m: usize, n_e: usize, p_e: T) -> T {
    let size = pow2i::<T>(m);
    size * T::from_count(m) * T::from_count(n_e) * p_e / (size - T::one())
}

/// Bound values for one environment; `None` marks "not applicable".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValues<T> {
    pub prop1: Option<T>,
    pub prop2: Option<T>,
    pub cor1: Option<T>,
    pub prop3: Option<T>,
    pub cor2: Option<T>,
}

impl<T> Default for BoundValues<T> {
    fn default() -> Self {
        BoundValues {
            prop1: None,
            prop2: None,
            cor1: None,
            prop3: None,
            cor2: None,
        }
    }
}

impl<T: Real> BoundValues<T> {
    pub fn get(&self, kind: BoundKind) -> Option<T> {
        match kind {
            BoundKind::Prop1 => self.prop1,
            BoundKind::Prop2 => self.prop2,
            BoundKind::Cor1 => self.cor1,
            BoundKind::Prop3 => self.prop3,
            BoundKind::Cor2 => self.cor2,
        }
    }

    pub fn set(&mut self, kind: BoundKind, value: Option<T>) {
        let slot = match kind {
            BoundKind::Prop1 => &mut self.prop1,
            BoundKind::Prop2 => &mut self.prop2,
            BoundKind::Cor1 => &mut self.cor1,
            BoundKind::Prop3 => &mut self.prop3,
            BoundKind::Cor2 => &mut self.cor2,
        };
        *slot = value;
    }

    /// Element-wise maximum over present values.
    pub fn max_with(&self, other: &BoundValues<T>) -> BoundValues<T> {
        let mut out = BoundValues::default();
        for kind in BoundKind::ALL {
            let v = match (self.get(kind), other.get(kind)) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            out.set(kind, v);
        }
        out
    }
}

/// Constrained bounds for one environment from its budgets. Bounds whose
/// preconditions fail (m too small, `Q_e = 0`) are left absent.
pub fn constrained_bounds<T: Real>(
    m: usize,
    n_e: usize,
    budget: PowerConstraint<T>,
    sigma_min: T,
) -> BoundValues<T> {
    BoundValues {
        prop1: None,
        prop2: bound_power_constraint(m, n_e, budget.p_e, sigma_min).ok(),
        cor1: bound_power_constraint_simple(m, n_e, budget.p_e, sigma_min).ok(),
        prop3: bound_signal_constraint(m, n_e, budget.q_e, sigma_min).ok(),
        cor2: bound_signal_constraint_simple(m, n_e, budget.q_e, sigma_min).ok(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvBounds<T> {
    pub env_id: usize,
    pub values: BoundValues<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub per_env: Vec<EnvBounds<T>>,
    pub overall: BoundValues<T>,
}

/// Evaluates every applicable bound per environment and the maximum across
/// environments.
pub fn assemble_report<T: Real>(
    envs: &[EnvironmentData<T>],
    w: &CoefficientVector<T>,
    sigma_min: T,
    constraints: &ConstraintSource<T>,
) -> Result<BoundReport<T>> {
    if envs.is_empty() {
        return Err(Error::invalid("envs", "at least one environment is required"));
    }
    check_sigma(sigma_min)?;
    if let ConstraintSource::Declared(list) = constraints {
        if list.len() != envs.len() {
            return Err(Error::Dimension(format!(
                "{} declared constraints for {} environments",
                list.len(),
                envs.len()
            )));
        }
    }
    let mut per_env = Vec::with_capacity(envs.len());
    for (k, env) in envs.iter().enumerate() {
        let budget = match constraints {
            ConstraintSource::FromData => Some(tight_constraints_from_data(env, w)?),
            ConstraintSource::Declared(list) => Some(list[k]),
            ConstraintSource::Uniform(c) => Some(*c),
            ConstraintSource::Absent => None,
        };
        let mut values = match budget {
            Some(b) => constrained_bounds(env.m(), env.n(), b, sigma_min),
            None => BoundValues::default(),
        };
        values.prop1 = Some(bound_data_dependent(env, w, sigma_min)?);
        per_env.push(EnvBounds {
            env_id: env.env_id,
            values,
        });
    }
    let overall = per_env
        .iter()
        .skip(1)
        .fold(per_env[0].values, |acc, e| acc.max_with(&e.values));
    Ok(BoundReport { per_env, overall })
}
