//! Sent signals `v_S = Σ_{i∈S} w_i x_i` and the distances between them.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::Result;
use crate::model::{CoefficientVector, EnvironmentData};
use crate::scalar::Real;
use crate::support::{support_count, SupportSet};

/// Relative tolerance of the collision test.
pub const COLLISION_TOLERANCE: f64 = 1e-9;

/// The noiseless response produced when the predictors in `support` transmit.
/// Summation runs over ascending indices.
pub fn sent_signal<T: Real>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
    support: SupportSet,
) -> Result<Array1<T>> {
    env.check_weights(w)?;
    support.check_fits(env.m())?;
    let mut v = Array1::zeros(env.n());
    for col in support.columns() {
        v.scaled_add(w[col], &env.column(col));
    }
    Ok(v)
}

/// Euclidean distance between two sent signals.
pub fn pairwise_distance<T: Real>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
    a: SupportSet,
    b: SupportSet,
) -> Result<T> {
    let va = sent_signal(env, w, a)?;
    let vb = sent_signal(env, w, b)?;
    Ok(euclidean(va.view(), vb.view()))
}

/// Calls `visit(S, v_S)` for every support over the environment's
/// predictors. Signals are built by adding columns in ascending index order,
/// so each `v_S` is bit-identical to [`sent_signal`]. Memory stays at
/// `m + 1` vectors regardless of `2^m`; visiting order is unspecified.
pub fn for_each_signal<T: Real, F>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(SupportSet, ArrayView1<'_, T>),
{
    env.check_weights(w)?;
    support_count(env.m())?;
    let mut stack: Vec<Array1<T>> = vec![Array1::zeros(env.n())];
    walk(env, w, 0, 0, &mut stack, &mut visit);
    Ok(())
}

fn walk<T: Real, F>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
    next_col: usize,
    bits: u32,
    stack: &mut Vec<Array1<T>>,
    visit: &mut F,
) where
    F: FnMut(SupportSet, ArrayView1<'_, T>),
{
    visit(SupportSet::from_bits(bits), stack.last().expect("root").view());
    for col in next_col..env.m() {
        let mut v = stack.last().expect("root").clone();
        v.scaled_add(w[col], &env.column(col));
        stack.push(v);
        walk(env, w, col + 1, bits | (1 << col), stack, visit);
        stack.pop();
    }
}

pub(crate) fn euclidean<T: Real>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y).pow2())
        .sum::<T>()
        .sqrt()
}

/// All `2^m` sent signals of one environment, row `S.bits()` holding `v_S`.
#[derive(Debug, Clone)]
pub struct SignalBook<T> {
    signals: Array2<T>,
}

impl<T: Real> SignalBook<T> {
    pub fn new(env: &EnvironmentData<T>, w: &CoefficientVector<T>) -> Result<Self> {
        env.check_weights(w)?;
        let count = support_count(env.m())?;
        let mut signals = Array2::zeros((count, env.n()));
        // v_S = v_{S \ max(S)} + w_max x_max: same addition order as `sent_signal`.
        for bits in 1..count {
            let (rest, col) = SupportSet::from_bits(bits as u32)
                .pop_highest()
                .expect("non-empty");
            let r = rest.bits() as usize;
            let weight = w[col];
            for t in 0..env.n() {
                signals[[bits, t]] = signals[[r, t]] + weight * env.x()[[t, col]];
            }
        }
        Ok(SignalBook { signals })
    }

    pub fn len(&self) -> usize {
        self.signals.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn signal(&self, support: SupportSet) -> ArrayView1<'_, T> {
        self.signals.row(support.bits() as usize)
    }

    pub fn signals(&self) -> &Array2<T> {
        &self.signals
    }

    pub fn distance(&self, a: SupportSet, b: SupportSet) -> T {
        euclidean(self.signal(a), self.signal(b))
    }

    /// Largest signal norm; scales the collision tolerance.
    pub fn max_norm(&self) -> T {
        self.signals
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|&x| x.pow2()).sum::<T>().sqrt())
            .fold(T::zero(), T::max)
    }

    /// Full symmetric distance table.
    pub fn distances(&self) -> DistanceTable<T> {
        let count = self.len();
        let mut table = Array2::zeros((count, count));
        for a in 0..count {
            for b in (a + 1)..count {
                let d = euclidean(self.signals.row(a), self.signals.row(b));
                table[[a, b]] = d;
                table[[b, a]] = d;
            }
        }
        DistanceTable {
            table,
            max_norm: self.max_norm(),
        }
    }
}

/// Pairwise distances `d_{S,S'}` between all sent signals of one environment.
#[derive(Debug, Clone)]
pub struct DistanceTable<T> {
    table: Array2<T>,
    max_norm: T,
}

impl<T: Real> DistanceTable<T> {
    pub fn get(&self, a: SupportSet, b: SupportSet) -> T {
        self.table[[a.bits() as usize, b.bits() as usize]]
    }

    pub fn len(&self) -> usize {
        self.table.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `min_{S' ≠ S} d_{S,S'}`, or `+∞` when `S` is the only support (m = 0).
    pub fn nearest_neighbour(&self, s: SupportSet) -> T {
        let row = s.bits() as usize;
        self.table
            .row(row)
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != row)
            .fold(T::infinity(), |acc, (_, &d)| acc.min(d))
    }

    pub fn collision_threshold(&self) -> T {
        T::lit(COLLISION_TOLERANCE) * (T::one() + self.max_norm)
    }

    pub fn collisions(&self) -> Vec<(SupportSet, SupportSet)> {
        let tol = self.collision_threshold();
        let count = self.len();
        let mut out = Vec::new();
        for a in 0..count {
            for b in (a + 1)..count {
                if self.table[[a, b]] <= tol {
                    out.push((
                        SupportSet::from_bits(a as u32),
                        SupportSet::from_bits(b as u32),
                    ));
                }
            }
        }
        out
    }

    pub fn has_collision(&self) -> bool {
        let tol = self.collision_threshold();
        let count = self.len();
        (0..count).any(|a| ((a + 1)..count).any(|b| self.table[[a, b]] <= tol))
    }
}

/// Unordered pairs of distinct supports whose sent signals coincide, i.e.
/// `d_{S,S'} ≤ 1e-9 · (1 + max_S ‖v_S‖)`. An empty result means the
/// environment is collision-free.
pub fn detect_collisions<T: Real>(
    env: &EnvironmentData<T>,
    w: &CoefficientVector<T>,
) -> Result<Vec<(SupportSet, SupportSet)>> {
    Ok(SignalBook::new(env, w)?.distances().collisions())
}
