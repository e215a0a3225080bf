//! Support-recovery decoders.
//!
//! * [`decode_min_distance`] / [`icp_mdd_known`]: per-environment minimum
//!   distance decoding with known weights, accepted only when every
//!   environment agrees.
//! * [`mii_known`]: residual invariance testing with known weights and noise
//!   level; picks the most invariant subset.
//! * [`icp_mdd`]: unknown weights; pooled least squares per subset, accept
//!   subsets whose per-environment residual is within a factor `1 + p` of
//!   the best, return the intersection of accepted subsets.
//!
//! All argmin/argmax ties resolve to the earliest support in ascending
//! bitmask order.

mod known;
mod mii;
mod unknown;

pub use known::{decode_min_distance, icp_mdd_known};
pub use mii::{invariance_p_value, mii_known, MiiTest};
pub use unknown::{icp_mdd, pooled_least_squares, RegressionFit, SubsetResiduals};

use crate::support::SupportSet;

/// Result of a multi-environment decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// `None` when the decoder abstains.
    pub estimate: Option<SupportSet>,
    /// Accepted family (only for [`icp_mdd`]), in enumeration order.
    pub accepted_sets: Option<Vec<SupportSet>>,
    /// Per-environment estimates `(env_id, Ŝ^e)`, where the method has them.
    pub per_env_estimates: Vec<(usize, SupportSet)>,
    /// Set when the winning score carries no evidence (every candidate
    /// scored zero in [`mii_known`]).
    pub low_confidence: bool,
}

impl DecodeOutcome {
    pub fn is_correct(&self, truth: SupportSet) -> bool {
        self.estimate == Some(truth)
    }
}

/// Index of the smallest key; ties keep the earliest position.
pub(crate) fn argmin_first<T: PartialOrd + Copy>(values: impl IntoIterator<Item = T>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (k, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v < b) => {}
            _ => best = Some((k, v)),
        }
    }
    best.map(|(k, _)| k)
}
