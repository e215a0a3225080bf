//! Candidate supports: subsets of the predictor indices `1..=m`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of predictors any enumeration accepts.
pub const MAX_PREDICTORS: usize = 24;

/// A subset of predictor indices `{1, …, m}` stored as a bitmask.
///
/// Index `i` (1-based) lives in bit `i - 1`, so ascending bitmask order is
/// `∅, {1}, {2}, {1,2}, {3}, …`. That order is the enumeration order used
/// for every argmin/argmax tie-break in the crate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(u32);

impl SupportSet {
    pub const EMPTY: SupportSet = SupportSet(0);

    pub fn from_bits(bits: u32) -> Self {
        SupportSet(bits)
    }

    /// Builds a support from 1-based indices. Rejects index 0 and indices
    /// above [`MAX_PREDICTORS`].
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut bits = 0u32;
        for i in indices {
            if i == 0 || i > MAX_PREDICTORS {
                return Err(Error::invalid(
                    "support",
                    format!("index {i} outside 1..={MAX_PREDICTORS}"),
                ));
            }
            bits |= 1 << (i - 1);
        }
        Ok(SupportSet(bits))
    }

    /// Every index in `1..=m`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_PREDICTORS);
        SupportSet(((1u64 << m) - 1) as u32)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index >= 1 && index <= 32 && self.0 & (1 << (index - 1)) != 0
    }

    /// Largest index present, or 0 for the empty set.
    pub fn max_index(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    /// True when every index lies in `1..=m`.
    pub fn fits(self, m: usize) -> bool {
        self.max_index() <= m
    }

    pub(crate) fn check_fits(self, m: usize) -> Result<()> {
        if self.fits(m) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "support {self} references index {} but m = {m}",
                self.max_index()
            )))
        }
    }

    pub fn union(self, other: SupportSet) -> SupportSet {
        SupportSet(self.0 | other.0)
    }

    pub fn intersection(self, other: SupportSet) -> SupportSet {
        SupportSet(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: SupportSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: SupportSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Complement within `1..=m`.
    pub fn complement(self, m: usize) -> SupportSet {
        SupportSet(!self.0 & SupportSet::full(m).0)
    }

    /// Ascending 1-based indices.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |b| bits & (1 << b) != 0).map(|b| b + 1)
    }

    /// 0-based column positions, ascending.
    pub(crate) fn columns(self) -> impl Iterator<Item = usize> {
        self.indices().map(|i| i - 1)
    }

    /// Splits off the highest index: returns the remaining set and the
    /// 0-based column of the removed index.
    pub(crate) fn pop_highest(self) -> Option<(SupportSet, usize)> {
        if self.0 == 0 {
            return None;
        }
        let col = 31 - self.0.leading_zeros() as usize;
        Some((SupportSet(self.0 & !(1 << col)), col))
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn check_m(m: usize) -> Result<()> {
    if m > MAX_PREDICTORS {
        Err(Error::Capacity {
            m,
            max: MAX_PREDICTORS,
        })
    } else {
        Ok(())
    }
}

/// Number of supports over `m` predictors, `2^m`.
pub fn support_count(m: usize) -> Result<usize> {
    check_m(m)?;
    Ok(1usize << m)
}

/// Lazily walks all `2^m` supports in ascending bitmask order.
pub fn supports(m: usize) -> Result<impl ExactSizeIterator<Item = SupportSet> + Clone> {
    let count = support_count(m)?;
    Ok((0..count as u32).map(SupportSet))
}

/// All `2^m` subsets of `{1, …, m}` in ascending bitmask order, `∅` first.
pub fn enumerate_supports(m: usize) -> Result<Vec<SupportSet>> {
    Ok(supports(m)?.collect())
}
