//! Participant subsets of `1..=l` stored as bitmasks.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest participant count for which families of subsets are materialized.
pub const MAX_PARTICIPANTS: usize = 20;

/// A subset of participants. Participant `i` (1-based) is bit `i - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ParticipantSet(u32);

impl ParticipantSet {
    pub const EMPTY: ParticipantSet = ParticipantSet(0);

    pub fn from_bits(bits: u32) -> Self {
        ParticipantSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Builds a set from 1-based indices, checking them against `l`.
    pub fn from_members(members: &[usize], l: usize) -> Result<Self> {
        let mut bits = 0u32;
        for &p in members {
            if p == 0 || p > l || p > MAX_PARTICIPANTS {
                return Err(Error::ParticipantOutOfRange { participant: p, l });
            }
            bits |= 1 << (p - 1);
        }
        Ok(ParticipantSet(bits))
    }

    /// `{1, ..., l}`.
    pub fn full(l: usize) -> Self {
        if l >= 32 {
            ParticipantSet(u32::MAX)
        } else {
            ParticipantSet((1u32 << l) - 1)
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, participant: usize) -> bool {
        (1..=32).contains(&participant) && self.0 & (1 << (participant - 1)) != 0
    }

    pub fn is_subset_of(self, other: ParticipantSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ParticipantSet) -> Self {
        ParticipantSet(self.0 | other.0)
    }

    pub fn insert(&mut self, participant: usize) {
        self.0 |= 1 << (participant - 1);
    }

    /// Sorted 1-based members.
    pub fn members(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |b| bits & (1 << b) != 0).map(|b| b + 1)
    }

    /// Order used to break ties between extremal sets: cardinality first,
    /// then lexicographic order of the sorted member lists.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter()))
    }

    /// All `2^l` subsets of `1..=l` in increasing bitmask order.
    pub fn all_subsets(l: usize) -> impl Iterator<Item = ParticipantSet> {
        (0..(1u32 << l)).map(ParticipantSet)
    }
}

impl fmt::Debug for ParticipantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ParticipantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for ParticipantSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ParticipantSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        ParticipantSet::from_members(&members, MAX_PARTICIPANTS).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for ParticipantSet {
    type Err = Error;

    /// Parses the `{1,2}` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::DomainError(format!("malformed set {s:?}")))?;
        let mut members = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let p = part
                .parse::<usize>()
                .map_err(|_| Error::DomainError(format!("malformed set {s:?}")))?;
            members.push(p);
        }
        ParticipantSet::from_members(&members, MAX_PARTICIPANTS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let s = ParticipantSet::from_members(&[3, 1], 3).unwrap();
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!("{1,3}".parse::<ParticipantSet>().unwrap(), s);
        assert_eq!("{}".parse::<ParticipantSet>().unwrap(), ParticipantSet::EMPTY);
    }

    #[test]
    fn canonical_order() {
        let a = ParticipantSet::from_members(&[2], 3).unwrap();
        let b = ParticipantSet::from_members(&[1, 3], 3).unwrap();
        let c = ParticipantSet::from_members(&[1, 2], 3).unwrap();
        assert_eq!(a.canonical_cmp(&b), Ordering::Less);
        assert_eq!(c.canonical_cmp(&b), Ordering::Less);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ParticipantSet::from_members(&[0], 3).is_err());
        assert!(ParticipantSet::from_members(&[4], 3).is_err());
    }
}
