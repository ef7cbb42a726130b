//! Monotone access structures and their extremal sets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sets::{ParticipantSet, MAX_PARTICIPANTS};
use crate::source::SourceSpec;

/// A monotone family of authorized subsets together with its complement.
///
/// The unauthorized family is `2^L` minus the authorized family and always
/// contains the empty set.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessStructure {
    l: usize,
    minimal_sets: Vec<ParticipantSet>,
    authorized: Vec<ParticipantSet>,
    unauthorized: Vec<ParticipantSet>,
    membership: Vec<bool>,
}

/// Authorized set of minimal `o` and unauthorized set of maximal `o`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalSets {
    pub a_star: ParticipantSet,
    pub u_star: ParticipantSet,
    pub o_a_star: f64,
    pub o_u_star: f64,
}

impl AccessStructure {
    /// All supersets of some generator.
    pub fn monotone_closure(l: usize, generators: &[ParticipantSet]) -> Result<Self> {
        check_l(l)?;
        if generators.is_empty() {
            return Err(Error::NoGenerators);
        }
        let full = ParticipantSet::full(l);
        for g in generators {
            if g.is_empty() {
                return Err(Error::EmptyGenerator);
            }
            if !g.is_subset_of(full) {
                let p = g.iter().find(|&p| p > l).unwrap_or(0);
                return Err(Error::ParticipantOutOfRange { participant: p, l });
            }
        }
        let membership = ParticipantSet::all_subsets(l)
            .map(|s| generators.iter().any(|g| g.is_subset_of(s)))
            .collect();
        Ok(Self::from_membership(l, membership))
    }

    /// `{A : |A| ≥ t}`.
    pub fn threshold(l: usize, t: usize) -> Result<Self> {
        check_l(l)?;
        if t < 1 || t > l {
            return Err(Error::ThresholdOutOfRange { t, l });
        }
        let membership = ParticipantSet::all_subsets(l).map(|s| s.len() >= t).collect();
        Ok(Self::from_membership(l, membership))
    }

    fn from_membership(l: usize, membership: Vec<bool>) -> Self {
        let mut authorized = Vec::new();
        let mut unauthorized = Vec::new();
        for s in ParticipantSet::all_subsets(l) {
            if membership[s.bits() as usize] {
                authorized.push(s);
            } else {
                unauthorized.push(s);
            }
        }
        authorized.sort_by(ParticipantSet::canonical_cmp);
        unauthorized.sort_by(ParticipantSet::canonical_cmp);
        // Minimal: authorized, and removing any single member leaves the family.
        let minimal_sets = authorized
            .iter()
            .copied()
            .filter(|s| {
                s.iter().all(|p| {
                    let without = s.bits() & !(1 << (p - 1));
                    !membership[without as usize]
                })
            })
            .collect();
        AccessStructure {
            l,
            minimal_sets,
            authorized,
            unauthorized,
            membership,
        }
    }

    pub fn participants(&self) -> usize {
        self.l
    }

    /// The antichain of minimal authorized sets.
    pub fn minimal_sets(&self) -> &[ParticipantSet] {
        &self.minimal_sets
    }

    pub fn authorized(&self) -> &[ParticipantSet] {
        &self.authorized
    }

    pub fn unauthorized(&self) -> &[ParticipantSet] {
        &self.unauthorized
    }

    pub fn is_authorized(&self, s: ParticipantSet) -> bool {
        self.membership.get(s.bits() as usize).copied().unwrap_or(false)
    }

    /// Extremal sets with ties broken by cardinality, then lexicographically.
    pub fn extremal_sets(&self, spec: &SourceSpec) -> Result<ExtremalSets> {
        if spec.participants() != self.l {
            return Err(Error::InvalidSource(format!(
                "source has {} participants, access structure has {}",
                spec.participants(),
                self.l
            )));
        }
        // Families are already in canonical order, so strict comparisons keep
        // the first optimum.
        let mut a_best: Option<(ParticipantSet, f64)> = None;
        for &a in &self.authorized {
            let o = spec.derive_gain_vector(a)?.o;
            if a_best.is_none_or(|(_, b)| o < b) {
                a_best = Some((a, o));
            }
        }
        let mut u_best: Option<(ParticipantSet, f64)> = None;
        for &u in &self.unauthorized {
            let o = spec.derive_gain_vector(u)?.o;
            if u_best.is_none_or(|(_, b)| o > b) {
                u_best = Some((u, o));
            }
        }
        let (a_star, o_a_star) = a_best.ok_or(Error::NoGenerators)?;
        let (u_star, o_u_star) = u_best.unwrap_or((ParticipantSet::EMPTY, 0.0));
        Ok(ExtremalSets {
            a_star,
            u_star,
            o_a_star,
            o_u_star,
        })
    }
}

fn check_l(l: usize) -> Result<()> {
    if l > MAX_PARTICIPANTS {
        return Err(Error::TooManyParticipants(l));
    }
    if l == 0 {
        return Err(Error::InvalidSource("need at least one participant".into()));
    }
    Ok(())
}

/// Nested extremal sets of the threshold structures `t = 1..=L`.
///
/// Participants are sorted by `|H_L(l)|` ascending (stable in the index);
/// the authorized extremal set for `t` is the `t` weakest participants and
/// the unauthorized one is the `t − 1` strongest. Entry `t − 1` of the
/// result corresponds to threshold `t`.
pub fn threshold_star_chain(spec: &SourceSpec) -> Result<Vec<ExtremalSets>> {
    let gains = spec
        .gains()
        .ok_or_else(|| Error::InvalidSource("threshold chains need a source in gains mode".into()))?;
    let l = gains.len();
    let mut order: Vec<usize> = (1..=l).collect();
    order.sort_by(|&a, &b| gains[a - 1].abs().total_cmp(&gains[b - 1].abs()));
    let mut chain = Vec::with_capacity(l);
    for t in 1..=l {
        let mut a = ParticipantSet::EMPTY;
        for &p in &order[..t] {
            a.insert(p);
        }
        let mut u = ParticipantSet::EMPTY;
        for &p in &order[l - (t - 1)..] {
            u.insert(p);
        }
        let o = |s: ParticipantSet| s.iter().map(|p| gains[p - 1] * gains[p - 1]).sum::<f64>();
        chain.push(ExtremalSets {
            a_star: a,
            u_star: u,
            o_a_star: o(a),
            o_u_star: o(u),
        });
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(m: &[usize]) -> ParticipantSet {
        ParticipantSet::from_members(m, MAX_PARTICIPANTS).unwrap()
    }

    #[test]
    fn closure_of_example_structure() {
        let a = AccessStructure::monotone_closure(3, &[s(&[1, 2]), s(&[2, 3])]).unwrap();
        assert_eq!(a.authorized(), &[s(&[1, 2]), s(&[2, 3]), s(&[1, 2, 3])]);
        assert_eq!(
            a.unauthorized(),
            &[ParticipantSet::EMPTY, s(&[1]), s(&[2]), s(&[3]), s(&[1, 3])]
        );
    }

    #[test]
    fn closure_of_singleton() {
        let a = AccessStructure::monotone_closure(2, &[s(&[1])]).unwrap();
        assert_eq!(a.authorized(), &[s(&[1]), s(&[1, 2])]);
    }

    #[test]
    fn antichain_reduction() {
        let a = AccessStructure::monotone_closure(4, &[s(&[1, 2]), s(&[1, 2, 3])]).unwrap();
        assert_eq!(a.minimal_sets(), &[s(&[1, 2])]);
    }

    #[test]
    fn closure_errors() {
        assert_eq!(
            AccessStructure::monotone_closure(21, &[s(&[1])]),
            Err(Error::TooManyParticipants(21))
        );
        assert_eq!(
            AccessStructure::monotone_closure(3, &[ParticipantSet::EMPTY]),
            Err(Error::EmptyGenerator)
        );
        assert_eq!(AccessStructure::monotone_closure(3, &[]), Err(Error::NoGenerators));
        assert!(matches!(
            AccessStructure::monotone_closure(2, &[s(&[3])]),
            Err(Error::ParticipantOutOfRange { participant: 3, l: 2 })
        ));
    }

    #[test]
    fn thresholds() {
        let t3 = AccessStructure::threshold(3, 3).unwrap();
        assert_eq!(t3.authorized(), &[s(&[1, 2, 3])]);
        let t1 = AccessStructure::threshold(3, 1).unwrap();
        assert_eq!(t1.unauthorized(), &[ParticipantSet::EMPTY]);
        assert_eq!(AccessStructure::threshold(5, 4).unwrap().authorized().len(), 6);
        assert!(AccessStructure::threshold(3, 0).is_err());
        assert!(AccessStructure::threshold(3, 4).is_err());
    }

    #[test]
    fn extremal_example_one() {
        let spec = SourceSpec::from_gains(2.0, vec![0.5, 1.0, 0.8]).unwrap();
        let a = AccessStructure::monotone_closure(3, &[s(&[1, 2]), s(&[2, 3])]).unwrap();
        let e = a.extremal_sets(&spec).unwrap();
        assert_eq!(e.a_star, s(&[1, 2]));
        assert_eq!(e.u_star, s(&[2]));
        assert!((e.o_a_star - 1.25).abs() < 1e-15);
        assert!((e.o_u_star - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extremal_with_only_empty_unauthorized() {
        let spec = SourceSpec::from_gains(1.0, vec![0.5, 1.0]).unwrap();
        let a = AccessStructure::threshold(2, 1).unwrap();
        let e = a.extremal_sets(&spec).unwrap();
        assert_eq!(e.u_star, ParticipantSet::EMPTY);
        assert_eq!(e.o_u_star, 0.0);
    }

    #[test]
    fn five_participant_threshold_values() {
        let spec = SourceSpec::from_gains(2.0, vec![1.0, 0.85, 0.9, 0.95, 0.75]).unwrap();
        let e = AccessStructure::threshold(5, 4).unwrap().extremal_sets(&spec).unwrap();
        assert!((e.o_a_star - 2.9975).abs() < 1e-12);
        assert!((e.o_u_star - 2.7125).abs() < 1e-12);
    }

    #[test]
    fn chain_example() {
        let gains = vec![1.0, 0.85, 0.9, 0.95, 0.75];
        let spec = SourceSpec::from_gains(2.0, gains.clone()).unwrap();
        let chain = threshold_star_chain(&spec).unwrap();
        let vals = |set: ParticipantSet| set.iter().map(|p| gains[p - 1]).collect::<Vec<_>>();
        let mut a3 = vals(chain[2].a_star);
        a3.sort_by(f64::total_cmp);
        assert_eq!(a3, vec![0.75, 0.85, 0.9]);
        let mut u3 = vals(chain[2].u_star);
        u3.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(u3, vec![1.0, 0.95]);
        assert_eq!(chain[0].u_star, ParticipantSet::EMPTY);
        assert!(
            threshold_star_chain(&SourceSpec::from_covariance(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap()).is_err()
        );
    }
}
