//! Shared fixtures for the benchmarks.

use gauss_share::access::AccessStructure;
use gauss_share::sets::ParticipantSet;
use gauss_share::source::SourceSpec;

/// Three participants with minimal sets `{1,2}` and `{2,3}`.
pub fn three_party() -> (SourceSpec, AccessStructure) {
    let s = |m: &[usize]| ParticipantSet::from_members(m, 3).unwrap();
    (
        SourceSpec::from_gains(2.0, vec![0.5, 1.0, 0.8]).unwrap(),
        AccessStructure::monotone_closure(3, &[s(&[1, 2]), s(&[2, 3])]).unwrap(),
    )
}

/// Five participants, used for threshold sweeps.
pub fn five_party() -> SourceSpec {
    SourceSpec::from_gains(2.0, vec![1.0, 0.85, 0.9, 0.95, 0.75]).unwrap()
}
