use approx::assert_relative_eq;
use gauss_share::access::{threshold_star_chain, AccessStructure};
use gauss_share::capacity::{
    i_p, i_s, optimal_sigma, rate_region, secret_capacity, threshold_compare, CapacityOrder, PublicRate,
};
use gauss_share::sets::ParticipantSet;
use gauss_share::source::{log_det_mutual_information, SourceSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn gains_strategy(max_l: usize) -> impl Strategy<Value = (f64, Vec<f64>)> {
    (0.1f64..10.0, prop::collection::vec(0.05f64..3.0, 1..=max_l))
}

fn structure_strategy(max_l: usize) -> impl Strategy<Value = (f64, Vec<f64>, Vec<u32>)> {
    gains_strategy(max_l).prop_flat_map(|(s2, g)| {
        let full = (1u32 << g.len()) - 1;
        (Just(s2), Just(g), prop::collection::vec(1..=full, 1..4))
    })
}

fn build(l: usize, bits: &[u32]) -> AccessStructure {
    let gens: Vec<ParticipantSet> = bits.iter().map(|&b| ParticipantSet::from_bits(b)).collect();
    AccessStructure::monotone_closure(l, &gens).unwrap()
}

/// Covariance of `(X, Y_1..Y_L)` with correlated noise `Y = h X + B Z`.
fn covariance(s2: f64, h: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let l = h.len();
    let bm = DMatrix::from_fn(l, l, |i, j| if j <= i { b[i * l + j] } else { 0.0 });
    let noise = &bm * bm.transpose();
    let mut c = vec![vec![0.0; l + 1]; l + 1];
    c[0][0] = s2;
    for i in 0..l {
        c[0][i + 1] = s2 * h[i];
        c[i + 1][0] = s2 * h[i];
        for j in 0..l {
            c[i + 1][j + 1] = s2 * h[i] * h[j] + noise[(i, j)];
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_information_matches_log_det(
        s2 in 0.1f64..5.0,
        h in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-1.0f64..1.0, 9),
        mask in 1u32..8,
    ) {
        let mut b = b;
        for i in 0..3 {
            b[i * 3 + i] = b[i * 3 + i].abs() + 0.5;
        }
        let cov = covariance(s2, &h, &b);
        let spec = SourceSpec::from_covariance(&cov).unwrap();
        let set = ParticipantSet::from_bits(mask);
        let closed = spec.mutual_information(set).unwrap();
        let members: Vec<usize> = set.iter().collect();
        let logdet = log_det_mutual_information(&spec.covariance(), &members).unwrap();
        prop_assert!((closed - logdet).abs() <= 1e-9 * logdet.abs().max(1e-3));
    }

    #[test]
    fn weinstein_aronszajn(h in prop::collection::vec(-3.0f64..3.0, 1..=8), s2 in 1e-3f64..10.0) {
        let q = h.len();
        let m = DMatrix::from_fn(q, q, |i, j| s2 * h[i] * h[j] + if i == j { 1.0 } else { 0.0 });
        let o: f64 = h.iter().map(|x| x * x).sum();
        let det = m.determinant();
        prop_assert!((det - (1.0 + s2 * o)).abs() <= 1e-10 * det.abs());
    }

    #[test]
    fn o_is_monotone_in_the_subset((s2, g) in gains_strategy(6), a in 0u32..64, b in 0u32..64) {
        let l = g.len();
        let mask = (1u32 << l) - 1;
        let spec = SourceSpec::from_gains(s2, g).unwrap();
        let small = ParticipantSet::from_bits(a & b & mask);
        let big = ParticipantSet::from_bits(a & mask);
        let o_small = spec.derive_gain_vector(small).unwrap().o;
        let o_big = spec.derive_gain_vector(big).unwrap().o;
        prop_assert!(o_small <= o_big + 1e-15);
    }

    #[test]
    fn closure_partitions_and_is_idempotent((_, g, bits) in structure_strategy(6)) {
        let l = g.len();
        let a = build(l, &bits);
        prop_assert_eq!(a.authorized().len() + a.unauthorized().len(), 1 << l);
        prop_assert!(a.unauthorized().contains(&ParticipantSet::EMPTY));
        let again = AccessStructure::monotone_closure(l, a.authorized()).unwrap();
        prop_assert_eq!(again.authorized(), a.authorized());
        let from_min = AccessStructure::monotone_closure(l, a.minimal_sets()).unwrap();
        prop_assert_eq!(from_min.authorized(), a.authorized());
        for &s in a.authorized() {
            for sup in ParticipantSet::all_subsets(l).filter(|t| s.is_subset_of(*t)) {
                prop_assert!(a.is_authorized(sup));
            }
        }
    }

    #[test]
    fn chain_is_nested_and_extremal((s2, g) in gains_strategy(6)) {
        let l = g.len();
        let spec = SourceSpec::from_gains(s2, g).unwrap();
        let chain = threshold_star_chain(&spec).unwrap();
        for t in 1..=l {
            let brute = AccessStructure::threshold(l, t).unwrap().extremal_sets(&spec).unwrap();
            prop_assert!((chain[t - 1].o_a_star - brute.o_a_star).abs() < 1e-12);
            prop_assert!((chain[t - 1].o_u_star - brute.o_u_star).abs() < 1e-12);
            if t < l {
                prop_assert!(chain[t - 1].a_star.is_subset_of(chain[t].a_star));
                prop_assert!(chain[t - 1].u_star.is_subset_of(chain[t].u_star));
            }
        }
    }

    #[test]
    fn capacity_is_monotone_and_saturates((s2, g, bits) in structure_strategy(5)) {
        let l = g.len();
        let spec = SourceSpec::from_gains(s2, g).unwrap();
        let a = build(l, &bits);
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let region = rate_region(&spec, &a, &grid).unwrap();
        prop_assert_eq!(region.points[0].cs, 0.0);
        for w in region.points.windows(2) {
            prop_assert!(w[1].cs >= w[0].cs - 1e-15);
        }
        let far = secret_capacity(&spec, &a, PublicRate::Finite(30.0)).unwrap().cs;
        prop_assert!((far - region.cs_infinity).abs() < 1e-9);
        let e = a.extremal_sets(&spec).unwrap();
        if e.o_a_star < e.o_u_star {
            prop_assert!(region.points.iter().all(|p| p.cs == 0.0));
        }
    }

    #[test]
    fn optimal_sigma_meets_the_rate(s2 in 0.1f64..10.0, oa in 0.01f64..10.0, rp in 0.0f64..8.0) {
        let sigma = optimal_sigma(s2, oa, rp).unwrap();
        prop_assert!(sigma > 0.0 && sigma <= s2);
        let back = i_p(sigma, oa, s2).unwrap();
        prop_assert!((back - rp).abs() < 1e-10 * rp.max(1.0));
    }

    #[test]
    fn observation_gap_grows_with_o(
        s2 in 0.1f64..10.0, c in 0.01f64..1.0, o1 in 0.0f64..5.0, d in 0.0f64..5.0, ou in 0.0f64..1.0,
    ) {
        // I_s(σ², A, U) is nondecreasing in o_A for fixed σ² and U.
        let sigma = c * s2;
        prop_assert!(i_s(sigma, o1 + d, ou, s2).unwrap() >= i_s(sigma, o1, ou, s2).unwrap() - 1e-15);
    }

    #[test]
    fn threshold_verdict_matches_direct((s2, g) in gains_strategy(5), rp in 0.0f64..6.0) {
        let l = g.len();
        prop_assume!(l >= 2);
        let spec = SourceSpec::from_gains(s2, g).unwrap();
        for t in 1..l {
            for i in 1..=(l - t) {
                let c = threshold_compare(&spec, t, i, PublicRate::Finite(rp)).unwrap();
                let lo = secret_capacity(&spec, &AccessStructure::threshold(l, t).unwrap(), PublicRate::Finite(rp)).unwrap().cs;
                let hi = secret_capacity(&spec, &AccessStructure::threshold(l, t + i).unwrap(), PublicRate::Finite(rp)).unwrap().cs;
                let direct = if lo >= hi - 1e-12 { CapacityOrder::AtLeast } else { CapacityOrder::Less };
                // Near-ties can legitimately fall either way under rounding.
                if (lo - hi).abs() > 1e-9 {
                    prop_assert_eq!(c.verdict, direct, "t={} i={} lo={} hi={}", t, i, lo, hi);
                }
                if t == 1 {
                    prop_assert!(lo >= hi - 1e-12);
                }
            }
        }
    }
}

#[test]
fn example_region_endpoints() {
    let spec = SourceSpec::from_gains(2.0, vec![0.5, 1.0, 0.8]).unwrap();
    let gens = [
        ParticipantSet::from_members(&[1, 2], 3).unwrap(),
        ParticipantSet::from_members(&[2, 3], 3).unwrap(),
    ];
    let a = AccessStructure::monotone_closure(3, &gens).unwrap();
    assert_eq!(secret_capacity(&spec, &a, PublicRate::Finite(0.0)).unwrap().cs, 0.0);
    let inf = secret_capacity(&spec, &a, PublicRate::Infinite).unwrap();
    assert_relative_eq!(inf.cs, 0.5 * (3.5f64 / 3.0).log2(), epsilon = 1e-15);
    assert!(inf.sigma2_star.is_none());
}
