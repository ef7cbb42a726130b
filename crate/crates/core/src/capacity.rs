//! Closed-form secret capacity, the optimal auxiliary variance, threshold
//! comparisons and rate-region sweeps. All logarithms are base 2.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::access::{threshold_star_chain, AccessStructure, ExtremalSets};
use crate::error::{Error, Result};
use crate::source::SourceSpec;

mod oracle;
mod rates;

pub use oracle::{minimax_oracle, OracleReport, DEFAULT_GRID_SIZE};
pub use rates::{verify_rate_formulas, PairRates, RateFormulaReport};

/// Public communication rate in bits per source symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PublicRate {
    Finite(f64),
    Infinite,
}

impl PublicRate {
    pub fn finite(self) -> Option<f64> {
        match self {
            PublicRate::Finite(r) => Some(r),
            PublicRate::Infinite => None,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            PublicRate::Finite(r) if !(r >= 0.0) || !r.is_finite() => Err(Error::NegativeRate(r)),
            _ => Ok(()),
        }
    }
}

impl From<f64> for PublicRate {
    fn from(r: f64) -> Self {
        if r == f64::INFINITY {
            PublicRate::Infinite
        } else {
            PublicRate::Finite(r)
        }
    }
}

impl fmt::Display for PublicRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PublicRate::Finite(r) => write!(f, "{r}"),
            PublicRate::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for PublicRate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PublicRate::Finite(r) => s.serialize_f64(*r),
            PublicRate::Infinite => s.serialize_str("inf"),
        }
    }
}

/// One point of the capacity curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityPoint {
    pub rp: PublicRate,
    pub cs: f64,
    /// Optimal `σ²_{X|V}`; `None` for unlimited public communication.
    pub sigma2_star: Option<f64>,
    pub extremal: ExtremalSets,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRegion {
    pub points: Vec<CapacityPoint>,
    pub cs_infinity: f64,
}

fn check_sigma(sigma2_cond: f64, sigma2_x: f64) -> Result<()> {
    if !(sigma2_cond > 0.0) || sigma2_cond > sigma2_x {
        return Err(Error::DomainError(format!(
            "conditional variance {sigma2_cond} outside (0, {sigma2_x}]"
        )));
    }
    Ok(())
}

/// `½ log₂((σ²_X o + 1) / (σ² o + 1))`, the information an observation with
/// coefficient `o` carries about `V`.
pub(crate) fn observation_term(sigma2_x: f64, sigma2_cond: f64, o: f64) -> f64 {
    0.5 * ((sigma2_x * o + 1.0) / (sigma2_cond * o + 1.0)).log2()
}

/// Public rate needed by an authorized set with coefficient `o_a` when the
/// auxiliary has conditional variance `sigma2_cond`.
pub fn i_p(sigma2_cond: f64, o_a: f64, sigma2_x: f64) -> Result<f64> {
    check_sigma(sigma2_cond, sigma2_x)?;
    Ok(0.5 * (sigma2_x / sigma2_cond).log2() - observation_term(sigma2_x, sigma2_cond, o_a))
}

/// Secret rate difference between an authorized and an unauthorized set.
pub fn i_s(sigma2_cond: f64, o_a: f64, o_u: f64, sigma2_x: f64) -> Result<f64> {
    check_sigma(sigma2_cond, sigma2_x)?;
    Ok(observation_term(sigma2_x, sigma2_cond, o_a) - observation_term(sigma2_x, sigma2_cond, o_u))
}

/// Smallest conditional variance whose public rate does not exceed `rp`:
/// `σ²_X / (σ²_X o_a (2^{2R_p} − 1) + 2^{2R_p})`.
pub fn optimal_sigma(sigma2_x: f64, o_a: f64, rp: f64) -> Result<f64> {
    if !(rp >= 0.0) || !rp.is_finite() {
        return Err(Error::NegativeRate(rp));
    }
    let g = (2.0 * rp).exp2();
    Ok(sigma2_x / (sigma2_x * o_a * (g - 1.0) + g))
}

/// Capacity from already-computed extremal sets.
pub fn capacity_from_extremal(sigma2_x: f64, extremal: &ExtremalSets, rp: PublicRate) -> Result<CapacityPoint> {
    rp.validate()?;
    let (oa, ou) = (extremal.o_a_star, extremal.o_u_star);
    let (raw, sigma2_star) = match rp {
        PublicRate::Finite(r) => {
            let w = (-2.0 * r).exp2();
            let num = sigma2_x * ou * w + sigma2_x * oa * (1.0 - w) + 1.0;
            let raw = 0.5 * (num / (sigma2_x * ou + 1.0)).log2();
            (raw, Some(optimal_sigma(sigma2_x, oa, r)?))
        }
        PublicRate::Infinite => (0.5 * ((sigma2_x * oa + 1.0) / (sigma2_x * ou + 1.0)).log2(), None),
    };
    let cs = if oa < ou { 0.0 } else { raw.max(0.0) };
    if !cs.is_finite() {
        return Err(Error::Numeric(format!("capacity evaluated to {cs}")));
    }
    Ok(CapacityPoint {
        rp,
        cs,
        sigma2_star,
        extremal: extremal.clone(),
    })
}

/// Secret capacity of `structure` at public rate `rp`.
pub fn secret_capacity(spec: &SourceSpec, structure: &AccessStructure, rp: PublicRate) -> Result<CapacityPoint> {
    let extremal = structure.extremal_sets(spec)?;
    capacity_from_extremal(spec.sigma2_x(), &extremal, rp)
}

/// Capacity over a strictly increasing, nonnegative grid of public rates.
/// Grid points are evaluated in parallel and returned in grid order.
pub fn rate_region(spec: &SourceSpec, structure: &AccessStructure, grid: &[f64]) -> Result<RateRegion> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid);
    }
    let extremal = structure.extremal_sets(spec)?;
    let s2 = spec.sigma2_x();
    let points = grid
        .par_iter()
        .map(|&r| capacity_from_extremal(s2, &extremal, PublicRate::Finite(r)))
        .collect::<Result<Vec<_>>>()?;
    let cs_infinity = capacity_from_extremal(s2, &extremal, PublicRate::Infinite)?.cs;
    Ok(RateRegion { points, cs_infinity })
}

/// `n` evenly spaced rates over `[min, max]` (a single point when `n == 1`).
pub fn linear_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Ordering of `C_s(A_t)` against `C_s(A_{t+i})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CapacityOrder {
    /// `C_s(A_t) ≥ C_s(A_{t+i})`
    AtLeast,
    /// `C_s(A_t) < C_s(A_{t+i})`
    Less,
}

impl fmt::Display for CapacityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CapacityOrder::AtLeast => ">=",
            CapacityOrder::Less => "<",
        })
    }
}

/// How a threshold verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictMethod {
    /// Ratio test on the nested extremal sets.
    Ratio,
    /// Direct capacity comparison, used when the ratio test does not apply
    /// (zero denominator, zero rate, or an active clamp).
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdComparison {
    pub t: usize,
    pub i: usize,
    pub rp: PublicRate,
    /// `(o_U*_{t+i} − o_U*_t) / (o_A*_{t+i} − o_A*_t)`; `None` when the
    /// denominator vanishes.
    pub lhs: Option<f64>,
    /// `(1 + σ²_X o_U*_t) / (1 + σ²_X o_A*_t)`.
    pub rhs: f64,
    pub cs_t: f64,
    pub cs_t_plus_i: f64,
    pub verdict: CapacityOrder,
    pub method: VerdictMethod,
}

/// Tolerance for treating two capacities as equal in direct comparisons.
pub const CAPACITY_TIE_TOLERANCE: f64 = 1e-12;

/// Compares threshold structures `t` and `t + i` (gains mode only).
pub fn threshold_compare(spec: &SourceSpec, t: usize, i: usize, rp: PublicRate) -> Result<ThresholdComparison> {
    let l = spec.participants();
    if t < 1 || i < 1 || t + i > l {
        return Err(Error::IndexOutOfRange(format!(
            "need 1 <= t, 1 <= i <= L - t; got t={t}, i={i}, L={l}"
        )));
    }
    let chain = threshold_star_chain(spec)?;
    compare_on_chain(spec.sigma2_x(), &chain, t, i, rp)
}

pub(crate) fn compare_on_chain(
    sigma2_x: f64,
    chain: &[ExtremalSets],
    t: usize,
    i: usize,
    rp: PublicRate,
) -> Result<ThresholdComparison> {
    let lo = &chain[t - 1];
    let hi = &chain[t + i - 1];
    let cs_t = capacity_from_extremal(sigma2_x, lo, rp)?.cs;
    let cs_t_plus_i = capacity_from_extremal(sigma2_x, hi, rp)?.cs;
    let den = hi.o_a_star - lo.o_a_star;
    let lhs = (den > 0.0).then(|| (hi.o_u_star - lo.o_u_star) / den);
    let rhs = (1.0 + sigma2_x * lo.o_u_star) / (1.0 + sigma2_x * lo.o_a_star);
    let positive_rate = rp.finite().is_none_or(|r| r > 0.0);
    let unclamped = lo.o_a_star >= lo.o_u_star && hi.o_a_star >= hi.o_u_star;
    let (verdict, method) = match lhs {
        Some(lhs) if positive_rate && unclamped => (
            if lhs >= rhs {
                CapacityOrder::AtLeast
            } else {
                CapacityOrder::Less
            },
            VerdictMethod::Ratio,
        ),
        _ => (
            if cs_t >= cs_t_plus_i - CAPACITY_TIE_TOLERANCE {
                CapacityOrder::AtLeast
            } else {
                CapacityOrder::Less
            },
            VerdictMethod::Direct,
        ),
    };
    Ok(ThresholdComparison {
        t,
        i,
        rp,
        lhs,
        rhs,
        cs_t,
        cs_t_plus_i,
        verdict,
        method,
    })
}

/// All `(t, i)` comparisons of a gains-mode source at one public rate.
pub fn threshold_comparisons(spec: &SourceSpec, rp: PublicRate) -> Result<Vec<ThresholdComparison>> {
    let chain = threshold_star_chain(spec)?;
    let l = spec.participants();
    let mut out = Vec::new();
    for t in 1..l {
        for i in 1..=(l - t) {
            out.push(compare_on_chain(spec.sigma2_x(), &chain, t, i, rp)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::ParticipantSet;
    use approx::assert_abs_diff_eq;

    fn example_one() -> (SourceSpec, AccessStructure) {
        let s = |m: &[usize]| ParticipantSet::from_members(m, 3).unwrap();
        (
            SourceSpec::from_gains(2.0, vec![0.5, 1.0, 0.8]).unwrap(),
            AccessStructure::monotone_closure(3, &[s(&[1, 2]), s(&[2, 3])]).unwrap(),
        )
    }

    #[test]
    fn ip_edges() {
        assert_eq!(i_p(2.0, 1.25, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(i_p(0.5, 0.0, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        let s = optimal_sigma(2.0, 1.25, 1.0).unwrap();
        assert_abs_diff_eq!(i_p(s, 1.25, 2.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(i_p(0.0, 1.0, 2.0), Err(Error::DomainError(_))));
        assert!(matches!(i_p(2.5, 1.0, 2.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn is_edges() {
        assert_eq!(i_s(2.0, 1.25, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(i_s(0.3, 1.0, 1.0, 2.0).unwrap(), 0.0);
        let limit = i_s(1e-300, 1.25, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(limit, 0.5 * (3.5f64 / 3.0).log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(limit, 0.111196210668224, epsilon = 1e-13);
    }

    #[test]
    fn optimal_sigma_values() {
        assert_eq!(optimal_sigma(2.0, 1.25, 0.0).unwrap(), 2.0);
        assert_abs_diff_eq!(optimal_sigma(2.0, 1.25, 1.0).unwrap(), 2.0 / 11.5, epsilon = 1e-15);
        assert!(optimal_sigma(2.0, 1.25, 40.0).unwrap() < 1e-20);
        assert!(matches!(optimal_sigma(2.0, 1.0, -0.1), Err(Error::NegativeRate(_))));
    }

    #[test]
    fn example_one_capacity() {
        let (spec, a) = example_one();
        assert_eq!(secret_capacity(&spec, &a, PublicRate::Finite(0.0)).unwrap().cs, 0.0);
        let inf = secret_capacity(&spec, &a, PublicRate::Infinite).unwrap();
        assert_abs_diff_eq!(inf.cs, 0.5 * (3.5f64 / 3.0).log2(), epsilon = 1e-15);
        assert_eq!(inf.sigma2_star, None);
        let one = secret_capacity(&spec, &a, PublicRate::Finite(1.0)).unwrap();
        assert_abs_diff_eq!(one.cs, 0.5 * (3.375f64 / 3.0).log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(one.cs, 0.0849625007211562, epsilon = 1e-13);
    }

    #[test]
    fn clamp_when_unauthorized_stronger() {
        let spec = SourceSpec::from_gains(1.0, vec![0.1, 3.0]).unwrap();
        let s = |m: &[usize]| ParticipantSet::from_members(m, 2).unwrap();
        let a = AccessStructure::monotone_closure(2, &[s(&[1])]).unwrap();
        for r in [0.0, 0.5, 3.0] {
            assert_eq!(secret_capacity(&spec, &a, PublicRate::Finite(r)).unwrap().cs, 0.0);
        }
        assert_eq!(secret_capacity(&spec, &a, PublicRate::Infinite).unwrap().cs, 0.0);
        let region = rate_region(&spec, &a, &linear_grid(0.0, 5.0, 11)).unwrap();
        assert!(region.points.iter().all(|p| p.cs == 0.0));
    }

    #[test]
    fn region_validation() {
        let (spec, a) = example_one();
        assert_eq!(rate_region(&spec, &a, &[]), Err(Error::EmptyGrid));
        assert_eq!(rate_region(&spec, &a, &[1.0, 1.0]), Err(Error::InvalidGrid));
        assert_eq!(rate_region(&spec, &a, &[-1.0]), Err(Error::InvalidGrid));
        let single = rate_region(&spec, &a, &[0.0]).unwrap();
        assert_eq!(single.points.len(), 1);
        assert_eq!(single.points[0].cs, 0.0);
    }

    #[test]
    fn five_participant_threshold_example() {
        let spec = SourceSpec::from_gains(2.0, vec![1.0, 0.85, 0.9, 0.95, 0.75]).unwrap();
        let c = threshold_compare(&spec, 4, 1, PublicRate::Finite(1.0)).unwrap();
        assert_abs_diff_eq!(c.lhs.unwrap(), 0.7225, epsilon = 1e-12);
        assert_abs_diff_eq!(c.rhs, 6.425 / 6.995, epsilon = 1e-12);
        assert_eq!(c.verdict, CapacityOrder::Less);
        assert_eq!(c.method, VerdictMethod::Ratio);
        assert!(c.cs_t <= c.cs_t_plus_i);
        assert!(threshold_compare(&spec, 4, 2, PublicRate::Finite(1.0)).is_err());
        assert!(threshold_compare(&spec, 0, 1, PublicRate::Finite(1.0)).is_err());
    }

    #[test]
    fn zero_rate_uses_direct_comparison() {
        let spec = SourceSpec::from_gains(2.0, vec![1.0, 0.85, 0.9, 0.95, 0.75]).unwrap();
        let c = threshold_compare(&spec, 4, 1, PublicRate::Finite(0.0)).unwrap();
        assert_eq!(c.method, VerdictMethod::Direct);
        assert_eq!(c.verdict, CapacityOrder::AtLeast);
    }
}
