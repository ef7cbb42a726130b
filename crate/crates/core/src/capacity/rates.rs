//! Public and secret rates of a Gaussian auxiliary computed two ways: from
//! log-determinants of the observation covariances, and from the scalar
//! coefficients `o = HᵀH`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{check_sigma, observation_term};
use crate::access::AccessStructure;
use crate::error::{Error, Result};
use crate::sets::ParticipantSet;
use crate::source::{SourceSpec, SubsetGain};

const AGREEMENT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRates {
    pub a: ParticipantSet,
    pub u: ParticipantSet,
    pub rp_logdet: f64,
    pub rp_scalar: f64,
    pub rs_logdet: f64,
    pub rs_scalar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFormulaReport {
    pub sigma2_cond: f64,
    pub pairs: Vec<PairRates>,
    /// `max_A` of the public rate.
    pub rp: f64,
    /// `min_A min_U` of the secret rate.
    pub rs: f64,
}

/// `½ log₂ det(H σ² Hᵀ + I)` through an LU determinant.
fn half_log_det(h: &[f64], sigma2: f64) -> f64 {
    let k = h.len();
    if k == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(k, k, |i, j| h[i] * h[j] * sigma2 + if i == j { 1.0 } else { 0.0 });
    0.5 * m.determinant().log2()
}

fn logdet_term(g: &SubsetGain, sigma2_x: f64, sigma2_cond: f64) -> f64 {
    half_log_det(&g.h, sigma2_x) - half_log_det(&g.h, sigma2_cond)
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREEMENT * a.abs().max(b.abs()).max(1e-3)
}

/// Evaluates both routes for every (authorized, unauthorized) pair and fails
/// with [`Error::Numeric`] if they disagree beyond 1e-9 relative.
pub fn verify_rate_formulas(
    spec: &SourceSpec,
    structure: &AccessStructure,
    sigma2_cond: f64,
) -> Result<RateFormulaReport> {
    let s2 = spec.sigma2_x();
    check_sigma(sigma2_cond, s2)?;
    let lead = 0.5 * (s2 / sigma2_cond).log2();
    let gains = |sets: &[ParticipantSet]| {
        sets.iter()
            .map(|&s| spec.derive_gain_vector(s))
            .collect::<Result<Vec<_>>>()
    };
    let auth = gains(structure.authorized())?;
    let unauth = gains(structure.unauthorized())?;

    let mut pairs = Vec::with_capacity(auth.len() * unauth.len());
    for a in &auth {
        let a_log = logdet_term(a, s2, sigma2_cond);
        let a_scalar = observation_term(s2, sigma2_cond, a.o);
        for u in &unauth {
            let u_log = logdet_term(u, s2, sigma2_cond);
            let u_scalar = observation_term(s2, sigma2_cond, u.o);
            let p = PairRates {
                a: a.subset,
                u: u.subset,
                rp_logdet: lead - a_log,
                rp_scalar: lead - a_scalar,
                rs_logdet: a_log - u_log,
                rs_scalar: a_scalar - u_scalar,
            };
            if !agree(p.rp_logdet, p.rp_scalar) || !agree(p.rs_logdet, p.rs_scalar) {
                return Err(Error::Numeric(format!(
                    "rate routes disagree for A={} U={}: rp {} vs {}, rs {} vs {}",
                    p.a, p.u, p.rp_logdet, p.rp_scalar, p.rs_logdet, p.rs_scalar
                )));
            }
            pairs.push(p);
        }
    }
    let rp = pairs.iter().map(|p| p.rp_scalar).fold(f64::NEG_INFINITY, f64::max);
    let rs = pairs.iter().map(|p| p.rs_scalar).fold(f64::INFINITY, f64::min);
    Ok(RateFormulaReport {
        sigma2_cond,
        pairs,
        rp,
        rs,
    })
}
