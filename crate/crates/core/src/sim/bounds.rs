//! Finite-blocklength error and rate bounds for the quantized scheme.

use serde::Serialize;

use super::discrete::{y_vars, DiscreteSource, VAR_V, VAR_X};
use crate::access::AccessStructure;
use crate::error::{Error, Result};
use crate::sets::ParticipantSet;

/// Alphabet size and minimum masses seen by one authorized set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorizedStats {
    pub set: ParticipantSet,
    pub y_size: f64,
    pub mu_xy: f64,
    pub mu_vxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBoundInput {
    pub n: usize,
    pub epsilon: f64,
    pub v_size: f64,
    pub x_size: f64,
    pub h_v: f64,
    pub mu_vx: f64,
    pub sets: Vec<AuthorizedStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTerms {
    pub set: ParticipantSet,
    pub terms: [f64; 4],
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBound {
    pub per_set: Vec<ErrorTerms>,
    /// `|𝔸| · max_A δ(n, ε, A)`
    pub bound: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
}

fn check_mu(mu: f64, what: &str) -> Result<()> {
    if mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("{what} = {mu} outside (0, 1]")))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("epsilon = {epsilon} outside (0, 1)")))
    }
}

impl ErrorBoundInput {
    /// Reads alphabet sizes and minimum masses off a quantized joint pmf.
    pub fn from_source(source: &DiscreteSource, structure: &AccessStructure, n: usize, epsilon: f64) -> Self {
        let sizes = source.sizes();
        let sets = structure
            .authorized()
            .iter()
            .map(|&a| {
                let ys = y_vars(a);
                let mut xy = vec![VAR_X];
                xy.extend(&ys);
                let mut vxy = vec![VAR_V, VAR_X];
                vxy.extend(&ys);
                AuthorizedStats {
                    set: a,
                    y_size: ys.iter().map(|&v| sizes[v] as f64).product(),
                    mu_xy: source.marginal(&xy).min_mass(),
                    mu_vxy: source.marginal(&vxy).min_mass(),
                }
            })
            .collect();
        ErrorBoundInput {
            n,
            epsilon,
            v_size: sizes[VAR_V] as f64,
            x_size: sizes[VAR_X] as f64,
            h_v: source.entropy(&[VAR_V]),
            mu_vx: source.marginal(&[VAR_V, VAR_X]).min_mass(),
            sets,
        }
    }
}

/// The four-term reliability bound of the binned typicality code.
pub fn error_bound(input: &ErrorBoundInput) -> Result<ErrorBound> {
    check_epsilon(input.epsilon)?;
    check_mu(input.mu_vx, "mu_VX")?;
    if input.sets.is_empty() {
        return Err(Error::NoGenerators);
    }
    let n = input.n as f64;
    let eps = input.epsilon;
    let eps1 = eps / 2.0;
    let shrink = (eps - eps1).powi(2) / (1.0 + eps1);
    let (v, x) = (input.v_size, input.x_size);
    let mut per_set = Vec::with_capacity(input.sets.len());
    for s in &input.sets {
        check_mu(s.mu_xy, "mu_XY")?;
        check_mu(s.mu_vxy, "mu_VXY")?;
        let t1 = 2.0 * x * s.y_size * (-n * eps1 * eps1 * s.mu_xy).exp();
        let t2 = (-n * eps * input.h_v).exp2();
        let inner = 1.0 - 2.0 * v * x * (-n * shrink * input.mu_vx).exp();
        let t3 = (-inner * (eps * n * input.h_v).exp2()).exp();
        let t4 = 2.0 * v * x * s.y_size * (-n * shrink * s.mu_vxy).exp();
        per_set.push(ErrorTerms {
            set: s.set,
            terms: [t1, t2, t3, t4],
            delta: t1 + t2 + t3 + t4,
        });
    }
    let max = per_set.iter().map(|t| t.delta).fold(f64::NEG_INFINITY, f64::max);
    let bound = input.sets.len() as f64 * max;
    Ok(ErrorBound {
        per_set,
        bound,
        vacuous: bound >= 1.0,
    })
}

/// Correction terms for one unauthorized set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageTerms {
    pub set: ParticipantSet,
    pub delta1: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateBound {
    pub rs_lower: f64,
    pub rp_upper: f64,
    pub per_unauthorized: Vec<LeakageTerms>,
    pub asymptotic: bool,
}

/// Information quantities the rate bound is built from.
#[derive(Debug, Clone, PartialEq)]
struct Marginals {
    min_i_vya: f64,
    max_i_vyu: f64,
    max_i_xv_given_ya: f64,
    h_v: f64,
}

fn marginals(source: &DiscreteSource, structure: &AccessStructure) -> Marginals {
    let v = [VAR_V];
    let x = [VAR_X];
    let min_i_vya = structure
        .authorized()
        .iter()
        .map(|&a| source.mutual_information(&v, &y_vars(a)))
        .fold(f64::INFINITY, f64::min);
    let max_i_vyu = structure
        .unauthorized()
        .iter()
        .map(|&u| source.mutual_information(&v, &y_vars(u)))
        .fold(0.0, f64::max);
    let max_i_xv_given_ya = structure
        .authorized()
        .iter()
        .map(|&a| source.conditional_mutual_information(&x, &v, &y_vars(a)))
        .fold(f64::NEG_INFINITY, f64::max);
    Marginals {
        min_i_vya,
        max_i_vyu,
        max_i_xv_given_ya,
        h_v: source.entropy(&v),
    }
}

/// `δ¹` and `δ²` for the unauthorized set `u`.
pub fn leakage_terms(
    source: &DiscreteSource,
    u: ParticipantSet,
    n: usize,
    q: usize,
    epsilon: f64,
) -> Result<LeakageTerms> {
    check_epsilon(epsilon)?;
    if n == 0 || q == 0 {
        return Err(Error::DomainError("n and q must be positive".into()));
    }
    let sizes = source.sizes();
    let ys = y_vars(u);
    let mut vy = vec![VAR_V];
    vy.extend(&ys);
    let mut vxy = vec![VAR_V, VAR_X];
    vxy.extend(&ys);
    let v = [VAR_V];
    let x = [VAR_X];
    let (nf, qf) = (n as f64, q as f64);
    let big_n = nf * qf;

    let vy_marg = source.marginal(&vy);
    let support = vy_marg.support_size() as f64;
    let mu_vy = vy_marg.min_mass();
    let arg = 1.0 - 2.0 * support.powf(nf) * (-epsilon * epsilon * qf * mu_vy.powf(nf) / 6.0).exp();
    let delta1 = if arg > 0.0 { -arg.log2() } else { f64::INFINITY };

    let v_size = sizes[VAR_V] as f64;
    let x_size = sizes[VAR_X] as f64;
    let y_size: f64 = ys.iter().map(|&i| sizes[i] as f64).product();
    let mu_xv = source.marginal(&[VAR_V, VAR_X]).min_mass();
    let mu_vxy = source.marginal(&vxy).min_mass();
    let mut v_yu = v.to_vec();
    v_yu.extend(&ys);
    let i_xv_yu = source.conditional_mutual_information(&x, &v, &ys);
    let h_x_yuv = source.conditional_entropy(&x, &v_yu);
    let h_v = source.entropy(&v);
    let bracket = 2.0 * epsilon * h_x_yuv
        + 2.0 / nf
        + x_size.log2()
            * (4.0 * v_size * x_size * (-nf * epsilon * epsilon * mu_xv).exp()
                + 2.0 * v_size * x_size * y_size * (-epsilon * epsilon * nf * mu_vxy / 8.0).exp());
    let delta2 =
        epsilon * i_xv_yu + (1.0 - epsilon) * bracket + delta1 / big_n + 6.0 * epsilon * h_v + big_n.powf(-0.5);
    Ok(LeakageTerms { set: u, delta1, delta2 })
}

/// Lower bound on the secret rate and upper bound on the public rate at
/// blocklength `N = n q`. With `asymptotic` set, every correction term is
/// dropped.
pub fn achievable_rate_bound(
    source: &DiscreteSource,
    structure: &AccessStructure,
    n: usize,
    q: usize,
    epsilon: f64,
    asymptotic: bool,
) -> Result<RateBound> {
    check_source(source, structure)?;
    let m = marginals(source, structure);
    if asymptotic {
        return Ok(RateBound {
            rs_lower: m.min_i_vya - m.max_i_vyu,
            rp_upper: m.max_i_xv_given_ya,
            per_unauthorized: Vec::new(),
            asymptotic: true,
        });
    }
    let per_unauthorized = structure
        .unauthorized()
        .iter()
        .map(|&u| leakage_terms(source, u, n, q, epsilon))
        .collect::<Result<Vec<_>>>()?;
    let max_delta2 = per_unauthorized
        .iter()
        .map(|t| t.delta2)
        .fold(f64::NEG_INFINITY, f64::max);
    let big_n = (n * q) as f64;
    Ok(RateBound {
        rs_lower: m.min_i_vya - m.max_i_vyu - max_delta2 - big_n.powf(-0.5) - 1.0 / big_n,
        rp_upper: m.max_i_xv_given_ya + 6.0 * epsilon * m.h_v,
        per_unauthorized,
        asymptotic: false,
    })
}

/// Secret length `⌊N [min I(V;Y_A) − max I(V;Y_U) − max δ² − N^{-1/2}]⌋`,
/// which may be negative.
pub fn secret_length_rule(
    source: &DiscreteSource,
    structure: &AccessStructure,
    n: usize,
    q: usize,
    epsilon: f64,
) -> Result<f64> {
    let b = achievable_rate_bound(source, structure, n, q, epsilon, false)?;
    let big_n = (n * q) as f64;
    // rs_lower already subtracts N^{-1}; put it back.
    Ok((big_n * (b.rs_lower + 1.0 / big_n)).floor())
}

/// Default codebook rates `(R_v, R_v′)`, clamped at zero.
pub fn default_rates(source: &DiscreteSource, structure: &AccessStructure, epsilon: f64) -> Result<(f64, f64)> {
    check_source(source, structure)?;
    let v = [VAR_V];
    let max_h_v_ya = structure
        .authorized()
        .iter()
        .map(|&a| source.conditional_entropy(&v, &y_vars(a)))
        .fold(f64::NEG_INFINITY, f64::max);
    let h_v = source.entropy(&v);
    let h_v_x = source.conditional_entropy(&v, &[VAR_X]);
    let rv = max_h_v_ya - h_v_x + 6.0 * epsilon * h_v;
    let rv_prime = h_v - max_h_v_ya - 3.0 * epsilon * h_v;
    Ok((rv.max(0.0), rv_prime.max(0.0)))
}

fn check_source(source: &DiscreteSource, structure: &AccessStructure) -> Result<()> {
    if source.variables() != structure.participants() + 2 {
        return Err(Error::InvalidSource(format!(
            "joint pmf has {} variables, expected V, X and {} observations",
            source.variables(),
            structure.participants()
        )));
    }
    Ok(())
}
