//! Brute-force minimax evaluation over a grid of conditional variances.
//!
//! The grid is log-spaced over `[σ²_X·10⁻⁸, σ²_X]`. The feasibility boundary
//! `I_p = R_p` of each authorized set is inserted exactly, so the grid only
//! has to confirm that nothing beats the boundary point.

use serde::Serialize;

use super::{observation_term, optimal_sigma, secret_capacity, PublicRate};
use crate::access::AccessStructure;
use crate::error::{Error, Result};
use crate::sets::ParticipantSet;
use crate::source::SourceSpec;

pub const DEFAULT_GRID_SIZE: usize = 10_000;
const GRID_DECADES: f64 = 8.0;
const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub rp: PublicRate,
    pub grid_size: usize,
    /// `min_A min_U max_{σ² feasible for A} I_s`.
    pub min_min_max: f64,
    /// `max_{σ² feasible for A*} min_A min_U I_s`.
    pub max_min_min: f64,
    /// `[min_min_max]⁺`
    pub clamped: f64,
    pub closed_form: f64,
    pub saddle_gap: f64,
    pub closed_form_gap: f64,
}

/// Evaluates both orders of the converse's minimax problem and compares
/// them against the closed-form capacity.
pub fn minimax_oracle(
    spec: &SourceSpec,
    structure: &AccessStructure,
    rp: PublicRate,
    grid_size: usize,
) -> Result<OracleReport> {
    if grid_size < 100 {
        return Err(Error::DomainError(format!(
            "oracle grid needs at least 100 points, got {grid_size}"
        )));
    }
    let s2 = spec.sigma2_x();
    let closed = secret_capacity(spec, structure, rp)?;
    let grid = log_grid(s2, grid_size);

    let o_of = |s: ParticipantSet| spec.derive_gain_vector(s).map(|g| g.o);
    let auth: Vec<f64> = structure.authorized().iter().map(|&a| o_of(a)).collect::<Result<_>>()?;
    let unauth: Vec<f64> = structure
        .unauthorized()
        .iter()
        .map(|&u| o_of(u))
        .collect::<Result<_>>()?;

    // Observation terms per grid point, shared by every pair.
    let table = |o: f64| grid.iter().map(|&g| observation_term(s2, g, o)).collect::<Vec<_>>();
    let auth_terms: Vec<Vec<f64>> = auth.iter().map(|&o| table(o)).collect();
    let unauth_terms: Vec<Vec<f64>> = unauth.iter().map(|&o| table(o)).collect();
    let leading: Vec<f64> = grid.iter().map(|&g| 0.5 * (s2 / g).log2()).collect();

    let feasible = |lead: f64, a_term: f64| match rp {
        PublicRate::Finite(r) => lead - a_term <= r + FEASIBILITY_SLACK,
        PublicRate::Infinite => true,
    };
    let boundary = |o_a: f64| rp.finite().map(|r| optimal_sigma(s2, o_a, r)).transpose();

    let mut min_min_max = f64::INFINITY;
    for (ai, &o_a) in auth.iter().enumerate() {
        let edge = boundary(o_a)?;
        for (ui, &o_u) in unauth.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for g in 0..grid.len() {
                if feasible(leading[g], auth_terms[ai][g]) {
                    best = best.max(auth_terms[ai][g] - unauth_terms[ui][g]);
                }
            }
            if let Some(e) = edge {
                best = best.max(observation_term(s2, e, o_a) - observation_term(s2, e, o_u));
            }
            min_min_max = min_min_max.min(best);
        }
    }

    let o_a_star = closed.extremal.o_a_star;
    let inner = |terms_a: &dyn Fn(usize) -> f64, terms_u: &dyn Fn(usize) -> f64| {
        let mut m = f64::INFINITY;
        for ai in 0..auth.len() {
            for ui in 0..unauth.len() {
                m = m.min(terms_a(ai) - terms_u(ui));
            }
        }
        m
    };
    let star_terms = table(o_a_star);
    let mut max_min_min = f64::NEG_INFINITY;
    for g in 0..grid.len() {
        if feasible(leading[g], star_terms[g]) {
            let v = inner(&|ai| auth_terms[ai][g], &|ui| unauth_terms[ui][g]);
            max_min_min = max_min_min.max(v);
        }
    }
    if let Some(e) = boundary(o_a_star)? {
        let v = inner(&|ai| observation_term(s2, e, auth[ai]), &|ui| {
            observation_term(s2, e, unauth[ui])
        });
        max_min_min = max_min_min.max(v);
    }

    if !min_min_max.is_finite() || !max_min_min.is_finite() {
        return Err(Error::Numeric("oracle found no feasible grid point".into()));
    }
    let clamped = min_min_max.max(0.0);
    Ok(OracleReport {
        rp,
        grid_size,
        min_min_max,
        max_min_min,
        clamped,
        closed_form: closed.cs,
        saddle_gap: (min_min_max - max_min_min).abs(),
        closed_form_gap: (clamped - closed.cs).abs(),
    })
}

fn log_grid(sigma2_x: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n)
        .map(|i| sigma2_x * 10f64.powf(-GRID_DECADES * (1.0 - i as f64 / (n - 1) as f64)))
        .collect();
    g[n - 1] = sigma2_x;
    g
}
