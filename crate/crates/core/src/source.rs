//! Joint Gaussian source `(X, Y_1, ..., Y_L)` and its normalized gain form
//! `Y_S = H_S X + W` with `W ~ N(0, I)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sets::{ParticipantSet, MAX_PARTICIPANTS};

/// Relative pivot floor for Cholesky factorizations.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// How a source was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourceMode {
    Covariance,
    Gains,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Full covariance; row/column 0 is the dealer.
    Covariance(DMatrix<f64>),
    Gains(Vec<f64>),
}

/// A validated joint Gaussian source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    sigma2_x: f64,
    participants: usize,
    repr: Repr,
}

/// Gain vector of one subset together with `o = hᵀh`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetGain {
    pub subset: ParticipantSet,
    pub h: Vec<f64>,
    pub o: f64,
}

impl SourceSpec {
    /// Accepts a symmetric positive definite `(L+1)×(L+1)` covariance with
    /// the dealer's variable at index 0.
    pub fn from_covariance(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(Error::InvalidSource(
                "covariance needs the dealer and at least one participant".into(),
            ));
        }
        if dim - 1 > MAX_PARTICIPANTS {
            return Err(Error::TooManyParticipants(dim - 1));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::InvalidSource(format!(
                "covariance row {bad} has {} entries, expected {dim}",
                rows[bad].len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSource("covariance has non-finite entries".into()));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        cholesky_lower(&m)?;
        Ok(SourceSpec {
            sigma2_x: m[(0, 0)],
            participants: dim - 1,
            repr: Repr::Covariance(m),
        })
    }

    /// Gain-vector form: `Y_l = gains[l-1]·X + W_l` with unit-variance noise.
    pub fn from_gains(sigma2_x: f64, gains: Vec<f64>) -> Result<Self> {
        if !(sigma2_x > 0.0) || !sigma2_x.is_finite() {
            return Err(Error::InvalidSource(format!(
                "sigma2_x must be positive, got {sigma2_x}"
            )));
        }
        if gains.is_empty() {
            return Err(Error::InvalidSource("need at least one participant".into()));
        }
        if gains.len() > MAX_PARTICIPANTS {
            return Err(Error::TooManyParticipants(gains.len()));
        }
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidSource("gains must be finite".into()));
        }
        Ok(SourceSpec {
            sigma2_x,
            participants: gains.len(),
            repr: Repr::Gains(gains),
        })
    }

    pub fn sigma2_x(&self) -> f64 {
        self.sigma2_x
    }

    pub fn participants(&self) -> usize {
        self.participants
    }

    pub fn mode(&self) -> SourceMode {
        match self.repr {
            Repr::Covariance(_) => SourceMode::Covariance,
            Repr::Gains(_) => SourceMode::Gains,
        }
    }

    /// The full gain vector in gains mode.
    pub fn gains(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Gains(g) => Some(g),
            Repr::Covariance(_) => None,
        }
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Covariance(m) => m.clone(),
            Repr::Gains(g) => {
                let dim = g.len() + 1;
                let mut m = DMatrix::zeros(dim, dim);
                m[(0, 0)] = self.sigma2_x;
                for (i, &gi) in g.iter().enumerate() {
                    m[(0, i + 1)] = gi * self.sigma2_x;
                    m[(i + 1, 0)] = gi * self.sigma2_x;
                    for (j, &gj) in g.iter().enumerate() {
                        m[(i + 1, j + 1)] = gi * gj * self.sigma2_x + if i == j { 1.0 } else { 0.0 };
                    }
                }
                m
            }
        }
    }

    /// Per-participant scalar gains with independent unit noise.
    ///
    /// Covariance sources qualify only when the residual noise covariance of
    /// the participants given the dealer is diagonal; each observation is then
    /// rescaled by its own noise standard deviation.
    pub fn per_participant_gains(&self) -> Result<Vec<f64>> {
        match &self.repr {
            Repr::Gains(g) => Ok(g.clone()),
            Repr::Covariance(m) => {
                let l = self.participants;
                let noise = residual_noise(m, &(1..=l).collect::<Vec<_>>());
                let scale = noise.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
                for i in 0..l {
                    for j in 0..l {
                        if i != j && noise[(i, j)].abs() > 1e-9 * scale {
                            return Err(Error::InvalidSource(
                                "participant noise is correlated; per-participant gains undefined".into(),
                            ));
                        }
                    }
                }
                Ok((0..l)
                    .map(|i| m[(i + 1, 0)] / self.sigma2_x / noise[(i, i)].sqrt())
                    .collect())
            }
        }
    }

    fn check_subset(&self, subset: ParticipantSet) -> Result<()> {
        if let Some(p) = subset.iter().find(|&p| p > self.participants) {
            return Err(Error::ParticipantOutOfRange {
                participant: p,
                l: self.participants,
            });
        }
        Ok(())
    }

    /// Normalized gain vector `H_S` for a subset.
    ///
    /// Covariance mode computes `Σ_W = Σ_{Y_S} − Σ_{Y_S X} Σ_{Y_S X}ᵀ / σ²_X`,
    /// its lower Cholesky factor `B`, and `H_S = B⁻¹ Σ_{Y_S X} / σ²_X`.
    /// Gains mode returns the sub-vector directly.
    pub fn derive_gain_vector(&self, subset: ParticipantSet) -> Result<SubsetGain> {
        self.check_subset(subset)?;
        let members = subset.members();
        let h = match &self.repr {
            Repr::Gains(g) => members.iter().map(|&p| g[p - 1]).collect::<Vec<_>>(),
            Repr::Covariance(m) => {
                if members.is_empty() {
                    Vec::new()
                } else {
                    let noise = residual_noise(m, &members);
                    let chol = cholesky_lower_scaled(&noise, max_diagonal(m))?;
                    let rhs = DVector::from_iterator(members.len(), members.iter().map(|&p| m[(p, 0)] / self.sigma2_x));
                    forward_substitute(&chol, &rhs).iter().copied().collect()
                }
            }
        };
        let o = h.iter().map(|v| v * v).sum();
        Ok(SubsetGain { subset, h, o })
    }

    /// `I(X; Y_S)` in bits, via `½ log₂(σ²_X o + 1)`.
    ///
    /// Covariance sources also evaluate the log-determinant form
    /// `½ log₂(σ²_X det Σ_{Y_S} / det Σ_{(X,Y_S)})` and require agreement to
    /// 1e-9 relative.
    pub fn mutual_information(&self, subset: ParticipantSet) -> Result<f64> {
        let g = self.derive_gain_vector(subset)?;
        let scalar = 0.5 * (self.sigma2_x * g.o + 1.0).log2();
        if let Repr::Covariance(m) = &self.repr {
            let logdet = log_det_mutual_information(m, &subset.members())?;
            let tol = 1e-9 * scalar.abs().max(1e-300);
            if (logdet - scalar).abs() > tol && (logdet - scalar).abs() > 1e-12 {
                return Err(Error::Numeric(format!(
                    "log-det mutual information {logdet} disagrees with scalar form {scalar}"
                )));
            }
        }
        Ok(scalar)
    }
}

/// `½ log₂(σ²_X det Σ_{Y_S} / det Σ_{(X,Y_S)})` from the raw covariance,
/// with `members` 1-based participant indices.
pub fn log_det_mutual_information(cov: &DMatrix<f64>, members: &[usize]) -> Result<f64> {
    if members.is_empty() {
        return Ok(0.0);
    }
    let ys = cov.select_rows(members).select_columns(members);
    let mut with_x = vec![0usize];
    with_x.extend_from_slice(members);
    let joint = cov.select_rows(&with_x).select_columns(&with_x);
    let ld_ys = log2_det_spd(&ys)?;
    let ld_joint = log2_det_spd(&joint)?;
    Ok(0.5 * (cov[(0, 0)].log2() + ld_ys - ld_joint))
}

/// `log₂ det` of a symmetric positive definite matrix via Cholesky.
pub fn log2_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let l = cholesky_lower(m)?;
    Ok(2.0 * l.diagonal().iter().map(|d| d.log2()).sum::<f64>())
}

fn max_diagonal(m: &DMatrix<f64>) -> f64 {
    m.diagonal().iter().fold(0.0f64, |a, v| a.max(*v))
}

/// Noise covariance of `Y_S` given `X`, `members` 1-based.
fn residual_noise(cov: &DMatrix<f64>, members: &[usize]) -> DMatrix<f64> {
    let s2 = cov[(0, 0)];
    let k = members.len();
    DMatrix::from_fn(k, k, |i, j| {
        let (a, b) = (members[i], members[j]);
        cov[(a, b)] - cov[(a, 0)] * cov[(b, 0)] / s2
    })
}

/// Lower Cholesky factor; pivots below `1e-12 × max diagonal` are rejected.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    cholesky_lower_scaled(m, max_diagonal(m))
}

fn cholesky_lower_scaled(m: &DMatrix<f64>, scale: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let floor = PIVOT_TOLERANCE * scale;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::NonPositiveDefinite { row: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

fn forward_substitute(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let mut x = DVector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn set(m: &[usize], l: usize) -> ParticipantSet {
        ParticipantSet::from_members(m, l).unwrap()
    }

    #[test]
    fn unit_gain_unit_noise() {
        let s = SourceSpec::from_covariance(&[vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let g = s.derive_gain_vector(set(&[1], 1)).unwrap();
        assert_relative_eq!(g.h[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.o, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.mutual_information(set(&[1], 1)).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn example_gains_subset() {
        let s = SourceSpec::from_gains(2.0, vec![0.5, 1.0, 0.8]).unwrap();
        let g = s.derive_gain_vector(set(&[1, 2], 3)).unwrap();
        assert_eq!(g.h, vec![0.5, 1.0]);
        assert_relative_eq!(g.o, 1.25, epsilon = 1e-15);
        let mi = s.mutual_information(set(&[1, 2], 3)).unwrap();
        assert_relative_eq!(mi, 0.5 * 3.5f64.log2(), epsilon = 1e-15);
        assert_relative_eq!(mi, 0.903677461028802, epsilon = 1e-12);
    }

    #[test]
    fn empty_subset_is_independent() {
        let s = SourceSpec::from_gains(2.0, vec![0.5]).unwrap();
        let g = s.derive_gain_vector(ParticipantSet::EMPTY).unwrap();
        assert_eq!(g.o, 0.0);
        assert_eq!(s.mutual_information(ParticipantSet::EMPTY).unwrap(), 0.0);
        let c = SourceSpec::from_covariance(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert_eq!(c.derive_gain_vector(ParticipantSet::EMPTY).unwrap().o, 0.0);
    }

    #[test]
    fn rejects_singular_and_asymmetric() {
        let singular = SourceSpec::from_covariance(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(singular, Err(Error::NonPositiveDefinite { .. })));
        let asym = SourceSpec::from_covariance(&[vec![1.0, 0.5], vec![0.4, 1.0]]);
        assert!(matches!(asym, Err(Error::NotSymmetric(0, 1))));
        assert!(SourceSpec::from_gains(0.0, vec![1.0]).is_err());
        assert!(SourceSpec::from_gains(1.0, vec![]).is_err());
    }

    #[test]
    fn subset_out_of_range() {
        let s = SourceSpec::from_gains(1.0, vec![1.0, 2.0]).unwrap();
        let bad = ParticipantSet::from_members(&[3], 3).unwrap();
        assert!(matches!(
            s.derive_gain_vector(bad),
            Err(Error::ParticipantOutOfRange { participant: 3, l: 2 })
        ));
    }

    #[test]
    fn gains_roundtrip_through_covariance() {
        let g = SourceSpec::from_gains(1.5, vec![0.3, -1.2, 0.7]).unwrap();
        let rows: Vec<Vec<f64>> = g.covariance().row_iter().map(|r| r.iter().copied().collect()).collect();
        let c = SourceSpec::from_covariance(&rows).unwrap();
        for s in ParticipantSet::all_subsets(3) {
            let a = g.derive_gain_vector(s).unwrap().o;
            let b = c.derive_gain_vector(s).unwrap().o;
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-14);
        }
        let back = c.per_participant_gains().unwrap();
        for (x, y) in back.iter().zip([0.3, -1.2, 0.7]) {
            assert_relative_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn correlated_noise_has_no_per_participant_gains() {
        let c = SourceSpec::from_covariance(&[vec![1.0, 0.5, 0.5], vec![0.5, 1.0, 0.6], vec![0.5, 0.6, 1.0]]).unwrap();
        assert!(c.per_participant_gains().is_err());
    }
}
