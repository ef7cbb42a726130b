//! Equiprobable scalar quantizers for zero-mean Gaussian variables.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest supported number of quantization bins.
pub const MAX_LEVELS: usize = 64;

/// Thresholds at the `i/ℓ` quantiles of `N(0, variance)`, so every bin has
/// probability `1/ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantizer {
    pub variance: f64,
    pub boundaries: Vec<f64>,
}

pub(crate) fn std_normal() -> Normal {
    Normal::standard()
}

pub fn normal_cdf(z: f64) -> f64 {
    std_normal().cdf(z)
}

pub fn normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

pub fn build_quantizer(variance: f64, levels: usize) -> Result<Quantizer> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::DegenerateVariance(variance));
    }
    if !(2..=MAX_LEVELS).contains(&levels) {
        return Err(Error::InvalidConfig(format!(
            "quantization level must be in 2..={MAX_LEVELS}, got {levels}"
        )));
    }
    let sd = variance.sqrt();
    let boundaries = (1..levels)
        .map(|i| {
            // Exact zero for the median keeps symmetric splits bit-identical.
            if 2 * i == levels {
                0.0
            } else {
                sd * normal_quantile(i as f64 / levels as f64)
            }
        })
        .collect();
    Ok(Quantizer { variance, boundaries })
}

impl Quantizer {
    pub fn levels(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Bin index of `value`; bin `i` is `[b_{i-1}, b_i)`.
    pub fn quantize(&self, value: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= value)
    }

    /// Lower and upper edge of bin `i` (infinite at the ends).
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.boundaries[i - 1]
        };
        let hi = self.boundaries.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Probability of every bin under `N(mean, noise_sd²)`.
    pub fn bin_probabilities(&self, mean: f64, noise_sd: f64, out: &mut [f64]) {
        let mut prev = 0.0;
        for (i, slot) in out.iter_mut().enumerate().take(self.levels()) {
            let next = match self.boundaries.get(i) {
                Some(&b) => normal_cdf((b - mean) / noise_sd),
                None => 1.0,
            };
            *slot = (next - prev).max(0.0);
            prev = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_split() {
        assert_eq!(build_quantizer(1.0, 2).unwrap().boundaries, vec![0.0]);
        assert_eq!(build_quantizer(4.0, 2).unwrap().boundaries, vec![0.0]);
    }

    #[test]
    fn quartiles() {
        let q = build_quantizer(1.0, 4).unwrap();
        let expected = [-0.6744897501960817, 0.0, 0.6744897501960817];
        for (b, e) in q.boundaries.iter().zip(expected) {
            assert!((b - e).abs() < 1e-9, "{b} vs {e}");
        }
    }

    #[test]
    fn bins_are_equiprobable() {
        for levels in [2, 3, 5, 8] {
            let q = build_quantizer(2.5, levels).unwrap();
            let mut p = vec![0.0; levels];
            q.bin_probabilities(0.0, 2.5f64.sqrt(), &mut p);
            for v in p {
                assert!((v - 1.0 / levels as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quantize_edges() {
        let q = build_quantizer(1.0, 4).unwrap();
        assert_eq!(q.quantize(-10.0), 0);
        assert_eq!(q.quantize(0.0), 2);
        assert_eq!(q.quantize(-1e-9), 1);
        assert_eq!(q.quantize(10.0), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(build_quantizer(0.0, 2), Err(Error::DegenerateVariance(_))));
        assert!(build_quantizer(1.0, 1).is_err());
    }
}
