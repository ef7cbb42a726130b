//! Random binned codebooks and joint-typicality encoding/decoding.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest codebook, in codewords.
pub const MAX_CODEWORDS: usize = 1 << 22;

/// How letters that can never meet the count condition are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypicalityRule {
    /// `|N(a)/n − p(a)| ≤ ε p(a)` for every letter, and `p(a) = 0 ⇒ N(a) = 0`.
    Strict,
    /// As `Strict`, except a letter whose allowed count interval holds no
    /// integer is treated as having zero mass. Without this, any letter of
    /// tiny positive mass makes the typical set empty at short blocklengths.
    #[default]
    TrimUnreachable,
}

/// Allowed count interval for every letter of a joint alphabet at blocklength `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityTable {
    n: usize,
    lo: Vec<u32>,
    hi: Vec<u32>,
}

impl TypicalityTable {
    pub fn new(pmf: &[f64], n: usize, epsilon: f64, rule: TypicalityRule) -> Self {
        let mut lo = Vec::with_capacity(pmf.len());
        let mut hi = Vec::with_capacity(pmf.len());
        for &p in pmf {
            let allowed: Vec<u32> = (0..=n as u32)
                .filter(|&c| count_ok(c as usize, n, p, epsilon))
                .collect();
            match (allowed.first(), allowed.last()) {
                (Some(&a), Some(&b)) => {
                    lo.push(a);
                    hi.push(b);
                }
                _ if rule == TypicalityRule::TrimUnreachable => {
                    lo.push(0);
                    hi.push(0);
                }
                // Empty interval: an impossible requirement.
                _ => {
                    lo.push(1);
                    hi.push(0);
                }
            }
        }
        TypicalityTable { n, lo, hi }
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> usize {
        self.lo.len()
    }

    /// Checks a vector of letter counts.
    pub fn accepts(&self, counts: &[u32]) -> bool {
        counts
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&c, (&lo, &hi))| lo <= c && c <= hi)
    }

    /// Whether `(v^n, o^n)` is jointly typical, with letter `v * others + o`.
    pub fn pair_typical(&self, v: &[u8], o: &[u32], others: usize, scratch: &mut Vec<u32>) -> bool {
        scratch.clear();
        scratch.resize(self.lo.len(), 0);
        for (&a, &b) in v.iter().zip(o) {
            let idx = a as usize * others + b as usize;
            scratch[idx] += 1;
            if scratch[idx] > self.hi[idx] {
                return false;
            }
        }
        self.accepts(scratch)
    }
}

/// The letter-typicality count condition, shared with test oracles.
pub fn count_ok(count: usize, n: usize, p: f64, epsilon: f64) -> bool {
    if p == 0.0 {
        count == 0
    } else {
        (count as f64 / n as f64 - p).abs() <= epsilon * p
    }
}

/// `bins × per_bin` codewords of length `n`, drawn i.i.d. from `p_V`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook {
    pub n: usize,
    pub bins: usize,
    pub per_bin: usize,
    pub p_v: Vec<f64>,
    words: Vec<u8>,
}

/// `max(1, floor(2^{n r}))`, with a little slack so exact powers survive rounding.
pub fn codebook_dimension(n: usize, rate: f64) -> Result<usize> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::NegativeRate(rate));
    }
    let exponent = n as f64 * rate;
    if exponent > 40.0 {
        return Err(Error::BudgetExceeded {
            states: u128::MAX,
            budget: MAX_CODEWORDS as u128,
        });
    }
    Ok(((exponent.exp2() + 1e-9).floor() as usize).max(1))
}

impl Codebook {
    pub fn generate<R: Rng + ?Sized>(p_v: &[f64], n: usize, rv: f64, rv_prime: f64, rng: &mut R) -> Result<Self> {
        let bins = codebook_dimension(n, rv)?;
        let per_bin = codebook_dimension(n, rv_prime)?;
        let total = bins as u128 * per_bin as u128;
        if total > MAX_CODEWORDS as u128 {
            return Err(Error::BudgetExceeded {
                states: total,
                budget: MAX_CODEWORDS as u128,
            });
        }
        if p_v.len() > u8::MAX as usize + 1 {
            return Err(Error::InvalidConfig("auxiliary alphabet too large".into()));
        }
        let dist = WeightedIndex::new(p_v).map_err(|e| Error::DomainError(e.to_string()))?;
        let words = (0..bins * per_bin * n).map(|_| dist.sample(rng) as u8).collect();
        Ok(Codebook {
            n,
            bins,
            per_bin,
            p_v: p_v.to_vec(),
            words,
        })
    }

    /// A codebook with the given words, `bins * per_bin` of them, each of length `n`.
    pub fn from_words(n: usize, bins: usize, per_bin: usize, p_v: Vec<f64>, words: Vec<u8>) -> Result<Self> {
        if bins == 0 || per_bin == 0 || n == 0 || words.len() != n * bins * per_bin {
            return Err(Error::InvalidConfig("codebook dimensions do not match".into()));
        }
        if words.iter().any(|&w| w as usize >= p_v.len()) {
            return Err(Error::InvalidConfig("codeword symbol outside alphabet".into()));
        }
        Ok(Codebook {
            n,
            bins,
            per_bin,
            p_v,
            words,
        })
    }

    pub fn word(&self, omega: usize, nu: usize) -> &[u8] {
        let start = (omega * self.per_bin + nu) * self.n;
        &self.words[start..start + self.n]
    }
}

/// Lexicographically first `(ω, ν)` whose codeword is jointly typical with
/// `x`, else `(0, 0)`. Indices are 0-based.
pub fn wz_encode(codebook: &Codebook, table_vx: &TypicalityTable, x_levels: usize, x: &[u32]) -> (usize, usize) {
    let mut scratch = Vec::new();
    for omega in 0..codebook.bins {
        for nu in 0..codebook.per_bin {
            if table_vx.pair_typical(codebook.word(omega, nu), x, x_levels, &mut scratch) {
                return (omega, nu);
            }
        }
    }
    (0, 0)
}

/// Smallest `ν` in bin `ω` whose codeword is jointly typical with the
/// combined observation `y`, else `0`.
pub fn wz_decode(codebook: &Codebook, table_vy: &TypicalityTable, y_levels: usize, y: &[u32], omega: usize) -> usize {
    let mut scratch = Vec::new();
    (0..codebook.per_bin)
        .find(|&nu| table_vy.pair_typical(codebook.word(omega, nu), y, y_levels, &mut scratch))
        .unwrap_or(0)
}
