//! Finite joint distributions and the quantized Gaussian source.
//!
//! Variables are laid out as `[V, X, Y_1, ..., Y_L]`; see [`VAR_V`],
//! [`VAR_X`] and [`var_y`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::quantize::{build_quantizer, Quantizer};
use crate::error::{Error, Result};
use crate::sets::ParticipantSet;

pub const VAR_V: usize = 0;
pub const VAR_X: usize = 1;

/// Variable index of participant `l` (1-based).
pub fn var_y(l: usize) -> usize {
    l + 1
}

/// Variable indices of the participants in `set`.
pub fn y_vars(set: ParticipantSet) -> Vec<usize> {
    set.iter().map(var_y).collect()
}

/// Largest joint table built by [`discretize_gaussian`].
pub const MAX_CELLS: usize = 1 << 24;

/// A joint pmf over several finite variables, stored row-major with the
/// first variable most significant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSource {
    sizes: Vec<usize>,
    pmf: Vec<f64>,
}

/// A marginal table in the order the variables were requested.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub sizes: Vec<usize>,
    pub pmf: Vec<f64>,
}

impl Marginal {
    pub fn entropy(&self) -> f64 {
        entropy(&self.pmf)
    }

    /// Smallest nonzero mass.
    pub fn min_mass(&self) -> f64 {
        self.pmf
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn support_size(&self) -> usize {
        self.pmf.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }
}

/// Shannon entropy in bits.
pub fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

impl DiscreteSource {
    pub fn new(sizes: Vec<usize>, pmf: Vec<f64>) -> Result<Self> {
        let cells: usize = sizes.iter().product();
        if sizes.is_empty() || sizes.contains(&0) || cells != pmf.len() {
            return Err(Error::DomainError(format!(
                "pmf has {} cells, alphabet sizes {sizes:?}",
                pmf.len()
            )));
        }
        if pmf.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::DomainError("pmf has negative or NaN mass".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::DomainError(format!("pmf sums to {total}")));
        }
        Ok(DiscreteSource { sizes, pmf })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn variables(&self) -> usize {
        self.sizes.len()
    }

    /// Marginal over `vars` (in that order). An empty list gives the trivial
    /// one-cell table.
    pub fn marginal(&self, vars: &[usize]) -> Marginal {
        let sizes: Vec<usize> = vars.iter().map(|&v| self.sizes[v]).collect();
        let mut out = vec![0.0; sizes.iter().product()];
        let mut digits = vec![0usize; self.sizes.len()];
        for &p in &self.pmf {
            if p > 0.0 {
                let idx = vars.iter().fold(0, |acc, &v| acc * self.sizes[v] + digits[v]);
                out[idx] += p;
            }
            for d in (0..digits.len()).rev() {
                digits[d] += 1;
                if digits[d] < self.sizes[d] {
                    break;
                }
                digits[d] = 0;
            }
        }
        Marginal { sizes, pmf: out }
    }

    pub fn entropy(&self, vars: &[usize]) -> f64 {
        self.marginal(vars).entropy()
    }

    /// `H(A | B)`
    pub fn conditional_entropy(&self, a: &[usize], given: &[usize]) -> f64 {
        self.entropy(&concat(a, given)) - self.entropy(given)
    }

    /// `I(A; B)`
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> f64 {
        self.entropy(a) + self.entropy(b) - self.entropy(&concat(a, b))
    }

    /// `I(A; B | C)`
    pub fn conditional_mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        self.entropy(&concat(a, c)) + self.entropy(&concat(b, c))
            - self.entropy(&concat(&concat(a, b), c))
            - self.entropy(c)
    }
}

fn concat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// Linear Gaussian model `Y_l = h_l X + W_l` with an auxiliary `V = X + N`
/// whose conditional variance `Var(X | V)` is `sigma2_cond`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianModel {
    pub sigma2_x: f64,
    pub gains: Vec<f64>,
    /// `0` makes `V = X`; `sigma2_x` makes `V` independent of `X`.
    pub sigma2_cond: f64,
}

/// Standard deviation of the auxiliary's additive noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum AuxNoise {
    None,
    Gaussian(f64),
    Independent,
}

impl GaussianModel {
    pub fn new(sigma2_x: f64, gains: Vec<f64>, sigma2_cond: f64) -> Result<Self> {
        if !(sigma2_x > 0.0) {
            return Err(Error::DegenerateVariance(sigma2_x));
        }
        if !(0.0..=sigma2_x).contains(&sigma2_cond) {
            return Err(Error::DomainError(format!(
                "conditional variance {sigma2_cond} outside [0, {sigma2_x}]"
            )));
        }
        Ok(GaussianModel {
            sigma2_x,
            gains,
            sigma2_cond,
        })
    }

    pub(crate) fn aux_noise(&self) -> AuxNoise {
        if self.sigma2_cond == 0.0 {
            AuxNoise::None
        } else if self.sigma2_cond >= self.sigma2_x {
            AuxNoise::Independent
        } else {
            let var = self.sigma2_cond * self.sigma2_x / (self.sigma2_x - self.sigma2_cond);
            AuxNoise::Gaussian(var.sqrt())
        }
    }

    /// Marginal variance of `V` (finite variants only).
    pub(crate) fn v_variance(&self) -> f64 {
        match self.aux_noise() {
            AuxNoise::None | AuxNoise::Independent => self.sigma2_x,
            AuxNoise::Gaussian(sd) => self.sigma2_x + sd * sd,
        }
    }

    pub fn y_variance(&self, l: usize) -> f64 {
        let h = self.gains[l - 1];
        h * h * self.sigma2_x + 1.0
    }
}

/// Quantizers for `V`, `X` and every `Y_l` at the given levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizerBank {
    pub v: Quantizer,
    pub x: Quantizer,
    pub y: Vec<Quantizer>,
}

impl QuantizerBank {
    pub fn new(model: &GaussianModel, v_levels: usize, x_levels: usize, y_levels: &[usize]) -> Result<Self> {
        if y_levels.len() != model.gains.len() {
            return Err(Error::InvalidConfig("one quantization level per participant".into()));
        }
        Ok(QuantizerBank {
            v: build_quantizer(model.v_variance(), v_levels)?,
            x: build_quantizer(model.sigma2_x, x_levels)?,
            y: y_levels
                .iter()
                .enumerate()
                .map(|(i, &lv)| build_quantizer(model.y_variance(i + 1), lv))
                .collect::<Result<_>>()?,
        })
    }

    pub fn uniform(model: &GaussianModel, levels: usize) -> Result<Self> {
        Self::new(model, levels, levels, &vec![levels; model.gains.len()])
    }
}

/// Bin indices of one joint draw of `X` and the observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedSample {
    pub x: u32,
    pub y: Vec<u32>,
}

/// Draws `X ~ N(0, σ²_X)`, `Y_l = h_l X + W_l` and quantizes every variable.
pub fn sample_quantized<R: Rng + ?Sized>(
    sigma2_x: f64,
    gains: &[f64],
    bank: &QuantizerBank,
    rng: &mut R,
) -> QuantizedSample {
    let x: f64 = sigma2_x.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let y = gains
        .iter()
        .zip(&bank.y)
        .map(|(h, q)| {
            let w: f64 = rng.sample(StandardNormal);
            q.quantize(h * x + w) as u32
        })
        .collect();
    QuantizedSample {
        x: bank.x.quantize(x) as u32,
        y,
    }
}

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];
const PANELS: usize = 128;

fn graded(z: f64) -> f64 {
    z * z * (3.0 - 2.0 * z)
}

/// Quantized joint pmf of `(V, X, Y_1, ..., Y_L)`.
///
/// Given `X = x`, `V` and the `Y_l` are independent Gaussians, so every cell
/// is a one-dimensional integral over the `X` bin. The integral runs in the
/// probability coordinate `u = Φ(x/σ_X)` with composite Gauss-Legendre panels
/// graded toward the bin edges, where the conditional bin probabilities of
/// high-gain observations change fastest.
pub fn discretize_gaussian(model: &GaussianModel, bank: &QuantizerBank) -> Result<DiscreteSource> {
    let lx = bank.x.levels();
    let lv = bank.v.levels();
    let ly: Vec<usize> = bank.y.iter().map(Quantizer::levels).collect();
    let rest: usize = ly.iter().product();
    let mut sizes = vec![lv, lx];
    sizes.extend_from_slice(&ly);
    let cells = lv.saturating_mul(lx).saturating_mul(rest);
    if cells > MAX_CELLS {
        return Err(Error::BudgetExceeded {
            states: cells as u128,
            budget: MAX_CELLS as u128,
        });
    }
    let mut pmf = vec![0.0; cells];
    let sd_x = model.sigma2_x.sqrt();
    let noise = model.aux_noise();
    let mut cond_v = vec![0.0; lv];
    let mut cond_y: Vec<Vec<f64>> = ly.iter().map(|&n| vec![0.0; n]).collect();
    let mut prod = vec![0.0; lv * rest];

    for j in 0..lx {
        let (u0, u1) = (j as f64 / lx as f64, (j + 1) as f64 / lx as f64);
        for k in 0..PANELS {
            let a = u0 + (u1 - u0) * graded(k as f64 / PANELS as f64);
            let b = u0 + (u1 - u0) * graded((k + 1) as f64 / PANELS as f64);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
                for sign in [-1.0, 1.0] {
                    let u = mid + sign * node * half;
                    let x = sd_x * super::quantize::normal_quantile(u);
                    let w = weight * half;
                    match noise {
                        AuxNoise::None => {
                            cond_v.fill(0.0);
                            cond_v[bank.v.quantize(x).min(lv - 1)] = 1.0;
                        }
                        AuxNoise::Independent => cond_v.fill(1.0 / lv as f64),
                        AuxNoise::Gaussian(sd) => bank.v.bin_probabilities(x, sd, &mut cond_v),
                    }
                    for (l, cy) in cond_y.iter_mut().enumerate() {
                        bank.y[l].bin_probabilities(model.gains[l] * x, 1.0, cy);
                    }
                    outer_product(w, &cond_v, &cond_y, &mut prod);
                    for v in 0..lv {
                        let dst = (v * lx + j) * rest;
                        let src = v * rest;
                        for r in 0..rest {
                            pmf[dst + r] += prod[src + r];
                        }
                    }
                }
            }
        }
    }
    // Quadrature weights sum to the bin width exactly; renormalize the
    // residual rounding so the table is a pmf.
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    DiscreteSource::new(sizes, pmf)
}

fn outer_product(w: f64, first: &[f64], rest: &[Vec<f64>], out: &mut [f64]) {
    let mut len = first.len();
    for (o, &f) in out.iter_mut().zip(first) {
        *o = w * f;
    }
    for dist in rest {
        let n = dist.len();
        for i in (0..len).rev() {
            let base = out[i];
            for (k, &p) in dist.iter().enumerate() {
                out[i * n + k] = base * p;
            }
        }
        len *= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropies_of_simple_tables() {
        // X uniform bit, Y = X through a BSC(0.1)
        let e = 0.1;
        let s = DiscreteSource::new(vec![2, 2], vec![0.5 * (1.0 - e), 0.5 * e, 0.5 * e, 0.5 * (1.0 - e)]).unwrap();
        assert!((s.entropy(&[0]) - 1.0).abs() < 1e-15);
        let h2 = -(e * e.log2() + (1.0 - e) * (1.0 - e).log2());
        assert!((s.mutual_information(&[0], &[1]) - (1.0 - h2)).abs() < 1e-12);
        assert!((s.conditional_entropy(&[1], &[0]) - h2).abs() < 1e-12);
        assert_eq!(s.marginal(&[]).pmf, vec![1.0]);
        assert!((s.marginal(&[1, 0]).min_mass() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_pmf() {
        assert!(DiscreteSource::new(vec![2], vec![0.5, 0.6]).is_err());
        assert!(DiscreteSource::new(vec![2], vec![0.5]).is_err());
        assert!(DiscreteSource::new(vec![2], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn quantized_marginals_are_uniform() {
        let m = GaussianModel::new(2.0, vec![0.5, 1.0], 0.5).unwrap();
        let bank = QuantizerBank::uniform(&m, 3).unwrap();
        let d = discretize_gaussian(&m, &bank).unwrap();
        for var in 0..4 {
            for p in d.marginal(&[var]).pmf {
                assert!((p - 1.0 / 3.0).abs() < 1e-8, "var {var}: {p}");
            }
        }
    }

    #[test]
    fn identity_auxiliary_copies_x() {
        let m = GaussianModel::new(1.0, vec![1.0], 0.0).unwrap();
        let bank = QuantizerBank::uniform(&m, 2).unwrap();
        let d = discretize_gaussian(&m, &bank).unwrap();
        let vx = d.marginal(&[VAR_V, VAR_X]).pmf;
        assert!((vx[0] - 0.5).abs() < 1e-12 && (vx[3] - 0.5).abs() < 1e-12);
        assert_eq!(vx[1], 0.0);
        assert_eq!(vx[2], 0.0);
    }

    #[test]
    fn independent_auxiliary() {
        let m = GaussianModel::new(1.0, vec![1.0], 1.0).unwrap();
        let bank = QuantizerBank::uniform(&m, 2).unwrap();
        let d = discretize_gaussian(&m, &bank).unwrap();
        assert!(d.mutual_information(&[VAR_V], &[VAR_X, var_y(1)]).abs() < 1e-12);
    }

    #[test]
    fn bivariate_orthant_probability() {
        // P(X > 0, Y > 0) for correlation ρ is 1/4 + asin(ρ)/(2π).
        let h: f64 = 0.8;
        let m = GaussianModel::new(1.0, vec![h], 1.0).unwrap();
        let bank = QuantizerBank::uniform(&m, 2).unwrap();
        let d = discretize_gaussian(&m, &bank).unwrap();
        let xy = d.marginal(&[VAR_X, var_y(1)]).pmf;
        let rho = h / (h * h + 1.0).sqrt();
        let exact = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        assert!((xy[3] - exact).abs() < 1e-10, "{} vs {exact}", xy[3]);
    }
}
