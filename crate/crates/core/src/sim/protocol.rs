//! End-to-end simulation of reconciliation and privacy amplification.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{
    achievable_rate_bound, default_rates, error_bound, secret_length_rule, ErrorBound, ErrorBoundInput, RateBound,
};
use super::codebook::{wz_decode, wz_encode, Codebook, TypicalityRule, TypicalityTable};
use super::discrete::{
    discretize_gaussian, entropy, sample_quantized, var_y, DiscreteSource, GaussianModel, QuantizerBank, VAR_V, VAR_X,
};
use super::hash::{bits_per_symbol, seed_length, symbols_to_bits, toeplitz_hash, MAX_SECRET_BITS};
use super::quantize::MAX_LEVELS;
use crate::access::AccessStructure;
use crate::capacity::optimal_sigma;
use crate::error::{Error, Result};
use crate::sets::ParticipantSet;
use crate::source::SourceSpec;

/// How the Gaussian auxiliary `V` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Auxiliary {
    /// `Var(X | V)` given directly.
    ConditionalVariance(f64),
    /// The optimal `Var(X | V)` for this public rate.
    TargetRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    /// Exact when `n q ≤ 8` with binary alphabets and within budget.
    #[default]
    Auto,
    /// Exact or fail with `BudgetExceeded`.
    Exact,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub l_quant: usize,
    pub n: usize,
    pub q: usize,
    pub epsilon: f64,
    /// Bin rate; derived from the source when absent.
    pub rv: Option<f64>,
    /// In-bin rate; derived from the source when absent.
    pub rv_prime: Option<f64>,
    /// Secret bits; the rate-bound rule (clamped to `[0, 64]`) when absent.
    pub k: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub auxiliary: Auxiliary,
    pub leakage: LeakageMode,
    pub typicality: TypicalityRule,
    /// Enumeration budget for exact leakage, in joint states.
    pub budget: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            l_quant: 2,
            n: 4,
            q: 2,
            epsilon: 0.1,
            rv: None,
            rv_prime: None,
            k: None,
            seed: 0,
            trials: 1000,
            auxiliary: Auxiliary::ConditionalVariance(0.0),
            leakage: LeakageMode::Auto,
            typicality: TypicalityRule::default(),
            budget: 10_000_000,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(2..=MAX_LEVELS).contains(&self.l_quant) {
            return bad(format!("l_quant must be in 2..={MAX_LEVELS}"));
        }
        if self.n == 0 || self.q == 0 {
            return bad("n and q must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must be in (0, 1), got {}", self.epsilon));
        }
        for r in [self.rv, self.rv_prime].into_iter().flatten() {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::NegativeRate(r));
            }
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some(k) = self.k {
            if k > MAX_SECRET_BITS {
                return Err(Error::KTooLarge {
                    k,
                    available: MAX_SECRET_BITS,
                });
            }
        }
        Ok(())
    }

    pub fn blocklength(&self) -> usize {
        self.n * self.q
    }
}

/// Everything fixed before the first trial: quantizers, the quantized joint,
/// the codebook and the typicality tables.
#[derive(Debug, Clone)]
pub struct ProtocolSetup {
    pub config: ProtocolConfig,
    pub gains: Vec<f64>,
    pub sigma2_x: f64,
    pub sigma2_cond: f64,
    pub bank: QuantizerBank,
    pub source: DiscreteSource,
    pub rv: f64,
    pub rv_prime: f64,
    pub codebook: Codebook,
    pub table_vx: TypicalityTable,
    pub decoders: Vec<SetDecoder>,
    pub unauthorized: Vec<ParticipantSet>,
    pub k: usize,
    pub symbol_bits: usize,
    pub seed_bits: usize,
}

/// Typicality table over `(V, Y_A)` for one authorized set.
#[derive(Debug, Clone)]
pub struct SetDecoder {
    pub set: ParticipantSet,
    pub y_levels: usize,
    pub table: TypicalityTable,
}

/// Mixed-radix index of the observations of `set` at one time step,
/// first member most significant.
pub fn combined_index(set: ParticipantSet, y: &[u32], levels: &[usize]) -> u32 {
    set.iter().fold(0u32, |acc, p| acc * levels[p - 1] as u32 + y[p - 1])
}

impl ProtocolSetup {
    pub fn new(spec: &SourceSpec, structure: &AccessStructure, config: &ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let gains = spec.per_participant_gains()?;
        if gains.len() != structure.participants() {
            return Err(Error::InvalidSource(format!(
                "source has {} participants, access structure has {}",
                gains.len(),
                structure.participants()
            )));
        }
        let sigma2_x = spec.sigma2_x();
        let sigma2_cond = match config.auxiliary {
            Auxiliary::ConditionalVariance(v) => v,
            Auxiliary::TargetRate(rp) => {
                let e = structure.extremal_sets(spec)?;
                optimal_sigma(sigma2_x, e.o_a_star, rp)?.min(sigma2_x)
            }
        };
        let model = GaussianModel::new(sigma2_x, gains.clone(), sigma2_cond)?;
        let bank = QuantizerBank::uniform(&model, config.l_quant)?;
        let source = discretize_gaussian(&model, &bank)?;
        let (drv, drv_prime) = default_rates(&source, structure, config.epsilon)?;
        let rv = config.rv.unwrap_or(drv);
        let rv_prime = config.rv_prime.unwrap_or(drv_prime);

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(0);
        let p_v = source.marginal(&[VAR_V]).pmf;
        let codebook = Codebook::generate(&p_v, config.n, rv, rv_prime, &mut rng)?;

        let sizes = source.sizes().to_vec();
        let table_vx = TypicalityTable::new(
            &source.marginal(&[VAR_V, VAR_X]).pmf,
            config.n,
            config.epsilon,
            config.typicality,
        );
        let decoders = structure
            .authorized()
            .iter()
            .map(|&a| {
                let mut vars = vec![VAR_V];
                vars.extend(a.iter().map(var_y));
                let m = source.marginal(&vars);
                SetDecoder {
                    set: a,
                    y_levels: m.sizes[1..].iter().product(),
                    table: TypicalityTable::new(&m.pmf, config.n, config.epsilon, config.typicality),
                }
            })
            .collect();

        let symbol_bits = bits_per_symbol(sizes[VAR_V]);
        let input_bits = config.blocklength() * symbol_bits;
        let cap = input_bits.min(MAX_SECRET_BITS);
        let k = match config.k {
            Some(k) if k > input_bits => {
                return Err(Error::KTooLarge {
                    k,
                    available: input_bits,
                })
            }
            Some(k) => k,
            None => {
                let rule = secret_length_rule(&source, structure, config.n, config.q, config.epsilon)?;
                if rule.is_finite() {
                    rule.clamp(0.0, cap as f64) as usize
                } else {
                    0
                }
            }
        };
        Ok(ProtocolSetup {
            config: config.clone(),
            gains,
            sigma2_x,
            sigma2_cond,
            bank,
            source,
            rv,
            rv_prime,
            codebook,
            table_vx,
            decoders,
            unauthorized: structure.unauthorized().to_vec(),
            k,
            symbol_bits,
            seed_bits: seed_length(input_bits, k),
        })
    }

    pub fn x_levels(&self) -> usize {
        self.bank.x.levels()
    }

    pub fn y_levels(&self) -> Vec<usize> {
        self.bank.y.iter().map(|q| q.levels()).collect()
    }

    /// Encodes `x^N` block by block; returns the bin indices and `v^N`.
    pub fn encode(&self, x: &[u32]) -> (Vec<usize>, Vec<u8>) {
        let n = self.config.n;
        let mut omegas = Vec::with_capacity(self.config.q);
        let mut v = Vec::with_capacity(x.len());
        for block in x.chunks(n) {
            let (omega, nu) = wz_encode(&self.codebook, &self.table_vx, self.x_levels(), block);
            omegas.push(omega);
            v.extend_from_slice(self.codebook.word(omega, nu));
        }
        (omegas, v)
    }

    pub fn secret(&self, v: &[u8], hash_seed: &[bool]) -> Result<u64> {
        toeplitz_hash(&symbols_to_bits(v, self.symbol_bits), hash_seed, self.k)
    }

    /// Bits of public communication per source symbol: the bin indices plus
    /// the hash seed.
    pub fn public_rate(&self) -> f64 {
        let big_n = self.config.blocklength() as f64;
        (self.config.q as f64 * (self.codebook.bins as f64).log2() + self.seed_bits as f64) / big_n
    }

    /// One Monte Carlo trial on its own RNG stream.
    pub fn run_trial(&self, trial: usize) -> Result<TrialOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(trial as u64 + 1);
        let hash_seed: Vec<bool> = (0..self.seed_bits).map(|_| rng.random()).collect();
        let big_n = self.config.blocklength();
        let l = self.gains.len();
        let mut x = Vec::with_capacity(big_n);
        let mut y = vec![Vec::with_capacity(big_n); l];
        for _ in 0..big_n {
            let s = sample_quantized(self.sigma2_x, &self.gains, &self.bank, &mut rng);
            x.push(s.x);
            for (col, v) in y.iter_mut().zip(s.y) {
                col.push(v);
            }
        }
        let mut fallbacks = 0;
        let mut omegas = Vec::with_capacity(self.config.q);
        let mut nus = Vec::with_capacity(self.config.q);
        let mut v = Vec::with_capacity(big_n);
        let n = self.config.n;
        for block in x.chunks(n) {
            let (omega, nu) = wz_encode(&self.codebook, &self.table_vx, self.x_levels(), block);
            if (omega, nu) == (0, 0)
                && !self
                    .table_vx
                    .pair_typical(self.codebook.word(0, 0), block, self.x_levels(), &mut Vec::new())
            {
                fallbacks += 1;
            }
            omegas.push(omega);
            nus.push(nu);
            v.extend_from_slice(self.codebook.word(omega, nu));
        }
        let secret = self.secret(&v, &hash_seed)?;
        let levels = self.y_levels();
        let mut per_set = Vec::with_capacity(self.decoders.len());
        let mut column = vec![0u32; l];
        for dec in &self.decoders {
            let combined: Vec<u32> = (0..big_n)
                .map(|t| {
                    for (i, c) in column.iter_mut().enumerate() {
                        *c = y[i][t];
                    }
                    combined_index(dec.set, &column, &levels)
                })
                .collect();
            let mut v_hat = Vec::with_capacity(big_n);
            let mut block_errors = 0;
            for (b, chunk) in combined.chunks(n).enumerate() {
                let nu_hat = wz_decode(&self.codebook, &dec.table, dec.y_levels, chunk, omegas[b]);
                if nu_hat != nus[b] {
                    block_errors += 1;
                }
                v_hat.extend_from_slice(self.codebook.word(omegas[b], nu_hat));
            }
            let secret_hat = self.secret(&v_hat, &hash_seed)?;
            per_set.push(SetOutcome {
                set: dec.set,
                block_errors,
                sequence_ok: block_errors == 0,
                secret_ok: secret_hat == secret,
            });
        }
        Ok(TrialOutcome {
            trial,
            secret,
            encoder_fallbacks: fallbacks,
            per_set,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetOutcome {
    pub set: ParticipantSet,
    pub block_errors: usize,
    /// All `q` blocks decoded correctly; this is what the final equality check
    /// would confirm.
    pub sequence_ok: bool,
    pub secret_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub secret: u64,
    pub encoder_fallbacks: usize,
    pub per_set: Vec<SetOutcome>,
}

/// A binomial proportion with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub rate: f64,
    pub low: f64,
    pub high: f64,
}

impl Proportion {
    pub fn wilson(successes: usize, trials: usize) -> Self {
        const Z: f64 = 1.959_963_984_540_054;
        if trials == 0 {
            return Proportion {
                rate: 0.0,
                low: 0.0,
                high: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z * Z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            rate: p,
            low: (centre - half).max(0.0),
            high: (centre + half).min(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetErrorRates {
    pub set: ParticipantSet,
    pub sequence_error: Proportion,
    pub secret_error: Proportion,
    pub block_error_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageStatus {
    Exact,
    NotComputed,
}

/// Leakage toward one unauthorized set, in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetLeakage {
    pub set: ParticipantSet,
    /// `I(S; U_d, M, Y_U^N)`
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub status: LeakageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// `I(S; U_d, M)`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message_only: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub per_set: Vec<SetLeakage>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub error: ErrorBound,
    pub rate: RateBound,
    pub asymptotic_rate: RateBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n: usize,
    pub q: usize,
    pub blocklength: usize,
    pub l_quant: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub trials: usize,
    pub sigma2_cond: f64,
    pub rv: f64,
    pub rv_prime: f64,
    pub bins: usize,
    pub per_bin: usize,
    pub k: usize,
    pub seed_bits: usize,
    pub public_rate: f64,
    pub secret_rate: f64,
    pub encoder_fallback_rate: f64,
    /// `k − H(S)`, when the distribution of `S` could be enumerated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniformity_gap: Option<f64>,
    pub errors: Vec<SetErrorRates>,
    pub leakage: LeakageReport,
    pub bounds: BoundReport,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

/// Runs all trials and evaluates leakage, uniformity and the analytic bounds.
pub fn run_protocol(spec: &SourceSpec, structure: &AccessStructure, config: &ProtocolConfig) -> Result<MetricsReport> {
    let setup = ProtocolSetup::new(spec, structure, config)?;
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|t| setup.run_trial(t))
        .collect::<Result<Vec<_>>>()?;

    let trials = outcomes.len();
    let errors = setup
        .decoders
        .iter()
        .enumerate()
        .map(|(i, dec)| {
            let seq = outcomes.iter().filter(|o| !o.per_set[i].sequence_ok).count();
            let sec = outcomes.iter().filter(|o| !o.per_set[i].secret_ok).count();
            let blocks: usize = outcomes.iter().map(|o| o.per_set[i].block_errors).sum();
            SetErrorRates {
                set: dec.set,
                sequence_error: Proportion::wilson(seq, trials),
                secret_error: Proportion::wilson(sec, trials),
                block_error_rate: blocks as f64 / (trials * config.q) as f64,
            }
        })
        .collect();
    let fallbacks: usize = outcomes.iter().map(|o| o.encoder_fallbacks).sum();

    let big_n = config.blocklength();
    let x_states = (setup.x_levels() as f64).powi(big_n as i32);
    let s_states = x_states * (setup.seed_bits as f64).exp2();
    let binary = setup.source.sizes().iter().all(|&s| s == 2);
    let want_exact = match config.leakage {
        LeakageMode::Off => false,
        LeakageMode::Exact => true,
        LeakageMode::Auto => big_n <= 8 && binary,
    };
    let leakage = if want_exact {
        match exact_leakage(&setup) {
            Ok(l) => l,
            Err(e @ Error::BudgetExceeded { .. }) if config.leakage == LeakageMode::Auto => {
                not_computed(format!("exact enumeration skipped: {e}"))
            }
            Err(e) => return Err(e),
        }
    } else if config.leakage == LeakageMode::Off {
        not_computed("leakage evaluation disabled".into())
    } else {
        not_computed("exact enumeration needs n q <= 8 and binary alphabets".into())
    };
    let uniformity_gap = if s_states <= config.budget as f64 {
        Some(uniformity_gap(&secret_distribution(&setup)?, setup.k))
    } else {
        None
    };

    let error = error_bound(&ErrorBoundInput::from_source(
        &setup.source,
        structure,
        config.n,
        config.epsilon,
    ))?;
    let rate = achievable_rate_bound(&setup.source, structure, config.n, config.q, config.epsilon, false)?;
    let asymptotic_rate = achievable_rate_bound(&setup.source, structure, config.n, config.q, config.epsilon, true)?;

    Ok(MetricsReport {
        n: config.n,
        q: config.q,
        blocklength: big_n,
        l_quant: config.l_quant,
        epsilon: config.epsilon,
        seed: config.seed,
        trials,
        sigma2_cond: setup.sigma2_cond,
        rv: setup.rv,
        rv_prime: setup.rv_prime,
        bins: setup.codebook.bins,
        per_bin: setup.codebook.per_bin,
        k: setup.k,
        seed_bits: setup.seed_bits,
        public_rate: setup.public_rate(),
        secret_rate: setup.k as f64 / big_n as f64,
        encoder_fallback_rate: fallbacks as f64 / (trials * config.q) as f64,
        uniformity_gap,
        errors,
        leakage,
        bounds: BoundReport {
            error,
            rate,
            asymptotic_rate,
        },
        outcomes,
    })
}

fn not_computed(note: String) -> LeakageReport {
    LeakageReport {
        status: LeakageStatus::NotComputed,
        note: Some(note),
        message_only: None,
        max: None,
        per_set: Vec::new(),
    }
}

/// `k − H(S)`, clamped at zero against rounding.
pub fn uniformity_gap(pmf: &[f64], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    (k as f64 - entropy(pmf)).max(0.0)
}

/// Calls `f(index, digits)` for every sequence of length `len` over `base`
/// letters, in lexicographic order.
fn for_each_sequence(base: usize, len: usize, mut f: impl FnMut(usize, &[u32])) {
    let mut digits = vec![0u32; len];
    let total = base.pow(len as u32);
    for idx in 0..total {
        f(idx, &digits);
        for d in (0..len).rev() {
            digits[d] += 1;
            if (digits[d] as usize) < base {
                break;
            }
            digits[d] = 0;
        }
    }
}

/// Probability of each `x^N` under the quantized marginal of `X`, plus the
/// message id and `v^N` the encoder produces for it.
struct Enumerated {
    p_x: Vec<f64>,
    message: Vec<u32>,
    secrets: Vec<Vec<u64>>,
}

fn enumerate_encoder(setup: &ProtocolSetup) -> Result<Enumerated> {
    let big_n = setup.config.blocklength();
    let p_x_letter = setup.source.marginal(&[VAR_X]).pmf;
    let lx = setup.x_levels();
    let seeds = 1usize << setup.seed_bits;
    let mut p_x = Vec::new();
    let mut message = Vec::new();
    let mut vs = Vec::new();
    let mut ids: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
    for_each_sequence(lx, big_n, |_, x| {
        p_x.push(x.iter().map(|&a| p_x_letter[a as usize]).product::<f64>());
        let (omegas, v) = setup.encode(x);
        let next = ids.len() as u32;
        message.push(*ids.entry(omegas).or_insert(next));
        vs.push(v);
    });
    let mut secrets = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let seed: Vec<bool> = (0..setup.seed_bits).map(|b| (s >> b) & 1 == 1).collect();
        secrets.push(vs.iter().map(|v| setup.secret(v, &seed)).collect::<Result<Vec<_>>>()?);
    }
    Ok(Enumerated { p_x, message, secrets })
}

fn check_budget(states: f64, budget: u64) -> Result<()> {
    if states > budget as f64 {
        return Err(Error::BudgetExceeded {
            states: if states >= u128::MAX as f64 {
                u128::MAX
            } else {
                states as u128
            },
            budget: budget as u128,
        });
    }
    Ok(())
}

fn sorted_entropy<K: Ord + Copy>(map: HashMap<K, f64>) -> f64 {
    let mut entries: Vec<(K, f64)> = map.into_iter().collect();
    entries.sort_by_key(|e| e.0);
    entropy(&entries.into_iter().map(|(_, p)| p).collect::<Vec<_>>())
}

/// Exact distribution of the secret over source sequences and hash seeds.
pub fn secret_distribution(setup: &ProtocolSetup) -> Result<Vec<f64>> {
    let big_n = setup.config.blocklength();
    let states = (setup.x_levels() as f64).powi(big_n as i32) * (setup.seed_bits as f64).exp2();
    check_budget(states, setup.config.budget)?;
    let e = enumerate_encoder(setup)?;
    Ok(secret_pmf(&e, setup.k))
}

fn secret_pmf(e: &Enumerated, k: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; 1 << k];
    let w = 1.0 / e.secrets.len() as f64;
    for per_seed in &e.secrets {
        for (s, p) in per_seed.iter().zip(&e.p_x) {
            pmf[*s as usize] += w * p;
        }
    }
    pmf
}

/// `I(S; U_d, M, Y_U^N)` for every unauthorized set by full enumeration of
/// `(x^N, y_U^N, U_d)` under the quantized joint distribution.
///
/// Because the hash seed is uniform and independent of `(M, Y_U^N)`,
/// `I(S; U_d, M, Y) = H(S) + H(M, Y) − E_seed H(S, M, Y | seed)`.
pub fn exact_leakage(setup: &ProtocolSetup) -> Result<LeakageReport> {
    let big_n = setup.config.blocklength();
    let lx = setup.x_levels();
    let levels = setup.y_levels();
    let widest = setup
        .unauthorized
        .iter()
        .map(|u| u.iter().map(|p| levels[p - 1]).product::<usize>())
        .max()
        .unwrap_or(1);
    let states = (lx as f64 * widest as f64).powi(big_n as i32) * (setup.seed_bits as f64).exp2();
    check_budget(states, setup.config.budget)?;

    if setup.k == 0 {
        return Ok(LeakageReport {
            status: LeakageStatus::Exact,
            note: None,
            message_only: Some(0.0),
            max: Some(0.0),
            per_set: setup
                .unauthorized
                .iter()
                .map(|&set| SetLeakage { set, leakage: 0.0 })
                .collect(),
        });
    }

    let e = enumerate_encoder(setup)?;
    let h_s = entropy(&secret_pmf(&e, setup.k));
    let seeds = e.secrets.len() as f64;
    let mut per_set = Vec::with_capacity(setup.unauthorized.len());
    let mut message_only = None;
    for &u in &setup.unauthorized {
        let mut vars = vec![VAR_X];
        vars.extend(u.iter().map(var_y));
        let joint = setup.source.marginal(&vars);
        let ny: usize = joint.sizes[1..].iter().product();
        // p(x^N, y^N) for every pair, x-major.
        let mut p_xy = Vec::with_capacity(e.p_x.len() * ny.pow(big_n as u32));
        for_each_sequence(lx, big_n, |_, x| {
            for_each_sequence(ny, big_n, |_, y| {
                p_xy.push(
                    x.iter()
                        .zip(y)
                        .map(|(&a, &b)| joint.pmf[a as usize * ny + b as usize])
                        .product::<f64>(),
                );
            });
        });
        let y_count = ny.pow(big_n as u32);
        let mut my: HashMap<(u32, usize), f64> = HashMap::new();
        for (xi, &m) in e.message.iter().enumerate() {
            for yi in 0..y_count {
                *my.entry((m, yi)).or_insert(0.0) += p_xy[xi * y_count + yi];
            }
        }
        let h_my = sorted_entropy(my);
        let mut h_smy = 0.0;
        for per_seed in &e.secrets {
            let mut smy: HashMap<(u32, usize, u64), f64> = HashMap::new();
            for (xi, (&m, &s)) in e.message.iter().zip(per_seed).enumerate() {
                for yi in 0..y_count {
                    *smy.entry((m, yi, s)).or_insert(0.0) += p_xy[xi * y_count + yi];
                }
            }
            h_smy += sorted_entropy(smy) / seeds;
        }
        let leakage = (h_s + h_my - h_smy).max(0.0);
        if u.is_empty() {
            message_only = Some(leakage);
        }
        per_set.push(SetLeakage { set: u, leakage });
    }
    let max = per_set.iter().map(|l| l.leakage).fold(0.0, f64::max);
    Ok(LeakageReport {
        status: LeakageStatus::Exact,
        note: None,
        message_only,
        max: Some(max),
        per_set,
    })
}
