//! Run configuration: a versioned TOML document.
//!
//! ```toml
//! version = 1
//!
//! [source]
//! sigma2_x = 2.0
//! gains = [0.5, 1.0, 0.8]
//!
//! [access]
//! minimal_sets = [[1, 2], [2, 3]]
//!
//! [rp]
//! min = 0.0
//! max = 5.0
//! points = 500
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use gauss_share::access::AccessStructure;
use gauss_share::capacity::{linear_grid, PublicRate, DEFAULT_GRID_SIZE};
use gauss_share::sets::ParticipantSet;
use gauss_share::sim::ProtocolConfig;
use gauss_share::source::SourceSpec;
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;
use crate::output::Format;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: Spanned<i64>,
    source: Spanned<SourceBlock>,
    access: Option<Spanned<AccessBlock>>,
    rp: Option<Spanned<RpBlock>>,
    sim: Option<Spanned<ProtocolConfig>>,
    oracle: Option<Spanned<OracleBlock>>,
    output: Option<OutputBlock>,
}

/// Either `sigma2_x` with `gains`, or a full `covariance` of `(X, Y_1..Y_L)`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceBlock {
    sigma2_x: Option<f64>,
    gains: Option<Vec<f64>>,
    covariance: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AccessBlock {
    participants: Option<usize>,
    minimal_sets: Option<Vec<Vec<usize>>>,
    threshold: Option<usize>,
    threshold_sweep: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RpBlock {
    value: Option<f64>,
    infinity: Option<bool>,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleBlock {
    grid_size: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputBlock {
    format: Option<Format>,
    path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Access {
    Structure(AccessStructure),
    ThresholdSweep,
}

/// Public-rate values requested by the `[rp]` block.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSpec {
    Infinite,
    Grid(Vec<f64>),
}

impl RateSpec {
    pub fn rates(&self) -> Vec<PublicRate> {
        match self {
            RateSpec::Infinite => vec![PublicRate::Infinite],
            RateSpec::Grid(g) => g.iter().map(|&r| PublicRate::Finite(r)).collect(),
        }
    }
}

/// A validated configuration. Every field has passed its domain checks.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub origin: String,
    pub source: SourceSpec,
    pub access: Option<Access>,
    pub rp: Option<RateSpec>,
    pub sim: ProtocolConfig,
    pub oracle_grid: usize,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    text: String,
    access_span: Option<Range<usize>>,
    rp_span: Option<Range<usize>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let anchor = |span: Option<Range<usize>>, message: String| CliError::anchored(origin, text, span, message);
        let raw: RawConfig = toml::from_str(text).map_err(|e| anchor(e.span(), e.message().to_string()))?;

        if *raw.version.get_ref() != SCHEMA_VERSION {
            return Err(anchor(
                Some(raw.version.span()),
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    raw.version.get_ref()
                ),
            ));
        }

        let source_span = raw.source.span();
        let source = build_source(raw.source.into_inner()).map_err(|m| anchor(Some(source_span.clone()), m))?;
        let l = source.participants();

        let access_span = raw.access.as_ref().map(|a| a.span());
        let access = raw
            .access
            .map(|a| {
                let span = a.span();
                build_access(a.into_inner(), l).map_err(|m| anchor(Some(span), m))
            })
            .transpose()?;

        let rp_span = raw.rp.as_ref().map(|r| r.span());
        let rp = raw
            .rp
            .map(|r| {
                let span = r.span();
                build_rates(r.into_inner()).map_err(|m| anchor(Some(span), m))
            })
            .transpose()?;

        let sim = match raw.sim {
            Some(s) => {
                let span = s.span();
                let sim = s.into_inner();
                sim.validate().map_err(|e| anchor(Some(span), e.to_string()))?;
                sim
            }
            None => ProtocolConfig::default(),
        };

        let oracle_grid = match raw.oracle {
            Some(o) if o.get_ref().grid_size < 100 => {
                return Err(anchor(Some(o.span()), "oracle grid_size must be at least 100".into()));
            }
            Some(o) => o.into_inner().grid_size,
            None => DEFAULT_GRID_SIZE,
        };

        let output = raw.output.unwrap_or_default();
        Ok(RunConfig {
            origin: origin.to_string(),
            source,
            access,
            rp,
            sim,
            oracle_grid,
            format: output.format,
            out: output.path,
            text: text.to_string(),
            access_span,
            rp_span,
        })
    }

    /// The access structure, rejecting a missing block or a sweep.
    pub fn structure(&self) -> Result<&AccessStructure, CliError> {
        match &self.access {
            Some(Access::Structure(s)) => Ok(s),
            Some(Access::ThresholdSweep) => {
                Err(self.access_error("threshold_sweep is only valid for the threshold command"))
            }
            None => Err(self.missing("access")),
        }
    }

    /// The threshold command accepts no access block or a sweep.
    pub fn require_sweep(&self) -> Result<(), CliError> {
        match &self.access {
            None | Some(Access::ThresholdSweep) => Ok(()),
            Some(Access::Structure(_)) => Err(self.access_error("the threshold command takes threshold_sweep = true")),
        }
    }

    pub fn rates(&self) -> Result<&RateSpec, CliError> {
        self.rp.as_ref().ok_or_else(|| self.missing("rp"))
    }

    /// A finite grid, as needed by region sweeps.
    pub fn grid(&self) -> Result<&[f64], CliError> {
        match self.rates()? {
            RateSpec::Grid(g) => Ok(g),
            RateSpec::Infinite => Err(CliError::anchored(
                &self.origin,
                &self.text,
                self.rp_span.clone(),
                "a region sweep needs a finite grid".into(),
            )),
        }
    }

    fn access_error(&self, message: &str) -> CliError {
        CliError::anchored(&self.origin, &self.text, self.access_span.clone(), message.into())
    }

    fn missing(&self, block: &str) -> CliError {
        CliError::anchored(&self.origin, &self.text, None, format!("missing [{block}] block"))
    }
}

fn build_source(b: SourceBlock) -> Result<SourceSpec, String> {
    let spec = match (b.sigma2_x, b.gains, b.covariance) {
        (Some(s2), Some(g), None) => SourceSpec::from_gains(s2, g),
        (None, None, Some(c)) => SourceSpec::from_covariance(&c),
        _ => return Err("source needs either sigma2_x with gains, or covariance".into()),
    };
    spec.map_err(|e| e.to_string())
}

fn build_access(b: AccessBlock, l: usize) -> Result<Access, String> {
    if let Some(p) = b.participants {
        if p != l {
            return Err(format!("access declares {p} participants, the source has {l}"));
        }
    }
    let forms = [
        b.minimal_sets.is_some(),
        b.threshold.is_some(),
        b.threshold_sweep.is_some(),
    ];
    if forms.iter().filter(|&&f| f).count() != 1 {
        return Err("access needs exactly one of minimal_sets, threshold or threshold_sweep".into());
    }
    let structure = if let Some(sets) = b.minimal_sets {
        let gens = sets
            .iter()
            .map(|m| ParticipantSet::from_members(m, l))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        AccessStructure::monotone_closure(l, &gens)
    } else if let Some(t) = b.threshold {
        AccessStructure::threshold(l, t)
    } else if b.threshold_sweep == Some(true) {
        return Ok(Access::ThresholdSweep);
    } else {
        return Err("threshold_sweep must be true when given".into());
    };
    structure.map(Access::Structure).map_err(|e| e.to_string())
}

fn build_rates(b: RpBlock) -> Result<RateSpec, String> {
    let grid = b.min.is_some() || b.max.is_some() || b.points.is_some();
    let forms = [b.value.is_some(), b.infinity == Some(true), grid];
    if forms.iter().filter(|&&f| f).count() != 1 {
        return Err("rp needs exactly one of value, infinity = true, or min/max/points".into());
    }
    if let Some(v) = b.value {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(format!("rp value must be finite and nonnegative, got {v}"));
        }
        return Ok(RateSpec::Grid(vec![v]));
    }
    if b.infinity == Some(true) {
        return Ok(RateSpec::Infinite);
    }
    let (Some(min), Some(max), Some(points)) = (b.min, b.max, b.points) else {
        return Err("rp grid needs min, max and points".into());
    };
    if !(min >= 0.0) || !max.is_finite() || points < 1 {
        return Err("rp grid needs min >= 0, finite max and points >= 1".into());
    }
    if points == 1 {
        return Ok(RateSpec::Grid(vec![min]));
    }
    if !(max > min) {
        return Err(format!("rp grid needs max > min, got [{min}, {max}]"));
    }
    Ok(RateSpec::Grid(linear_grid(min, max, points)))
}
