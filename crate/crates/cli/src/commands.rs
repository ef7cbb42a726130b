use std::io::Write;

use gauss_share::access::AccessStructure;
use gauss_share::capacity::{
    minimax_oracle, rate_region, secret_capacity, threshold_comparisons, CapacityPoint, OracleReport, PublicRate,
    ThresholdComparison,
};
use gauss_share::sim::protocol::LeakageStatus;
use gauss_share::sim::run_protocol;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{opt_real, rate, real, write_csv, write_text, Format};

pub const CAPACITY_HEADER: [&str; 5] = ["rp", "cs", "sigma2_star", "a_star", "u_star"];
pub const REGION_HEADER: [&str; 6] = ["rp", "cs", "sigma2_star", "a_star", "u_star", "cs_infinity"];
pub const THRESHOLD_HEADER: [&str; 10] = [
    "kind",
    "t",
    "i",
    "rp",
    "cs",
    "cs_t_plus_i",
    "lhs",
    "rhs",
    "verdict",
    "method",
];
pub const TRIAL_HEADER: [&str; 7] = [
    "trial",
    "set",
    "sequence_ok",
    "secret_ok",
    "block_errors",
    "encoder_fallbacks",
    "leakage_mode",
];
pub const ORACLE_HEADER: [&str; 7] = [
    "rp",
    "min_min_max",
    "max_min_min",
    "clamped",
    "closed_form",
    "saddle_gap",
    "closed_form_gap",
];

fn point_row(p: &CapacityPoint) -> Vec<String> {
    vec![
        rate(p.rp),
        real(p.cs),
        opt_real(p.sigma2_star),
        p.extremal.a_star.to_string(),
        p.extremal.u_star.to_string(),
    ]
}

#[derive(Serialize)]
struct Points<'a> {
    points: &'a [CapacityPoint],
}

pub fn capacity<W: Write>(cfg: &RunConfig, format: Format, out: W) -> Result<(), CliError> {
    let structure = cfg.structure()?;
    let points = cfg
        .rates()?
        .rates()
        .into_iter()
        .map(|rp| secret_capacity(&cfg.source, structure, rp))
        .collect::<Result<Vec<_>, _>>()?;
    match format {
        Format::Csv => write_csv(out, &CAPACITY_HEADER, &points.iter().map(point_row).collect::<Vec<_>>()),
        Format::Text => write_text(out, &Points { points: &points }),
    }
}

#[derive(Serialize)]
struct Region<'a> {
    cs_infinity: f64,
    points: &'a [CapacityPoint],
}

/// Sweep rows, then a final `rp = inf` row carrying `cs_infinity`.
pub fn region<W: Write>(cfg: &RunConfig, format: Format, out: W) -> Result<(), CliError> {
    let structure = cfg.structure()?;
    let region = rate_region(&cfg.source, structure, cfg.grid()?)?;
    match format {
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = region
                .points
                .iter()
                .map(|p| {
                    let mut row = point_row(p);
                    row.push(String::new());
                    row
                })
                .collect();
            let tail = secret_capacity(&cfg.source, structure, PublicRate::Infinite)?;
            let mut last = point_row(&tail);
            last.push(real(region.cs_infinity));
            rows.push(last);
            write_csv(out, &REGION_HEADER, &rows)
        }
        Format::Text => write_text(
            out,
            &Region {
                cs_infinity: region.cs_infinity,
                points: &region.points,
            },
        ),
    }
}

#[derive(Serialize)]
struct ThresholdRow {
    t: usize,
    rp: PublicRate,
    cs: f64,
}

#[derive(Serialize)]
struct ThresholdTable {
    capacities: Vec<ThresholdRow>,
    verdicts: Vec<ThresholdComparison>,
}

/// Capacity of every threshold structure, followed by all pairwise verdicts.
pub fn threshold<W: Write>(cfg: &RunConfig, format: Format, out: W) -> Result<(), CliError> {
    cfg.require_sweep()?;
    let l = cfg.source.participants();
    let structures = (1..=l)
        .map(|t| AccessStructure::threshold(l, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ThresholdTable {
        capacities: Vec::new(),
        verdicts: Vec::new(),
    };
    for rp in cfg.rates()?.rates() {
        for (t, s) in (1..=l).zip(&structures) {
            let cs = secret_capacity(&cfg.source, s, rp)?.cs;
            table.capacities.push(ThresholdRow { t, rp, cs });
        }
        table.verdicts.extend(threshold_comparisons(&cfg.source, rp)?);
    }
    match format {
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = table
                .capacities
                .iter()
                .map(|r| {
                    let mut row = vec![String::new(); THRESHOLD_HEADER.len()];
                    row[0] = "capacity".into();
                    row[1] = r.t.to_string();
                    row[3] = rate(r.rp);
                    row[4] = real(r.cs);
                    row
                })
                .collect();
            rows.extend(table.verdicts.iter().map(|v| {
                vec![
                    "verdict".into(),
                    v.t.to_string(),
                    v.i.to_string(),
                    rate(v.rp),
                    real(v.cs_t),
                    real(v.cs_t_plus_i),
                    opt_real(v.lhs),
                    real(v.rhs),
                    v.verdict.to_string(),
                    format!("{:?}", v.method).to_lowercase(),
                ]
            }));
            write_csv(out, &THRESHOLD_HEADER, &rows)
        }
        Format::Text => write_text(out, &table),
    }
}

/// Text emits the metrics report; CSV emits one row per trial and authorized set.
pub fn simulate<W: Write>(cfg: &RunConfig, seed: Option<u64>, format: Format, out: W) -> Result<(), CliError> {
    let structure = cfg.structure()?;
    let mut sim = cfg.sim.clone();
    if let Some(seed) = seed {
        sim.seed = seed;
    }
    let report = run_protocol(&cfg.source, structure, &sim)?;
    match format {
        Format::Text => write_text(out, &report),
        Format::Csv => {
            let mode = match report.leakage.status {
                LeakageStatus::Exact => "exact",
                LeakageStatus::NotComputed => "not_computed",
            };
            let rows: Vec<Vec<String>> = report
                .outcomes
                .iter()
                .flat_map(|t| {
                    t.per_set.iter().map(move |s| {
                        vec![
                            t.trial.to_string(),
                            s.set.to_string(),
                            s.sequence_ok.to_string(),
                            s.secret_ok.to_string(),
                            s.block_errors.to_string(),
                            t.encoder_fallbacks.to_string(),
                            mode.to_string(),
                        ]
                    })
                })
                .collect();
            write_csv(out, &TRIAL_HEADER, &rows)
        }
    }
}

#[derive(Serialize)]
struct OracleTable<'a> {
    reports: &'a [OracleReport],
}

pub fn oracle<W: Write>(cfg: &RunConfig, format: Format, out: W) -> Result<(), CliError> {
    let structure = cfg.structure()?;
    let reports = cfg
        .rates()?
        .rates()
        .into_iter()
        .map(|rp| minimax_oracle(&cfg.source, structure, rp, cfg.oracle_grid))
        .collect::<Result<Vec<_>, _>>()?;
    match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        rate(r.rp),
                        real(r.min_min_max),
                        real(r.max_min_min),
                        real(r.clamped),
                        real(r.closed_form),
                        real(r.saddle_gap),
                        real(r.closed_form_gap),
                    ]
                })
                .collect();
            write_csv(out, &ORACLE_HEADER, &rows)
        }
        Format::Text => write_text(out, &OracleTable { reports: &reports }),
    }
}
