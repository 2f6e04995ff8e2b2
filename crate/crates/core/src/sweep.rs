//! Batch runs over one scenario axis, and the CSV / .dat writers.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::metrics::{compute_rates, mean_std, RunMetrics};
use crate::sim::{run_scenario, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    NUavs,
    MaliciousFraction,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown axis `{0}` (expected n_uavs or malicious_fraction)")]
pub struct UnknownAxis(String);

impl FromStr for Axis {
    type Err = UnknownAxis;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n_uavs" => Ok(Axis::NUavs),
            "malicious_fraction" => Ok(Axis::MaliciousFraction),
            other => Err(UnknownAxis(other.to_string())),
        }
    }
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::NUavs => "n_uavs",
            Axis::MaliciousFraction => "malicious_fraction",
        }
    }

    /// Copy of `base` with this axis set to `v`.
    pub fn apply(self, base: &ScenarioConfig, v: f64) -> ScenarioConfig {
        let mut c = base.clone();
        match self {
            Axis::NUavs => c.scenario.n_uavs = v.round() as usize,
            Axis::MaliciousFraction => c.adversary.fraction = v,
        }
        c
    }
}

/// Mean and sample standard deviation over the runs where the value is
/// defined. `n` counts those runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n: usize,
}

impl Stat {
    pub fn of(xs: impl IntoIterator<Item = Option<f64>>) -> Self {
        let v: Vec<f64> = xs.into_iter().flatten().collect();
        if v.is_empty() {
            return Stat {
                mean: None,
                std: None,
                n: 0,
            };
        }
        let (m, s) = mean_std(&v);
        Stat {
            mean: Some(m),
            std: Some(s),
            n: v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub dr: Stat,
    pub fp: Stat,
    #[serde(rename = "fn")]
    pub fn_: Stat,
    pub pdr: Stat,
    pub re: Stat,
    pub comment_requests: Stat,
    pub runs: Vec<RunMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: Axis,
    pub repeats: u32,
    pub rows: Vec<SweepRow>,
}

pub fn summarize(value: f64, runs: Vec<RunMetrics>) -> SweepRow {
    let rates: Vec<_> = runs.iter().map(|r| compute_rates(&r.confusion)).collect();
    SweepRow {
        value,
        dr: Stat::of(rates.iter().map(|r| r.dr)),
        fp: Stat::of(rates.iter().map(|r| r.fp_rate)),
        fn_: Stat::of(rates.iter().map(|r| r.fn_rate)),
        pdr: Stat::of(runs.iter().map(|r| r.pdr())),
        re: Stat::of(runs.iter().map(|r| Some(r.re))),
        comment_requests: Stat::of(runs.iter().map(|r| Some(r.comment_requests as f64))),
        runs,
    }
}

/// Runs `repeats` seeds (base seed, base seed + 1, ...) per axis value, in
/// parallel. Rows come back sorted by value.
pub fn sweep(base: &ScenarioConfig, axis: Axis, values: &[f64], repeats: u32) -> Result<SweepTable, SimError> {
    let jobs: Vec<(usize, u32)> = (0..values.len()).flat_map(|i| (0..repeats).map(move |r| (i, r))).collect();
    let results: Vec<((usize, u32), RunMetrics)> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let mut cfg = axis.apply(base, values[i]);
            cfg.scenario.seed = base.scenario.seed.wrapping_add(r as u64);
            run_scenario(&cfg, false).map(|o| ((i, r), o.metrics))
        })
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<SweepRow> = (0..values.len())
        .map(|i| {
            let mut runs: Vec<_> = results.iter().filter(|((j, _), _)| *j == i).collect();
            runs.sort_by_key(|((_, r), _)| *r);
            summarize(values[i], runs.into_iter().map(|(_, m)| m.clone()).collect())
        })
        .collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(SweepTable { axis, repeats, rows })
}

fn cell(x: Option<f64>, missing: &str) -> String {
    match x {
        Some(v) => format!("{v:.4}"),
        None => missing.to_string(),
    }
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "dr", "fp", "fn", "pdr", "re", "dr_std", "fp_std", "fn_std", "pdr_std", "re_std", "comment_requests", "runs",
];

fn row_cells(r: &SweepRow, missing: &str) -> Vec<String> {
    vec![
        cell(r.dr.mean, missing),
        cell(r.fp.mean, missing),
        cell(r.fn_.mean, missing),
        cell(r.pdr.mean, missing),
        cell(r.re.mean, missing),
        cell(r.dr.std, missing),
        cell(r.fp.std, missing),
        cell(r.fn_.std, missing),
        cell(r.pdr.std, missing),
        cell(r.re.std, missing),
        cell(r.comment_requests.mean, missing),
        r.runs.len().to_string(),
    ]
}

fn axis_value(axis: Axis, v: f64) -> String {
    match axis {
        Axis::NUavs => format!("{}", v.round() as u64),
        Axis::MaliciousFraction => format!("{v:.4}"),
    }
}

/// Undefined rates are written as empty cells.
pub fn sweep_csv(t: &SweepTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{},{}", t.axis.name(), SWEEP_COLUMNS.join(","));
    for r in &t.rows {
        let _ = writeln!(s, "{},{}", axis_value(t.axis, r.value), row_cells(r, "").join(","));
    }
    s
}

/// Whitespace-separated, `#` header, NaN for undefined rates.
pub fn sweep_dat(t: &SweepTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} {}", t.axis.name(), SWEEP_COLUMNS.join(" "));
    for r in &t.rows {
        let _ = writeln!(s, "{} {}", axis_value(t.axis, r.value), row_cells(r, "NaN").join(" "));
    }
    s
}

pub const RUN_COLUMNS: [&str; 21] = [
    "seed",
    "n_uavs",
    "malicious",
    "sent",
    "delivered",
    "pdr",
    "tp",
    "fp",
    "fn",
    "tn",
    "dr",
    "fp_rate",
    "fn_rate",
    "re",
    "comment_requests",
    "warnings",
    "agent_handshakes",
    "agents_lost",
    "deaths",
    "route_violations",
    "events",
];

pub fn runs_csv(runs: &[RunMetrics]) -> String {
    let mut s = RUN_COLUMNS.join(",");
    s.push('\n');
    for m in runs {
        let r = compute_rates(&m.confusion);
        let c = &m.confusion;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.4},{},{},{},{},{},{},{}",
            m.seed,
            m.n_uavs,
            m.malicious,
            m.sent,
            m.delivered,
            cell(m.pdr(), ""),
            c.tp,
            c.fp,
            c.fn_,
            c.tn,
            cell(r.dr, ""),
            cell(r.fp_rate, ""),
            cell(r.fn_rate, ""),
            m.re,
            m.comment_requests,
            m.warnings,
            m.agent_handshakes,
            m.agents_lost,
            m.deaths,
            m.route_violations,
            m.events
        );
    }
    s
}
