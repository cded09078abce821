use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::runner::RunRecord;

/// Floor applied to times before taking logarithms.
const TIME_FLOOR: f64 = 1e-6;

pub fn geometric_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, c), v| (s + v.ln(), c + 1));
    if count == 0 {
        f64::NAN
    } else {
        (sum / count as f64).exp()
    }
}

fn runs_of<'a>(records: &'a [RunRecord], method: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
    records.iter().filter(move |r| r.method == method)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    pub geomean_iterations: f64,
    pub geomean_wall_s: f64,
    /// `1 - geomean(method) / geomean(baseline)`, in percent.
    pub reduction_iterations_pct: f64,
    pub reduction_wall_pct: f64,
    pub wins_iterations: usize,
    pub wins_wall: usize,
    /// Pricing seconds per iteration divided by the baseline's.
    pub pricing_per_iteration_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub baseline: String,
    pub instances: usize,
    pub rows: Vec<MethodSummary>,
}

/// Per-method geometric means, reductions against `baseline`, and win counts
/// (per instance, the strictly smallest seed-geomean; ties give no win).
pub fn aggregate_report(records: &[RunRecord], baseline: &str) -> Result<Report> {
    let pairs: BTreeSet<(&str, u64)> = records.iter().map(|r| (r.instance.as_str(), r.seed)).collect();
    let have: BTreeSet<(&str, u64)> = records
        .iter()
        .filter(|r| r.method == baseline)
        .map(|r| (r.instance.as_str(), r.seed))
        .collect();
    let missing: Vec<String> = pairs
        .difference(&have)
        .map(|(i, s)| format!("{i}/seed {s}"))
        .collect();
    if !missing.is_empty() {
        return Err(BenchError::Aggregation(format!(
            "baseline {baseline} lacks runs for {}",
            missing.join(", ")
        )));
    }

    let mut methods: Vec<&str> = Vec::new();
    for r in records {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let geo_iter = |m: &str| geometric_mean(runs_of(records, m).map(|r| (r.iterations.max(1)) as f64));
    let geo_wall = |m: &str| geometric_mean(runs_of(records, m).map(|r| r.wall_s.max(TIME_FLOOR)));
    let pricing_rate = |m: &str| {
        let (p, it) = runs_of(records, m).fold((0.0, 0usize), |(p, it), r| (p + r.pricing_s, it + r.iterations));
        p / it.max(1) as f64
    };

    // per instance, per method seed-geomeans
    let mut per_instance: BTreeMap<&str, BTreeMap<&str, (f64, f64)>> = BTreeMap::new();
    for inst in pairs.iter().map(|(i, _)| *i).collect::<BTreeSet<_>>() {
        let entry = per_instance.entry(inst).or_default();
        for &m in &methods {
            let runs: Vec<&RunRecord> = runs_of(records, m).filter(|r| r.instance == inst).collect();
            if runs.is_empty() {
                continue;
            }
            entry.insert(
                m,
                (
                    geometric_mean(runs.iter().map(|r| r.iterations.max(1) as f64)),
                    geometric_mean(runs.iter().map(|r| r.wall_s.max(TIME_FLOOR))),
                ),
            );
        }
    }
    let mut wins: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for scores in per_instance.values() {
        for (pick, slot) in [(0usize, 0usize), (1, 1)] {
            let value = |v: &(f64, f64)| if pick == 0 { v.0 } else { v.1 };
            let best = scores.values().map(value).fold(f64::INFINITY, f64::min);
            let winners: Vec<&&str> = scores.iter().filter(|(_, v)| value(v) == best).map(|(m, _)| m).collect();
            if let [only] = winners[..] {
                let w = wins.entry(only).or_default();
                if slot == 0 {
                    w.0 += 1;
                } else {
                    w.1 += 1;
                }
            }
        }
    }

    let (base_iter, base_wall, base_rate) = (geo_iter(baseline), geo_wall(baseline), pricing_rate(baseline));
    let rows = methods
        .iter()
        .map(|&m| {
            let (gi, gw) = (geo_iter(m), geo_wall(m));
            let (wi, ww) = wins.get(m).copied().unwrap_or_default();
            MethodSummary {
                method: m.to_owned(),
                runs: runs_of(records, m).count(),
                geomean_iterations: gi,
                geomean_wall_s: gw,
                reduction_iterations_pct: 100.0 * (1.0 - gi / base_iter),
                reduction_wall_pct: 100.0 * (1.0 - gw / base_wall),
                wins_iterations: wi,
                wins_wall: ww,
                pricing_per_iteration_norm: if base_rate > 0.0 {
                    pricing_rate(m) / base_rate
                } else {
                    f64::NAN
                },
            }
        })
        .collect();
    Ok(Report {
        baseline: baseline.to_owned(),
        instances: per_instance.len(),
        rows,
    })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "baseline: {}   instances: {}", self.baseline, self.instances);
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>10} {:>8} {:>7} {:>10} {:>8} {:>7} {:>8}",
            "method", "runs", "iter", "%red", "win", "time_s", "%red", "win", "pricing"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>6} {:>10.1} {:>8.1} {:>7} {:>10.4} {:>8.1} {:>7} {:>8.3}",
                r.method,
                r.runs,
                r.geomean_iterations,
                r.reduction_iterations_pct,
                r.wins_iterations,
                r.geomean_wall_s,
                r.reduction_wall_pct,
                r.wins_wall,
                r.pricing_per_iteration_norm
            );
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}
