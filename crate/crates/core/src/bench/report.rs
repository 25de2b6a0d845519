//! Run reports and the tables derived from them.
//!
//! A run directory holds `report.json` (the full [`Report`]), `rows.csv`
//! (one row per scenario and strategy), `summary.csv`, one ECDF table per
//! strategy and quantity, `manifest.json`, and `timings.csv`. Only
//! `timings.csv` depends on the host; everything else is a pure function
//! of the configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::StrategyKind;
use crate::error::{Error, Result};
use crate::stats::{ecdf, summarize, EcdfPoint, Summary};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Repeats whose tuned magnitudes spread less than this count as stable.
pub const STABLE_SD: f64 = 0.01;

const ECDF_POINTS: usize = 1000;

/// One strategy on one scenario. Stochastic strategies aggregate their
/// repeats: `true_gamma` and `evaluations` are means, and `cp`/`cs` come
/// from the first repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario_id: usize,
    pub strategy: StrategyKind,
    pub cp_f: Option<f64>,
    pub cs_f: Option<f64>,
    pub predicted_gamma: Option<f64>,
    pub true_gamma: Option<f64>,
    pub evaluations: f64,
    pub iterations: f64,
    pub feasible: bool,
    pub repeats: usize,
    pub true_gamma_median: Option<f64>,
    pub true_gamma_sd: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub scenarios: usize,
    pub failures: usize,
    /// Fraction of all scenarios with tuned `|Γin|` below the threshold;
    /// failures count as misses.
    pub compliance: f64,
    pub gamma: Option<Summary>,
    pub evaluations: Option<Summary>,
    pub gamma_ecdf: Vec<EcdfPoint>,
    pub evaluations_ecdf: Vec<EcdfPoint>,
    /// Spread over repeats, for strategies run more than once.
    pub repeat_sd: Option<Summary>,
    pub stable_fraction: Option<f64>,
    pub inference_cost_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub noise_sigma: f64,
    pub compliance_threshold: f64,
    pub scenarios: usize,
    pub repeat: usize,
    pub strategies: Vec<StrategySummary>,
    pub rows: Vec<ScenarioRow>,
}

fn nonempty(v: &[f64]) -> Option<Summary> {
    (!v.is_empty()).then(|| summarize(v))
}

impl StrategySummary {
    pub fn from_rows(
        strategy: StrategyKind,
        rows: &[&ScenarioRow],
        threshold: f64,
        inference_cost: Option<f64>,
    ) -> StrategySummary {
        let gammas: Vec<f64> = rows.iter().filter_map(|r| r.true_gamma).collect();
        let evals: Vec<f64> = rows.iter().filter(|r| r.error.is_none()).map(|r| r.evaluations).collect();
        let sds: Vec<f64> = rows.iter().filter(|r| r.repeats > 1).filter_map(|r| r.true_gamma_sd).collect();
        let compliant = gammas.iter().filter(|g| **g < threshold).count();
        let evaluations = nonempty(&evals);
        StrategySummary {
            strategy,
            scenarios: rows.len(),
            failures: rows.iter().filter(|r| r.error.is_some()).count(),
            compliance: if rows.is_empty() { 0.0 } else { compliant as f64 / rows.len() as f64 },
            gamma: nonempty(&gammas),
            gamma_ecdf: ecdf(&gammas, ECDF_POINTS),
            evaluations_ecdf: ecdf(&evals, ECDF_POINTS),
            evaluations,
            stable_fraction: (!sds.is_empty())
                .then(|| sds.iter().filter(|s| **s < STABLE_SD).count() as f64 / sds.len() as f64),
            repeat_sd: nonempty(&sds),
            inference_cost_mean: inference_cost.zip(evaluations).map(|(c, s)| c * s.mean),
        }
    }
}

impl Report {
    /// Summaries recomputed from rows, in the order strategies first appear.
    pub fn from_rows(
        rows: Vec<ScenarioRow>,
        noise_sigma: f64,
        threshold: f64,
        repeat: usize,
        inference_cost: Option<f64>,
    ) -> Report {
        let mut order: Vec<StrategyKind> = Vec::new();
        for r in &rows {
            if !order.contains(&r.strategy) {
                order.push(r.strategy);
            }
        }
        let strategies = order
            .iter()
            .map(|&k| {
                let mine: Vec<&ScenarioRow> = rows.iter().filter(|r| r.strategy == k).collect();
                StrategySummary::from_rows(k, &mine, threshold, inference_cost)
            })
            .collect();
        let scenarios = rows.iter().map(|r| r.scenario_id).collect::<std::collections::BTreeSet<_>>().len();
        Report { schema_version: REPORT_SCHEMA_VERSION, noise_sigma, compliance_threshold: threshold, scenarios, repeat, strategies, rows }
    }

    pub fn strategy(&self, kind: StrategyKind) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == kind)
    }

    /// Compliance straight from the rows, for cross-checking summaries.
    pub fn recompute_compliance(&self, kind: StrategyKind) -> Option<f64> {
        let rows: Vec<&ScenarioRow> = self.rows.iter().filter(|r| r.strategy == kind).collect();
        if rows.is_empty() {
            return None;
        }
        let hits = rows.iter().filter(|r| r.true_gamma.is_some_and(|g| g < self.compliance_threshold)).count();
        Some(hits as f64 / rows.len() as f64)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Report> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == REPORT_SCHEMA_VERSION as u64 => {}
            other => {
                return Err(Error::ReportSchema(format!(
                    "{}: schema version {other:?}, expected {REPORT_SCHEMA_VERSION}",
                    path.display()
                )))
            }
        }
        serde_json::from_value(value).map_err(|e| Error::ReportSchema(format!("{}: {e}", path.display())))
    }

    /// Writes `report.json`, `rows.csv`, `summary.csv` and the ECDF tables.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_text(&dir.join("report.json"), &serde_json::to_string_pretty(self)?)?;

        let mut rows = csv_writer(&dir.join("rows.csv"))?;
        rows.write_record([
            "scenario_id", "strategy", "cp_f", "cs_f", "predicted_gamma", "true_gamma", "evaluations", "iterations",
            "feasible", "repeats", "true_gamma_median", "true_gamma_sd", "error",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            rows.write_record([
                r.scenario_id.to_string(),
                r.strategy.name().to_string(),
                opt(r.cp_f),
                opt(r.cs_f),
                opt(r.predicted_gamma),
                opt(r.true_gamma),
                r.evaluations.to_string(),
                r.iterations.to_string(),
                r.feasible.to_string(),
                r.repeats.to_string(),
                opt(r.true_gamma_median),
                opt(r.true_gamma_sd),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        rows.flush().map_err(|e| Error::io(dir, e))?;

        let mut summary = csv_writer(&dir.join("summary.csv"))?;
        summary.write_record(STATS_HEADER).map_err(csv_err)?;
        for s in &self.strategies {
            summary.write_record(stats_record(s, self.noise_sigma)).map_err(csv_err)?;
            write_ecdf(&dir.join(format!("ecdf_gamma_{}.csv", s.strategy.name())), "true_gamma", &s.gamma_ecdf)?;
            write_ecdf(&dir.join(format!("ecdf_evaluations_{}.csv", s.strategy.name())), "evaluations", &s.evaluations_ecdf)?;
        }
        summary.flush().map_err(|e| Error::io(dir, e))
    }
}

const STATS_HEADER: [&str; 12] = [
    "strategy", "noise_sigma", "scenarios", "failures", "compliance", "gamma_mean", "gamma_median", "gamma_sd",
    "gamma_min", "gamma_max", "evaluations_mean", "stable_fraction",
];

fn stats_record(s: &StrategySummary, sigma: f64) -> Vec<String> {
    let g = s.gamma;
    vec![
        s.strategy.name().to_string(),
        sigma.to_string(),
        s.scenarios.to_string(),
        s.failures.to_string(),
        s.compliance.to_string(),
        opt(g.map(|g| g.mean)),
        opt(g.map(|g| g.median)),
        opt(g.map(|g| g.sd)),
        opt(g.map(|g| g.min)),
        opt(g.map(|g| g.max)),
        opt(s.evaluations.map(|e| e.mean)),
        opt(s.stable_fraction),
    ]
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::ReportSchema(e.to_string())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::ReportSchema(format!("{}: {e}", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_ecdf(path: &Path, name: &str, points: &[EcdfPoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([name, "fraction"]).map_err(csv_err)?;
    for p in points {
        w.write_record([p.value.to_string(), p.fraction.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Cross-report tables: `stats.csv` (one row per report and strategy),
/// `noise_sweep.csv` (compliance by strategy and noise level) and
/// `ecdf_gamma_<strategy>_sigma<σ>.csv`. Returns the noise-sweep table.
pub fn consolidate(reports: &[Report], out: impl AsRef<Path>) -> Result<BTreeMap<StrategyKind, Vec<(f64, f64)>>> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("need at least one report".into()));
    }
    for r in reports {
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::ReportSchema(format!("schema version {}, expected {REPORT_SCHEMA_VERSION}", r.schema_version)));
        }
    }
    let out = out.as_ref();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut sorted: Vec<&Report> = reports.iter().collect();
    sorted.sort_by(|a, b| a.noise_sigma.total_cmp(&b.noise_sigma));

    let mut stats = csv_writer(&out.join("stats.csv"))?;
    stats.write_record(STATS_HEADER).map_err(csv_err)?;
    let mut sweep: BTreeMap<StrategyKind, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &sorted {
        for s in &r.strategies {
            stats.write_record(stats_record(s, r.noise_sigma)).map_err(csv_err)?;
            sweep.entry(s.strategy).or_default().push((r.noise_sigma, s.compliance));
            write_ecdf(
                &out.join(format!("ecdf_gamma_{}_sigma{}.csv", s.strategy.name(), r.noise_sigma)),
                "true_gamma",
                &s.gamma_ecdf,
            )?;
        }
    }
    stats.flush().map_err(|e| Error::io(out, e))?;

    let mut w = csv_writer(&out.join("noise_sweep.csv"))?;
    w.write_record(["strategy", "noise_sigma", "compliance"]).map_err(csv_err)?;
    for (k, pts) in &sweep {
        for (sigma, c) in pts {
            w.write_record([k.name().to_string(), sigma.to_string(), c.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok(sweep)
}
