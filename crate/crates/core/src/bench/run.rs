use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, StrategyKind};
use super::report::{write_text, Report, ScenarioRow, REPORT_SCHEMA_VERSION};
use crate::circuit::CircuitTopology;
use crate::data::{Scenario, ScenarioSuite};
use crate::error::{Error, Result};
use crate::matching::{
    adadam_match, grid_search_match, ideal_analytic_match, ims_match, recover_load_reflection, sapso_match, Counted,
    MatchBox, MatchResult, NetworkSurrogate, OracleSurrogate, Surrogate,
};
use crate::nn::MlpModel;
use crate::stats::summarize;

/// Host-dependent wall time, kept out of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub scenario_id: usize,
    pub strategy: StrategyKind,
    pub wall_time_s: f64,
}

/// What is needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub report_schema: u32,
    pub config_hash: String,
    pub scenario_seed: u64,
    pub sapso_seed: u64,
    pub training_seed: u64,
    pub circuit_fingerprint: String,
    pub surrogate_fingerprint: String,
    pub ims_fingerprint: Option<String>,
    pub scenario_count: usize,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub timings: Vec<Timing>,
}

fn error_row(id: usize, k: StrategyKind, e: &Error) -> ScenarioRow {
    ScenarioRow {
        scenario_id: id,
        strategy: k,
        cp_f: None,
        cs_f: None,
        predicted_gamma: None,
        true_gamma: None,
        evaluations: 0.0,
        iterations: 0.0,
        feasible: false,
        repeats: 0,
        true_gamma_median: None,
        true_gamma_sd: None,
        error: Some(e.to_string()),
    }
}

/// Folds the repeats of one strategy on one scenario into a row. Every
/// result must already be scored. `extra` evaluations (load recovery) are
/// added to each repeat.
fn result_row(id: usize, k: StrategyKind, results: &[MatchResult], extra: u64) -> ScenarioRow {
    let gammas: Vec<f64> = results.iter().map(|r| r.true_gamma.expect("scored")).collect();
    let stats = summarize(&gammas);
    let n = results.len() as f64;
    let first = &results[0];
    let finite = |v: f64| v.is_finite().then_some(v);
    ScenarioRow {
        scenario_id: id,
        strategy: k,
        cp_f: Some(first.cp),
        cs_f: Some(first.cs),
        predicted_gamma: finite(results.iter().map(|r| r.predicted_gamma).sum::<f64>() / n),
        true_gamma: Some(stats.mean),
        evaluations: results.iter().map(|r| (r.evaluations + extra) as f64).sum::<f64>() / n,
        iterations: results.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
        feasible: results.iter().all(|r| r.feasible),
        repeats: results.len(),
        true_gamma_median: Some(stats.median),
        true_gamma_sd: Some(stats.sd),
        error: None,
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    topology: &'a CircuitTopology,
    ideal: CircuitTopology,
    bounds: MatchBox,
    surrogate: &'a dyn Surrogate,
    ims: Option<&'a MlpModel>,
}

impl Context<'_> {
    fn one(&self, sc: &Scenario) -> Vec<(ScenarioRow, f64)> {
        let cfg = self.cfg;
        let mut counter = Counted::new(self.surrogate);
        let gl_hat = recover_load_reflection(&mut counter, sc.f, (sc.cp_now, sc.cs_now), sc.gin());
        let recovery_cost = counter.evaluations();
        let score = |mut r: MatchResult| {
            r.score(self.topology, sc.f, sc.gl());
            r
        };
        let mut out = Vec::with_capacity(cfg.strategies.len());
        for &k in &cfg.strategies {
            let start = std::time::Instant::now();
            let row = if k == StrategyKind::Ideal {
                let ideal = OracleSurrogate::new(self.ideal.clone());
                let mut c = Counted::new(&ideal);
                match recover_load_reflection(&mut c, sc.f, (sc.cp_now, sc.cs_now), sc.gin()) {
                    Ok(gl) => {
                        let r = ideal_analytic_match(gl, sc.f, self.topology.reference(), self.bounds, (sc.cp_now, sc.cs_now));
                        result_row(sc.id, k, &[score(r)], c.evaluations())
                    }
                    Err(e) => error_row(sc.id, k, &e),
                }
            } else {
                let results: Result<Vec<MatchResult>> = gl_hat.as_ref().map_err(clone_err).and_then(|&gl| match k {
                    StrategyKind::Sapso => (0..cfg.repeat)
                        .map(|rep| {
                            let mut rng = ChaCha8Rng::seed_from_u64(cfg.sapso.seed);
                            rng.set_stream(((sc.id as u64) << 10) | rep as u64);
                            let sapso = crate::matching::SapsoConfig { bounds: self.bounds, ..cfg.sapso };
                            sapso_match(self.surrogate, sc.f, gl, &sapso, &mut rng).map(score)
                        })
                        .collect(),
                    StrategyKind::Adadam => {
                        let a = crate::matching::AdamMatchConfig { bounds: self.bounds, ..cfg.adadam };
                        adadam_match(self.surrogate, sc.f, gl, &a).map(|r| vec![score(r)])
                    }
                    StrategyKind::Grid => grid_search_match(self.surrogate, sc.f, gl, cfg.grid_step_pf * 1e-12, self.bounds)
                        .map(|r| vec![score(r)]),
                    StrategyKind::Ims => {
                        let ims = self.ims.expect("checked before the run");
                        ims_match(self.surrogate, ims, sc.f, gl, self.bounds).map(|r| vec![score(r)])
                    }
                    StrategyKind::Ideal => unreachable!(),
                });
                match results {
                    Ok(rs) => result_row(sc.id, k, &rs, recovery_cost),
                    Err(e) => error_row(sc.id, k, &e),
                }
            };
            out.push((row, start.elapsed().as_secs_f64()));
        }
        out
    }
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidArgument(format!("load recovery failed: {e}"))
}

/// Runs every selected strategy on every scenario and scores the answers
/// on the exact circuit. Per-scenario failures become error rows; the run
/// continues.
pub fn run_scenarios(
    cfg: &RunConfig,
    topology: &CircuitTopology,
    scenarios: &[Scenario],
    surrogate: &dyn Surrogate,
    ims: Option<&MlpModel>,
) -> Result<RunOutput> {
    if cfg.strategies.contains(&StrategyKind::Ims) {
        let Some(m) = ims else {
            return Err(Error::Validation("the ims strategy needs an ims model".into()));
        };
        if m.paired_fingerprint() != Some(surrogate.fingerprint()) {
            return Err(Error::FingerprintMismatch {
                expected: surrogate.fingerprint().to_string(),
                actual: m.paired_fingerprint().unwrap_or("<none>").to_string(),
            });
        }
    }
    let ctx = Context {
        cfg,
        topology,
        ideal: topology.strip_parasitics(),
        bounds: MatchBox::from_topology(topology),
        surrogate,
        ims,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start workers: {e}")))?;
    let per_scenario: Vec<Vec<(ScenarioRow, f64)>> = pool.install(|| scenarios.par_iter().map(|sc| ctx.one(sc)).collect());

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for (row, t) in per_scenario.into_iter().flatten() {
        timings.push(Timing { scenario_id: row.scenario_id, strategy: row.strategy, wall_time_s: t });
        rows.push(row);
    }
    // Group by strategy, then scenario id.
    let rank = |k: StrategyKind| cfg.strategies.iter().position(|s| *s == k).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (rank(r.strategy), r.scenario_id));
    let sigma = scenarios.first().map_or(cfg.noise_sigma, |s| s.noise_sigma);
    let report = Report::from_rows(rows, sigma, cfg.compliance_threshold, cfg.repeat, cfg.inference_cost);
    Ok(RunOutput { report, timings })
}

/// Loads whatever the configuration points at and runs it, writing the
/// report, manifest and timings under `cfg.output_dir`.
pub fn execute_run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let topology = cfg.topology()?;
    let suite = match &cfg.scenario_file {
        Some(p) => {
            let s = ScenarioSuite::load(p)?;
            if s.circuit_fingerprint != topology.fingerprint() {
                return Err(Error::FingerprintMismatch { expected: topology.fingerprint(), actual: s.circuit_fingerprint });
            }
            s
        }
        None => ScenarioSuite::generate(&topology, cfg.scenarios, cfg.seed, cfg.noise_sigma)?,
    };
    let oracle;
    let network;
    let surrogate: &dyn Surrogate = match &cfg.recbm_model {
        Some(p) => {
            network = NetworkSurrogate::new(MlpModel::load(p)?, topology.reference())?;
            &network
        }
        None => {
            oracle = OracleSurrogate::new(topology.clone());
            &oracle
        }
    };
    let ims = match &cfg.ims_model {
        Some(p) => Some(MlpModel::load(p)?),
        None => None,
    };
    let out = run_scenarios(cfg, &topology, &suite.scenarios, surrogate, ims.as_ref())?;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        report_schema: REPORT_SCHEMA_VERSION,
        config_hash: cfg.hash(),
        scenario_seed: suite.seed,
        sapso_seed: cfg.sapso.seed,
        training_seed: cfg.training.seed,
        circuit_fingerprint: topology.fingerprint(),
        surrogate_fingerprint: surrogate.fingerprint().to_string(),
        ims_fingerprint: ims.as_ref().map(|m| m.fingerprint()),
        scenario_count: suite.scenarios.len(),
        config: cfg.clone(),
    };
    write_run(&cfg.output_dir, &out, &manifest)?;
    Ok(out)
}

pub fn write_run(dir: &Path, out: &RunOutput, manifest: &Manifest) -> Result<()> {
    out.report.write(dir)?;
    write_text(&dir.join("manifest.json"), &serde_json::to_string_pretty(manifest)?)?;
    let mut text = String::from("scenario_id,strategy,wall_time_s\n");
    for t in &out.timings {
        text.push_str(&format!("{},{},{}\n", t.scenario_id, t.strategy.name(), t.wall_time_s));
    }
    write_text(&dir.join("timings.csv"), &text)
}
