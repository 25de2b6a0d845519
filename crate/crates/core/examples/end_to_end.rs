//! The whole desk pipeline through the library API: sweep, forward model,
//! inverse model, and a scenario run over every strategy, with the report
//! written to the given directory (default `out/end_to_end`).
//!
//!     cargo run --release --example end_to_end -- out/e2e 500

use std::path::PathBuf;

use tunematch::bench::{
    inverse_datasets, run_scenarios, sweep_datasets, train_model, write_run, Manifest, Profile, RunConfig,
    REPORT_SCHEMA_VERSION,
};
use tunematch::circuit::reference_practical_circuit;
use tunematch::data::generate_scenarios;
use tunematch::matching::{NetworkSurrogate, Surrogate};
use tunematch::nn::ModelRole;

fn main() -> tunematch::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/end_to_end".into()));
    let mut cfg = RunConfig { output_dir: out.clone(), ..RunConfig::for_profile(Profile::Desk) };
    if let Some(n) = args.next() {
        cfg.scenarios = n.parse().expect("scenario count");
    }
    let c = reference_practical_circuit();

    let sweep = sweep_datasets(&cfg, &c)?;
    let (recbm, _) = train_model(ModelRole::Recbm, &cfg, &sweep.train, &c.fingerprint(), None)?;
    let inverse = inverse_datasets(&cfg, &c, &recbm)?;
    let (ims, _) = train_model(ModelRole::Ims, &cfg, &inverse.train, &c.fingerprint(), Some(&recbm))?;
    std::fs::create_dir_all(&out).expect("output directory");
    recbm.save(out.join("recbm.bin"))?;
    ims.save(out.join("ims.bin"))?;

    let surrogate = NetworkSurrogate::new(recbm, c.reference())?;
    let scenarios = generate_scenarios(&c, cfg.scenarios, cfg.seed, cfg.noise_sigma)?;
    let run = run_scenarios(&cfg, &c, &scenarios, &surrogate, Some(&ims))?;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        report_schema: REPORT_SCHEMA_VERSION,
        config_hash: cfg.hash(),
        scenario_seed: cfg.seed,
        sapso_seed: cfg.sapso.seed,
        training_seed: cfg.training.seed,
        circuit_fingerprint: c.fingerprint(),
        surrogate_fingerprint: surrogate.fingerprint().into(),
        ims_fingerprint: Some(ims.fingerprint()),
        scenario_count: scenarios.len(),
        config: cfg.clone(),
    };
    write_run(&out, &run, &manifest)?;

    println!("{:>7} {:>10} {:>8} {:>8} {:>8} {:>10}", "", "compliance", "mean", "median", "sd", "evals");
    for s in &run.report.strategies {
        let g = s.gamma.expect("some scenarios succeeded");
        let e = s.evaluations.expect("some scenarios succeeded");
        println!("{:>7} {:>10.4} {:>8.4} {:>8.4} {:>8.4} {:>10.1}", s.strategy.name(), s.compliance, g.mean, g.median, g.sd, e.mean);
    }
    println!("report written to {}", out.display());
    Ok(())
}
