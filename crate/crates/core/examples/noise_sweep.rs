//! Compliance against measurement noise with the exact circuit as the
//! surrogate. Scenarios are shared across noise levels, so only the noise
//! differs between columns.
//!
//!     cargo run --release --example noise_sweep

use tunematch::bench::{consolidate, run_scenarios, Profile, RunConfig, StrategyKind};
use tunematch::circuit::reference_practical_circuit;
use tunematch::data::{generate_scenarios, NOISE_PRESETS};
use tunematch::matching::OracleSurrogate;

fn main() -> tunematch::Result<()> {
    let c = reference_practical_circuit();
    let oracle = OracleSurrogate::new(c.clone());
    let cfg = RunConfig {
        scenarios: 100,
        repeat: 2,
        strategies: vec![StrategyKind::Sapso, StrategyKind::Adadam, StrategyKind::Grid, StrategyKind::Ideal],
        // A tighter threshold makes the small noise levels visible.
        compliance_threshold: 0.01,
        ..RunConfig::for_profile(Profile::Desk)
    };
    let mut reports = Vec::new();
    for sigma in NOISE_PRESETS {
        let scenarios = generate_scenarios(&c, cfg.scenarios, cfg.seed, sigma)?;
        reports.push(run_scenarios(&cfg, &c, &scenarios, &oracle, None)?.report);
    }
    let dir = std::env::temp_dir().join("tunematch_noise_sweep");
    let table = consolidate(&reports, &dir)?;
    for (k, pts) in table {
        let cells: Vec<String> = pts.iter().map(|(s, c)| format!("{s:>7}: {c:.3}")).collect();
        println!("{:>7}  {}", k.name(), cells.join("   "));
    }
    println!("tables in {}", dir.display());
    Ok(())
}
