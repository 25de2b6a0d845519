//! Sweep the reference circuit, train the forward surrogate and report its
//! held-out error. The optional argument sets the epoch count (default:
//! the desk profile's 300).
//!
//!     cargo run --release --example train_surrogate -- 40

use tunematch::bench::{sweep_datasets, train_model, Profile, RunConfig};
use tunematch::circuit::reference_practical_circuit;
use tunematch::nn::{evaluate_surrogate, ModelRole};

fn main() -> tunematch::Result<()> {
    let mut cfg = RunConfig::for_profile(Profile::Desk);
    if let Some(e) = std::env::args().nth(1) {
        cfg.training.epochs = e.parse().expect("epoch count");
    }
    let c = reference_practical_circuit();
    let data = sweep_datasets(&cfg, &c)?;
    println!("sweep: {} rows, {} train, {} test", data.generated.dataset.len(), data.train.len(), data.test.len());

    let (model, outcome) = train_model(ModelRole::Recbm, &cfg, &data.train, &c.fingerprint(), None)?;
    println!("widths {:?}, {} parameters", model.widths(), model.parameter_count());
    let step = (outcome.history.len() / 10).max(1);
    for e in outcome.history.iter().step_by(step) {
        println!("epoch {:>4}  train {:.3e}  val {:.3e}", e.epoch, e.train_mse, e.val_mse);
    }

    let report = evaluate_surrogate(&model, &data.test, 100)?;
    for d in &report.dimensions {
        println!("{:>7}  mae {:.2e}  mre {:.2e}", d.name, d.mae, d.mre);
    }
    println!("overall  mae {:.2e}  mre {:.2e}", report.overall_mae, report.overall_mre);
    Ok(())
}
