//! Train a forward surrogate, derive the inverse dataset from it, train the
//! inverse network, and match a few scenarios with two inferences each.
//! The optional argument sets the epoch count for both models.
//!
//!     cargo run --release --example ims_inverse -- 60

use tunematch::bench::{inverse_datasets, sweep_datasets, train_model, Profile, RunConfig};
use tunematch::circuit::reference_practical_circuit;
use tunematch::data::generate_scenarios;
use tunematch::matching::{ims_match, recover_load_reflection, Counted, MatchBox, NetworkSurrogate};
use tunematch::nn::ModelRole;

fn main() -> tunematch::Result<()> {
    let mut cfg = RunConfig::for_profile(Profile::Desk);
    if let Some(e) = std::env::args().nth(1) {
        cfg.training.epochs = e.parse().expect("epoch count");
    }
    let c = reference_practical_circuit();
    let sweep = sweep_datasets(&cfg, &c)?;
    let (recbm, _) = train_model(ModelRole::Recbm, &cfg, &sweep.train, &c.fingerprint(), None)?;
    let inverse = inverse_datasets(&cfg, &c, &recbm)?;
    println!("inverse dataset: {} rows ({} skipped)", inverse.generated.dataset.len(), inverse.generated.skipped);
    let (ims, _) = train_model(ModelRole::Ims, &cfg, &inverse.train, &c.fingerprint(), Some(&recbm))?;

    let surrogate = NetworkSurrogate::new(recbm, c.reference())?;
    let bounds = MatchBox::from_topology(&c);
    let mut compliant = 0;
    let scenarios = generate_scenarios(&c, 50, 42, 0.0)?;
    for s in &scenarios {
        let mut counter = Counted::new(&surrogate);
        let gl = recover_load_reflection(&mut counter, s.f, (s.cp_now, s.cs_now), s.gin())?;
        let mut r = ims_match(&surrogate, &ims, s.f, gl, bounds)?;
        let g = r.score(&c, s.f, s.gl());
        compliant += usize::from(g < 0.2);
        if s.id < 8 {
            println!(
                "{:>2}: target ({:5.2}, {:5.2}) pF  got ({:5.2}, {:5.2}) pF  |G| {:.4}  evaluations {}",
                s.id,
                s.cp_star * 1e12,
                s.cs_star * 1e12,
                r.cp * 1e12,
                r.cs * 1e12,
                g,
                counter.evaluations() + r.evaluations
            );
        }
    }
    println!("compliance {compliant}/{}", scenarios.len());
    Ok(())
}
