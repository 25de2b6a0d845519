//! SAPSO on the exact circuit: every scenario has a perfect answer in the
//! box, so only optimizer error remains.
//!
//!     cargo run --release --example sapso_oracle

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tunematch::circuit::reference_practical_circuit;
use tunematch::data::generate_scenarios;
use tunematch::matching::{sapso_match, MatchBox, OracleSurrogate, SapsoConfig};

fn main() -> tunematch::Result<()> {
    let c = reference_practical_circuit();
    let oracle = OracleSurrogate::new(c.clone());
    let cfg = SapsoConfig { bounds: MatchBox::from_topology(&c), ..SapsoConfig::default() };
    println!("{:>3} {:>6} {:>14} {:>14} {:>6} {:>6} {:>9}", "id", "f/GHz", "target pF", "found pF", "iters", "evals", "|G|");
    for s in generate_scenarios(&c, 10, 42, 0.0)? {
        let mut rng = ChaCha8Rng::seed_from_u64(s.id as u64);
        let mut r = sapso_match(&oracle, s.f, s.gl(), &cfg, &mut rng)?;
        let g = r.score(&c, s.f, s.gl());
        println!(
            "{:>3} {:>6.3} {:>6.2},{:>6.2} {:>6.2},{:>6.2} {:>6} {:>6} {:>9.2e}",
            s.id,
            s.f / 1e9,
            s.cp_star * 1e12,
            s.cs_star * 1e12,
            r.cp * 1e12,
            r.cs * 1e12,
            r.iterations,
            r.evaluations,
            g
        );
    }
    Ok(())
}
