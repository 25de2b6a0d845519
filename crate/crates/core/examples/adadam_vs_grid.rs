//! Gradient descent against exhaustive search on the exact circuit, with
//! the number of circuit queries each needs.
//!
//!     cargo run --release --example adadam_vs_grid

use tunematch::circuit::reference_practical_circuit;
use tunematch::data::generate_scenarios;
use tunematch::matching::{adadam_match, grid_search_match, AdamMatchConfig, MatchBox, OracleSurrogate};

fn main() -> tunematch::Result<()> {
    let c = reference_practical_circuit();
    let oracle = OracleSurrogate::new(c.clone());
    let bounds = MatchBox::from_topology(&c);
    let adam = AdamMatchConfig { bounds, ..AdamMatchConfig::default() };
    println!("{:>3} {:>12} {:>7} {:>12} {:>7}", "id", "adam |G|", "evals", "grid |G|", "evals");
    for s in generate_scenarios(&c, 8, 7, 0.0)? {
        let mut a = adadam_match(&oracle, s.f, s.gl(), &adam)?;
        let mut g = grid_search_match(&oracle, s.f, s.gl(), 0.05e-12, bounds)?;
        println!(
            "{:>3} {:>12.3e} {:>7} {:>12.3e} {:>7}",
            s.id,
            a.score(&c, s.f, s.gl()),
            a.evaluations,
            g.score(&c, s.f, s.gl()),
            g.evaluations
        );
    }
    Ok(())
}
