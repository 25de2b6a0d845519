//! Closed-form L-network design, checked on the ideal network and then
//! applied to the parasitic one, where it misses.
//!
//!     cargo run --example analytic_match

use tunematch::circuit::{analytical_match, reference_practical_circuit, simulate, TunableState};
use tunematch::network::{impedance_to_reflection, input_reflection, Impedance, ReferenceImpedance};

fn main() -> tunematch::Result<()> {
    let r = ReferenceImpedance::default();
    let practical = reference_practical_circuit();
    let ideal = practical.strip_parasitics();
    let f = 1.75e9;
    for zl in [Impedance::new(20.0, 30.0), Impedance::new(10.0, -5.0), Impedance::new(35.0, 60.0), Impedance::new(80.0, 0.0)] {
        let gl = impedance_to_reflection(zl, r)?;
        match analytical_match(zl, f, r) {
            Ok(pairs) => {
                for p in pairs {
                    let st = TunableState::new(f, p.cp, p.cs);
                    let on_ideal = input_reflection(&simulate(&ideal, st)?, gl)?.magnitude();
                    let on_real = input_reflection(&simulate(&practical, st)?, gl)?.magnitude();
                    println!(
                        "zl {:>8}  {:?}: Cp {:7.3} pF  Cs {:7.3} pF  |G| ideal {on_ideal:.1e}  parasitic {on_real:.3}",
                        format!("{}", zl.0),
                        p.branch,
                        p.cp * 1e12,
                        p.cs * 1e12
                    );
                }
            }
            Err(e) => println!("zl {:>8}  {e}", format!("{}", zl.0)),
        }
    }
    Ok(())
}
