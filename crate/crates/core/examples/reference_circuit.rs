//! The bundled parasitic L-network next to its ideal counterpart: how far
//! the parasitics move the input reflection for the same capacitor pair.
//!
//!     cargo run --example reference_circuit

use tunematch::circuit::{reference_practical_circuit, simulate, Slot, TunableState};
use tunematch::network::{input_reflection, ReflectionCoefficient};

fn main() -> tunematch::Result<()> {
    let practical = reference_practical_circuit();
    let ideal = practical.strip_parasitics();
    println!("{}: {} arms, {} fixed elements", practical.name(), practical.arms().len(), practical.fixed_element_count());
    println!("P on arm {}, S on arm {}", practical.tunable_arm(Slot::P) + 1, practical.tunable_arm(Slot::S) + 1);
    println!("fingerprint {}", practical.fingerprint());
    println!();
    println!("{:>6} {:>6} {:>6} {:>10} {:>10}", "f/GHz", "Cp/pF", "Cs/pF", "|s11| real", "|s11| ideal");
    let gl = ReflectionCoefficient::ZERO;
    for f in [1.5e9, 1.75e9, 2.0e9] {
        for (cp, cs) in [(1e-12, 2e-12), (5e-12, 5e-12), (9e-12, 8e-12)] {
            let st = TunableState::new(f, cp, cs);
            let real = input_reflection(&simulate(&practical, st)?, gl)?.magnitude();
            let id = input_reflection(&simulate(&ideal, st)?, gl)?.magnitude();
            println!("{:>6.2} {:>6.1} {:>6.1} {:>10.4} {:>10.4}", f / 1e9, cp * 1e12, cs * 1e12, real, id);
        }
    }
    Ok(())
}
