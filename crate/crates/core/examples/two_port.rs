//! Build a two-port from series and shunt arms, convert it to S-parameters
//! and write a small Touchstone file to stdout.
//!
//!     cargo run --example two_port

use std::f64::consts::PI;

use tunematch::network::{
    abcd_to_s, cascade, input_reflection, load_reflection_from_input, series_arm_abcd, shunt_arm_abcd, write_touchstone,
    Admittance, Impedance, ReferenceImpedance, ReflectionCoefficient, TouchstonePoint,
};

fn main() -> tunematch::Result<()> {
    let z0 = ReferenceImpedance::default();
    let mut points = Vec::new();
    for i in 0..=4 {
        let f = 1.5e9 + i as f64 * 0.125e9;
        let w = 2.0 * PI * f;
        // 3 nH series, then 2 pF to ground.
        let arms = [series_arm_abcd(Impedance::new(0.0, w * 3e-9))?, shunt_arm_abcd(Admittance::new(0.0, w * 2e-12))?];
        let s = abcd_to_s(&cascade(&arms), z0)?;
        points.push(TouchstonePoint { frequency_hz: f, s });
    }

    let s = points[2].s;
    println!("! at {:.3} GHz: {s}", points[2].frequency_hz / 1e9);
    println!("! reciprocity |s12 - s21| = {:.2e}", (s.s12 - s.s21).norm());

    // A load seen through the two-port, and back again.
    let gl = ReflectionCoefficient::new(0.3, -0.2);
    let gin = input_reflection(&s, gl)?;
    let back = load_reflection_from_input(&s, gin)?;
    println!("! gl {} -> gin {} -> gl {}", gl.0, gin.0, back.0);

    write_touchstone(std::io::stdout().lock(), &points).expect("stdout");
    Ok(())
}
