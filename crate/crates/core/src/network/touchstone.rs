use std::io::Write;

use super::SParameters;

/// One row of a frequency sweep.
#[derive(Debug, Clone, Copy)]
pub struct TouchstonePoint {
    pub frequency_hz: f64,
    pub s: SParameters,
}

/// Writes a two-port sweep as Touchstone v1 text (`# GHZ S RI R <z0>`).
///
/// Row layout follows the format's fixed two-port order:
/// `f s11 s21 s12 s22`, each as real/imaginary pairs.
pub fn write_touchstone<W: Write>(mut out: W, points: &[TouchstonePoint]) -> std::io::Result<()> {
    let z0 = points.first().map_or(50.0, |p| p.s.reference.ohms());
    writeln!(out, "# GHZ S RI R {z0}")?;
    for p in points {
        let s = &p.s;
        writeln!(
            out,
            "{:.9} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e}",
            p.frequency_hz / 1e9,
            s.s11.re,
            s.s11.im,
            s.s21.re,
            s.s21.im,
            s.s12.re,
            s.s12.im,
            s.s22.re,
            s.s22.im,
        )?;
    }
    Ok(())
}
