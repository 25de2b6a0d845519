//! The ideal (parasitic-free) L-network: a shunt capacitor at the source
//! side followed by a series capacitor towards the load.

use super::{Arm, CircuitTopology, ElementExpr, Range, Slot, TunableState};
use crate::error::{Error, Result};
use crate::network::{Complex, Impedance, ReferenceImpedance};

/// Which sign of the square root in the closed-form solution produced a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// One closed-form matching solution, capacitances in farads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchSolutionPair {
    pub cp: f64,
    pub cs: f64,
    pub branch: Branch,
}

/// Shunt slot P then series slot S, nothing else.
pub fn ideal_l_network(band: Range, tunable_p: Range, tunable_s: Range) -> CircuitTopology {
    CircuitTopology::new(
        "ideal-l",
        band,
        tunable_p,
        tunable_s,
        vec![Arm::shunt(ElementExpr::Tunable(Slot::P)), Arm::series(ElementExpr::Tunable(Slot::S))],
    )
    .expect("ideal L-network is valid")
}

/// `Zin = 1/(jBp + 1/(zl + 1/(jBs)))` with `Bp = ωCp`, `Bs = ωCs`.
pub fn ideal_l_input_impedance(zl: Impedance, state: TunableState) -> Result<Impedance> {
    if !(state.f > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {}", state.f)));
    }
    if state.cs == 0.0 {
        return Err(Error::SingularNetwork("series capacitor of zero value is open"));
    }
    let w = state.omega();
    let z1 = zl.0 + Complex::new(0.0, -1.0 / (w * state.cs));
    if z1.re == 0.0 && z1.im == 0.0 {
        return Ok(Impedance(Complex::new(0.0, 0.0)));
    }
    let y = Complex::new(0.0, w * state.cp) + z1.inv();
    if y.re == 0.0 && y.im == 0.0 {
        return Err(Error::SingularNetwork("input port is open"));
    }
    Ok(Impedance(y.inv()))
}

/// Closed-form capacitor pairs that conjugately match `zl` to `r` with the
/// ideal L-network at frequency `f`.
///
/// Every sign pairing of the two square-root branches is evaluated and
/// kept only if substituting it back gives `|Zin - r| < 1e-6 r` with both
/// capacitances positive and finite.
pub fn analytical_match(zl: Impedance, f: f64, r: ReferenceImpedance) -> Result<Vec<MatchSolutionPair>> {
    if !(f > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {f}")));
    }
    let (rl, xl, rs) = (zl.0.re, zl.0.im, r.ohms());
    if !(rl > 0.0 && rl.is_finite() && xl.is_finite()) {
        return Err(Error::InvalidArgument(format!("load resistance must be positive and finite, got {}", zl.0)));
    }
    let disc = rl * rs - rl * rl;
    if disc < 0.0 {
        return Err(Error::NoFeasibleSolution("load resistance exceeds the source resistance"));
    }
    let q = disc.sqrt();
    let w = 2.0 * std::f64::consts::PI * f;
    let cp_of = |sign: f64| (disc + sign * xl * q) / (w * (rl * xl * rs + sign * rl * rs * q));
    let cs_of = |sign: f64| (xl + sign * q) / (w * (rl * rl + xl * xl - rl * rs));

    let mut out: Vec<MatchSolutionPair> = Vec::new();
    for (sp, branch) in [(1.0, Branch::Plus), (-1.0, Branch::Minus)] {
        let cs = cs_of(sp);
        for sq in [1.0, -1.0] {
            let cp = cp_of(sq);
            if !(cp.is_finite() && cs.is_finite() && cp > 0.0 && cs > 0.0) {
                continue;
            }
            let Ok(zin) = ideal_l_input_impedance(zl, TunableState::new(f, cp, cs)) else { continue };
            if (zin.0 - rs).norm() < 1e-6 * rs && !out.iter().any(|p| p.branch == branch) {
                out.push(MatchSolutionPair { cp, cs, branch });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoFeasibleSolution("no sign pairing yields positive capacitors"));
    }
    Ok(out)
}
