//! Matching strategies. Each takes a measured operating condition and
//! returns a capacitor pair inside the tuning box.
//!
//! All strategies query the circuit only through a [`Surrogate`], so the
//! same code runs on a trained network or on the exact circuit. Counting
//! is per call: every strategy reports the number of forward-equivalent
//! queries it made, excluding the load-recovery query that the caller
//! performs first with [`recover_load_reflection`].

mod adadam;
mod ims;
mod sapso;
mod surrogate;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use adadam::{adadam_match, AdamMatchConfig};
pub use ims::ims_match;
pub use sapso::{constriction_factor, sapso_match, SapsoConfig};
pub use surrogate::{Counted, NetworkSurrogate, OracleSurrogate, Surrogate};

use crate::circuit::{analytical_match, simulate, CircuitTopology, Range, Slot, TunableState};
use crate::data::AxisSpec;
use crate::error::{Error, Result};
use crate::network::{
    input_reflection, load_reflection_from_input, reflection_to_impedance, ReferenceImpedance, ReflectionCoefficient,
    SParameters,
};

/// The box `C` of admissible capacitor pairs, in farads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchBox {
    pub cp: Range,
    pub cs: Range,
}

impl Default for MatchBox {
    fn default() -> Self {
        MatchBox { cp: Range::new(0.0, 10e-12), cs: Range::new(0.0, 10e-12) }
    }
}

impl MatchBox {
    pub fn from_topology(topology: &CircuitTopology) -> Self {
        MatchBox { cp: topology.tunable_range(Slot::P), cs: topology.tunable_range(Slot::S) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("cp", self.cp), ("cs", self.cs)] {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo < r.hi) {
                return Err(Error::Validation(format!("{name} bounds must satisfy lo < hi, got [{}, {}]", r.lo, r.hi)));
            }
        }
        Ok(())
    }

    pub fn contains(&self, cp: f64, cs: f64) -> bool {
        self.cp.contains(cp) && self.cs.contains(cs)
    }

    /// Componentwise clamp, which is the Euclidean projection onto a box.
    pub fn project(&self, cp: f64, cs: f64) -> (f64, f64) {
        (self.cp.clamp(cp), self.cs.clamp(cs))
    }
}

/// One strategy's answer for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub cp: f64,
    pub cs: f64,
    /// `|Γin|` as the surrogate sees it.
    pub predicted_gamma: f64,
    /// `|Γin|` from the exact circuit against the true load; filled by [`MatchResult::score`].
    pub true_gamma: Option<f64>,
    pub iterations: u64,
    pub evaluations: u64,
    pub wall_time_s: f64,
    /// False only for the analytic baseline when no closed-form pair exists.
    pub feasible: bool,
}

impl MatchResult {
    /// Rates the answer on the exact circuit. Singular states score as a
    /// total reflection.
    pub fn score(&mut self, oracle: &CircuitTopology, f: f64, true_gl: ReflectionCoefficient) -> f64 {
        let g = simulate(oracle, TunableState::new(f, self.cp, self.cs))
            .and_then(|s| input_reflection(&s, true_gl))
            .map(|g| g.magnitude())
            .unwrap_or(1.0);
        self.true_gamma = Some(g);
        g
    }
}

/// `ψ = |Γin|` for a surrogate answer; unusable states score infinity.
pub(crate) fn psi_of(s: Result<SParameters>, gl: ReflectionCoefficient) -> f64 {
    match s.and_then(|s| input_reflection(&s, gl)) {
        Ok(g) if g.magnitude().is_finite() => g.magnitude(),
        _ => f64::INFINITY,
    }
}

/// One surrogate query at the current setting, then the load reflection
/// that explains the measured `gin`.
pub fn recover_load_reflection(
    surrogate: &mut Counted<'_>,
    f: f64,
    current: (f64, f64),
    gin: ReflectionCoefficient,
) -> Result<ReflectionCoefficient> {
    let s = surrogate.evaluate(TunableState::new(f, current.0, current.1))?;
    load_reflection_from_input(&s, gin)
}

fn lattice(r: Range, step: f64) -> Result<Vec<f64>> {
    let axis = AxisSpec { lo: r.lo, hi: r.hi, step };
    axis.validate("grid")?;
    Ok(axis.points())
}

/// Exhaustive search over the inclusive lattice with spacing `step`
/// (farads). Ties go to the smallest `cp`, then the smallest `cs`.
pub fn grid_search_match(
    surrogate: &dyn Surrogate,
    f: f64,
    gl: ReflectionCoefficient,
    step: f64,
    bounds: MatchBox,
) -> Result<MatchResult> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    bounds.validate()?;
    let start = Instant::now();
    let cps = lattice(bounds.cp, step)?;
    let css = lattice(bounds.cs, step)?;
    let mut counter = Counted::new(surrogate);
    let mut best = (f64::INFINITY, bounds.cp.lo, bounds.cs.lo);
    let mut row = Vec::with_capacity(css.len());
    for &cp in &cps {
        row.clear();
        row.extend(css.iter().map(|&cs| (cp, cs)));
        for (s, &(cp, cs)) in counter.evaluate_batch(f, &row).into_iter().zip(&row) {
            let psi = psi_of(s, gl);
            if psi < best.0 {
                best = (psi, cp, cs);
            }
        }
    }
    Ok(MatchResult {
        cp: best.1,
        cs: best.2,
        predicted_gamma: best.0,
        true_gamma: None,
        iterations: 1,
        evaluations: counter.evaluations(),
        wall_time_s: start.elapsed().as_secs_f64(),
        feasible: true,
    })
}

/// Closed-form ideal L-network answer, clamped into the box. When the load
/// cannot be matched by the ideal network the current setting is returned
/// with `feasible = false`.
pub fn ideal_analytic_match(
    gl: ReflectionCoefficient,
    f: f64,
    r: ReferenceImpedance,
    bounds: MatchBox,
    current: (f64, f64),
) -> MatchResult {
    let start = Instant::now();
    let solution = reflection_to_impedance(gl, r).and_then(|zl| analytical_match(zl, f, r));
    let (cp, cs, feasible) = match solution {
        Ok(pairs) => {
            let pick = pairs.iter().find(|p| bounds.contains(p.cp, p.cs)).unwrap_or(&pairs[0]);
            let (cp, cs) = bounds.project(pick.cp, pick.cs);
            (cp, cs, true)
        }
        Err(_) => {
            let (cp, cs) = bounds.project(current.0, current.1);
            (cp, cs, false)
        }
    };
    // The ideal model is matched exactly whenever a pair exists; clamping
    // can only make that worse, which the exact score shows.
    MatchResult {
        cp,
        cs,
        predicted_gamma: if feasible { 0.0 } else { f64::NAN },
        true_gamma: None,
        iterations: 0,
        evaluations: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        feasible,
    }
}
