//! Ground-truth circuit oracle.
//!
//! A [`CircuitTopology`] is an ordered ladder of series and shunt arms,
//! each holding a recursive R/L/C element tree. Exactly two leaves refer to
//! the tunable capacitors (slot P and slot S). [`simulate`] cascades the
//! arms and converts to S-parameters; it is the reference every dataset
//! and every score is computed against.

mod compiled;
mod ideal;
mod spec;

use std::f64::consts::PI;

use sha2::{Digest, Sha256};

pub use compiled::FrequencyEvaluator;
pub use ideal::{analytical_match, ideal_l_input_impedance, ideal_l_network, Branch, MatchSolutionPair};
pub use spec::{CircuitSpec, ExprSpec};

use crate::error::{Error, Result};
use crate::network::{
    abcd_to_s, cascade, series_arm_abcd, shunt_arm_abcd, AbcdMatrix, Admittance, Complex, Impedance,
    ReferenceImpedance, SParameters,
};

/// Tunable capacitor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    /// Shunt capacitor of the L-network core.
    P,
    /// Series capacitor of the L-network core.
    S,
}

/// Element composition tree. Values are SI: ohms, henries, farads.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementExpr {
    Resistor(f64),
    Inductor(f64),
    Capacitor(f64),
    Tunable(Slot),
    Series(Vec<ElementExpr>),
    Parallel(Vec<ElementExpr>),
}

/// Impedance of an element tree, where an open circuit is a legal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ElementValue {
    Finite(Complex),
    Open,
}

impl ElementExpr {
    fn evaluate(&self, omega: f64, cp: f64, cs: f64) -> ElementValue {
        match self {
            ElementExpr::Resistor(r) => ElementValue::Finite(Complex::new(*r, 0.0)),
            ElementExpr::Inductor(l) => ElementValue::Finite(Complex::new(0.0, omega * l)),
            ElementExpr::Capacitor(c) => capacitor(omega, *c),
            ElementExpr::Tunable(Slot::P) => capacitor(omega, cp),
            ElementExpr::Tunable(Slot::S) => capacitor(omega, cs),
            ElementExpr::Series(children) => {
                let mut sum = Complex::new(0.0, 0.0);
                for child in children {
                    match child.evaluate(omega, cp, cs) {
                        ElementValue::Finite(z) => sum += z,
                        ElementValue::Open => return ElementValue::Open,
                    }
                }
                ElementValue::Finite(sum)
            }
            ElementExpr::Parallel(children) => {
                let mut y = Complex::new(0.0, 0.0);
                for child in children {
                    match child.evaluate(omega, cp, cs) {
                        ElementValue::Open => {}
                        ElementValue::Finite(z) if z.re == 0.0 && z.im == 0.0 => {
                            return ElementValue::Finite(z);
                        }
                        ElementValue::Finite(z) => y += z.inv(),
                    }
                }
                if y.re == 0.0 && y.im == 0.0 {
                    ElementValue::Open
                } else {
                    ElementValue::Finite(y.inv())
                }
            }
        }
    }

    fn visit_slots(&self, out: &mut Vec<Slot>) {
        match self {
            ElementExpr::Tunable(s) => out.push(*s),
            ElementExpr::Series(c) | ElementExpr::Parallel(c) => c.iter().for_each(|e| e.visit_slots(out)),
            _ => {}
        }
    }

    pub fn references(&self, slot: Slot) -> bool {
        let mut v = Vec::new();
        self.visit_slots(&mut v);
        v.contains(&slot)
    }

    /// Number of fixed R/L/C leaves.
    pub fn fixed_element_count(&self) -> usize {
        match self {
            ElementExpr::Tunable(_) => 0,
            ElementExpr::Series(c) | ElementExpr::Parallel(c) => c.iter().map(Self::fixed_element_count).sum(),
            _ => 1,
        }
    }

    /// Removes every fixed leaf: shorted inside a series node, opened
    /// inside a parallel node. `None` means nothing tunable remains.
    fn strip_fixed(&self) -> Option<ElementExpr> {
        match self {
            ElementExpr::Tunable(s) => Some(ElementExpr::Tunable(*s)),
            ElementExpr::Series(c) | ElementExpr::Parallel(c) => {
                let mut kept: Vec<ElementExpr> = c.iter().filter_map(Self::strip_fixed).collect();
                match kept.len() {
                    0 => None,
                    1 => kept.pop(),
                    _ if matches!(self, ElementExpr::Series(_)) => Some(ElementExpr::Series(kept)),
                    _ => Some(ElementExpr::Parallel(kept)),
                }
            }
            _ => None,
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        let check = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!("{path}: {what} value {v} must be finite and non-negative")))
            }
        };
        match self {
            ElementExpr::Resistor(v) => check(*v, "resistor"),
            ElementExpr::Inductor(v) => check(*v, "inductor"),
            ElementExpr::Capacitor(v) => check(*v, "capacitor"),
            ElementExpr::Tunable(_) => Ok(()),
            ElementExpr::Series(c) | ElementExpr::Parallel(c) => {
                if c.len() < 2 {
                    return Err(Error::Validation(format!("{path}: composite node needs at least 2 children")));
                }
                for (i, e) in c.iter().enumerate() {
                    e.validate(&format!("{path}/{i}"))?;
                }
                Ok(())
            }
        }
    }
}

fn capacitor(omega: f64, c: f64) -> ElementValue {
    if c == 0.0 {
        ElementValue::Open
    } else {
        ElementValue::Finite(Complex::new(0.0, -1.0 / (omega * c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Series,
    Shunt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub orientation: Orientation,
    pub expr: ElementExpr,
}

impl Arm {
    pub fn series(expr: ElementExpr) -> Self {
        Arm { orientation: Orientation::Series, expr }
    }

    pub fn shunt(expr: ElementExpr) -> Self {
        Arm { orientation: Orientation::Shunt, expr }
    }

    fn abcd(&self, omega: f64, cp: f64, cs: f64) -> Result<AbcdMatrix> {
        arm_abcd(self.orientation, self.expr.evaluate(omega, cp, cs))
    }
}

pub(crate) fn arm_abcd(orientation: Orientation, value: ElementValue) -> Result<AbcdMatrix> {
    match (orientation, value) {
        (Orientation::Series, ElementValue::Finite(z)) => series_arm_abcd(Impedance(z)),
        (Orientation::Series, ElementValue::Open) => Err(Error::SingularNetwork("open series arm")),
        (Orientation::Shunt, ElementValue::Open) => Ok(AbcdMatrix::IDENTITY),
        (Orientation::Shunt, ElementValue::Finite(z)) => {
            if z.re == 0.0 && z.im == 0.0 {
                return Err(Error::SingularNetwork("shorted shunt arm"));
            }
            shunt_arm_abcd(Admittance(z.inv()))
        }
    }
}

/// Operating point: frequency in hertz, tunable capacitances in farads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunableState {
    pub f: f64,
    pub cp: f64,
    pub cs: f64,
}

impl TunableState {
    pub fn new(f: f64, cp: f64, cs: f64) -> Self {
        TunableState { f, cp, cs }
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// Validated two-port ladder with two tunable capacitor slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTopology {
    name: String,
    band: Range,
    tunable_p: Range,
    tunable_s: Range,
    arms: Vec<Arm>,
    reference: ReferenceImpedance,
}

impl CircuitTopology {
    pub fn new(name: impl Into<String>, band: Range, tunable_p: Range, tunable_s: Range, arms: Vec<Arm>) -> Result<Self> {
        let topo = CircuitTopology {
            name: name.into(),
            band,
            tunable_p,
            tunable_s,
            arms,
            reference: ReferenceImpedance::default(),
        };
        topo.validate()?;
        Ok(topo)
    }

    pub fn with_reference(mut self, reference: ReferenceImpedance) -> Self {
        self.reference = reference;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::Validation("topology has no arms".into()));
        }
        if !(self.band.lo > 0.0 && self.band.lo < self.band.hi && self.band.hi.is_finite()) {
            return Err(Error::Validation(format!("band [{}, {}] must satisfy 0 < lo < hi", self.band.lo, self.band.hi)));
        }
        for (slot, r) in [("P", self.tunable_p), ("S", self.tunable_s)] {
            if !(r.lo >= 0.0 && r.lo < r.hi && r.hi.is_finite()) {
                return Err(Error::Validation(format!("tunable range {slot} [{}, {}] must satisfy 0 <= lo < hi", r.lo, r.hi)));
            }
        }
        let mut slots = Vec::new();
        for (i, arm) in self.arms.iter().enumerate() {
            arm.expr.validate(&format!("arm {i}"))?;
            arm.expr.visit_slots(&mut slots);
        }
        for slot in [Slot::P, Slot::S] {
            let n = slots.iter().filter(|s| **s == slot).count();
            if n != 1 {
                return Err(Error::Validation(format!("tunable slot {slot:?} referenced {n} times, expected exactly once")));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Operating band in hertz.
    pub fn band(&self) -> Range {
        self.band
    }

    /// Tunable range of a slot in farads.
    pub fn tunable_range(&self, slot: Slot) -> Range {
        match slot {
            Slot::P => self.tunable_p,
            Slot::S => self.tunable_s,
        }
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn reference(&self) -> ReferenceImpedance {
        self.reference
    }

    pub fn fixed_element_count(&self) -> usize {
        self.arms.iter().map(|a| a.expr.fixed_element_count()).sum()
    }

    /// Index of the arm holding `slot`.
    pub fn tunable_arm(&self, slot: Slot) -> usize {
        self.arms.iter().position(|a| a.expr.references(slot)).expect("validated topology")
    }

    /// Same topology with every fixed element removed. For an L-network
    /// core decorated with parasitics this is the ideal L-network.
    pub fn strip_parasitics(&self) -> CircuitTopology {
        let arms = self
            .arms
            .iter()
            .filter_map(|a| a.expr.strip_fixed().map(|expr| Arm { orientation: a.orientation, expr }))
            .collect();
        CircuitTopology { name: format!("{} (stripped)", self.name), arms, ..self.clone() }
    }

    /// Hex SHA-256 of the canonical circuit-spec serialization.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(&CircuitSpec::from_topology(self)).expect("spec serializes");
        let mut h = Sha256::new();
        h.update(&canonical);
        h.update(self.reference.ohms().to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Parses and validates a circuit-spec JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CircuitSpec = serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        spec.to_topology()
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitSpec::from_topology(self)).expect("spec serializes")
    }
}

/// Impedance of an element tree at a state. Open circuits are reported
/// as a singular-network error; use a shunt arm to place them legally.
pub fn element_impedance(expr: &ElementExpr, state: TunableState) -> Result<Impedance> {
    if !(state.f > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {}", state.f)));
    }
    match expr.evaluate(state.omega(), state.cp, state.cs) {
        ElementValue::Finite(z) => Ok(Impedance(z)),
        ElementValue::Open => Err(Error::SingularNetwork("element tree is an open circuit")),
    }
}

/// ABCD matrix of the whole ladder at `state`.
pub fn topology_abcd(topology: &CircuitTopology, state: TunableState) -> Result<AbcdMatrix> {
    if !(state.f > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {}", state.f)));
    }
    let omega = state.omega();
    let factors = topology
        .arms
        .iter()
        .map(|a| a.abcd(omega, state.cp, state.cs))
        .collect::<Result<Vec<_>>>()?;
    Ok(cascade(&factors))
}

/// Exact S-parameters of `topology` at `state`, arms cascaded in
/// declared order.
pub fn simulate(topology: &CircuitTopology, state: TunableState) -> Result<SParameters> {
    abcd_to_s(&topology_abcd(topology, state)?, topology.reference)
}

/// The committed reference circuit: an L-network core wrapped in 17
/// fixed parasitics, 1.5–2 GHz, both capacitors tunable over 0–10 pF.
pub fn reference_practical_circuit() -> CircuitTopology {
    CircuitTopology::from_json(include_str!("../../circuits/reference.json")).expect("reference circuit is valid")
}
