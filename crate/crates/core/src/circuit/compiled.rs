use super::{arm_abcd, CircuitTopology, ElementExpr, ElementValue, Orientation, Slot};
use crate::error::{Error, Result};
use crate::network::{abcd_to_s, AbcdMatrix, Complex, ReferenceImpedance, SParameters};

/// Element tree with everything that does not depend on the tunable
/// capacitors folded into constants at one frequency.
#[derive(Debug, Clone)]
enum Frozen {
    Const(ElementValue),
    Tune(Slot),
    Ser { fixed: Complex, parts: Vec<Frozen> },
    Par { fixed_y: Complex, parts: Vec<Frozen> },
}

fn is_zero(z: Complex) -> bool {
    z.re == 0.0 && z.im == 0.0
}

impl Frozen {
    fn build(e: &ElementExpr, omega: f64) -> Frozen {
        if !e.references(Slot::P) && !e.references(Slot::S) {
            return Frozen::Const(e.evaluate(omega, 0.0, 0.0));
        }
        match e {
            ElementExpr::Tunable(s) => Frozen::Tune(*s),
            ElementExpr::Series(children) => {
                let mut fixed = Complex::new(0.0, 0.0);
                let mut parts = Vec::new();
                for c in children {
                    match Frozen::build(c, omega) {
                        Frozen::Const(ElementValue::Open) => return Frozen::Const(ElementValue::Open),
                        Frozen::Const(ElementValue::Finite(z)) => fixed += z,
                        other => parts.push(other),
                    }
                }
                Frozen::Ser { fixed, parts }
            }
            ElementExpr::Parallel(children) => {
                let mut fixed_y = Complex::new(0.0, 0.0);
                let mut parts = Vec::new();
                for c in children {
                    match Frozen::build(c, omega) {
                        Frozen::Const(ElementValue::Open) => {}
                        Frozen::Const(ElementValue::Finite(z)) if is_zero(z) => {
                            return Frozen::Const(ElementValue::Finite(z));
                        }
                        Frozen::Const(ElementValue::Finite(z)) => fixed_y += z.inv(),
                        other => parts.push(other),
                    }
                }
                Frozen::Par { fixed_y, parts }
            }
            _ => unreachable!("leaf without tunable reference handled above"),
        }
    }

    fn eval(&self, omega: f64, cp: f64, cs: f64) -> ElementValue {
        match self {
            Frozen::Const(v) => *v,
            Frozen::Tune(slot) => {
                let c = if *slot == Slot::P { cp } else { cs };
                if c == 0.0 {
                    ElementValue::Open
                } else {
                    ElementValue::Finite(Complex::new(0.0, -1.0 / (omega * c)))
                }
            }
            Frozen::Ser { fixed, parts } => {
                let mut z = *fixed;
                for p in parts {
                    match p.eval(omega, cp, cs) {
                        ElementValue::Finite(v) => z += v,
                        ElementValue::Open => return ElementValue::Open,
                    }
                }
                ElementValue::Finite(z)
            }
            Frozen::Par { fixed_y, parts } => {
                let mut y = *fixed_y;
                for p in parts {
                    match p.eval(omega, cp, cs) {
                        ElementValue::Open => {}
                        ElementValue::Finite(v) if is_zero(v) => return ElementValue::Finite(v),
                        ElementValue::Finite(v) => y += v.inv(),
                    }
                }
                if is_zero(y) {
                    ElementValue::Open
                } else {
                    ElementValue::Finite(y.inv())
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Stage {
    Fixed(AbcdMatrix),
    Tunable(Orientation, Frozen),
}

/// A topology specialised to one frequency. Runs of fixed arms are
/// pre-multiplied, so a query costs one small tree walk per tunable arm
/// and a handful of 2×2 products.
///
/// Agrees with [`super::simulate`] to rounding; it is not bit-identical
/// because constants are summed in a different order.
#[derive(Debug, Clone)]
pub struct FrequencyEvaluator {
    f: f64,
    omega: f64,
    stages: Vec<Stage>,
    reference: ReferenceImpedance,
}

impl FrequencyEvaluator {
    pub fn new(topology: &CircuitTopology, f: f64) -> Result<Self> {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::InvalidArgument(format!("frequency must be positive, got {f}")));
        }
        let omega = 2.0 * std::f64::consts::PI * f;
        let mut stages: Vec<Stage> = Vec::new();
        let mut pending: Option<AbcdMatrix> = None;
        for arm in topology.arms() {
            match Frozen::build(&arm.expr, omega) {
                Frozen::Const(v) => {
                    let m = arm_abcd(arm.orientation, v)?;
                    pending = Some(pending.map_or(m, |acc| acc * m));
                }
                frozen => {
                    if let Some(m) = pending.take() {
                        stages.push(Stage::Fixed(m));
                    }
                    stages.push(Stage::Tunable(arm.orientation, frozen));
                }
            }
        }
        if let Some(m) = pending {
            stages.push(Stage::Fixed(m));
        }
        Ok(FrequencyEvaluator { f, omega, stages, reference: topology.reference() })
    }

    pub fn frequency(&self) -> f64 {
        self.f
    }

    pub fn abcd(&self, cp: f64, cs: f64) -> Result<AbcdMatrix> {
        let mut acc: Option<AbcdMatrix> = None;
        for stage in &self.stages {
            let m = match stage {
                Stage::Fixed(m) => *m,
                Stage::Tunable(o, frozen) => arm_abcd(*o, frozen.eval(self.omega, cp, cs))?,
            };
            acc = Some(acc.map_or(m, |a| a * m));
        }
        Ok(acc.unwrap_or(AbcdMatrix::IDENTITY))
    }

    pub fn s_parameters(&self, cp: f64, cs: f64) -> Result<SParameters> {
        abcd_to_s(&self.abcd(cp, cs)?, self.reference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{reference_practical_circuit, simulate, TunableState};

    #[test]
    fn agrees_with_direct_simulation() {
        let c = reference_practical_circuit();
        for &(f, cp, cs) in &[(1.5e9, 0.0, 1e-12), (1.75e9, 5e-12, 5e-12), (2e9, 10e-12, 0.0), (1.9e9, 3.3e-12, 9.1e-12)] {
            let ev = FrequencyEvaluator::new(&c, f).unwrap();
            let a = ev.s_parameters(cp, cs).unwrap();
            let b = simulate(&c, TunableState::new(f, cp, cs)).unwrap();
            for (x, y) in a.to_array().iter().zip(b.to_array()) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y} at {f} {cp} {cs}");
            }
        }
    }

    #[test]
    fn folds_fixed_arms() {
        let c = reference_practical_circuit();
        let ev = FrequencyEvaluator::new(&c, 1.6e9).unwrap();
        // fixed, P, S, fixed
        assert_eq!(ev.stages.len(), 4);
    }
}
