//! Circuit-spec file format.
//!
//! ```json
//! {
//!   "name": "example",
//!   "band_ghz": [1.5, 2.0],
//!   "tunable_pf": { "p": [0, 10], "s": [0, 10] },
//!   "arms": [
//!     { "orient": "shunt",  "expr": { "SER": [{ "TUNE": "P" }, { "L": 0.3 }] } },
//!     { "orient": "series", "expr": { "TUNE": "S" } }
//!   ]
//! }
//! ```
//!
//! Leaf units: `R` ohms, `L` nanohenries, `C` picofarads. `SER` and `PAR`
//! take two or more children. An optional `reference_ohms` overrides the
//! 50 Ω port reference.

use serde::{Deserialize, Serialize};

use super::{Arm, CircuitTopology, ElementExpr, Orientation, Range, Slot};
use crate::error::{Error, Result};
use crate::network::ReferenceImpedance;

const NANO: f64 = 1e9;
const PICO: f64 = 1e12;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub name: String,
    pub band_ghz: [f64; 2],
    pub tunable_pf: TunableSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_ohms: Option<f64>,
    pub arms: Vec<ArmSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunableSpec {
    pub p: [f64; 2],
    pub s: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub orient: OrientSpec,
    pub expr: ExprSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientSpec {
    Series,
    Shunt,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum SlotSpec {
    P,
    S,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ExprSpec {
    R(f64),
    L(f64),
    C(f64),
    #[serde(rename = "TUNE")]
    Tune(SlotSpec),
    #[serde(rename = "SER")]
    Ser(Vec<ExprSpec>),
    #[serde(rename = "PAR")]
    Par(Vec<ExprSpec>),
}

impl ExprSpec {
    fn to_expr(&self) -> ElementExpr {
        match self {
            ExprSpec::R(v) => ElementExpr::Resistor(*v),
            ExprSpec::L(v) => ElementExpr::Inductor(v / NANO),
            ExprSpec::C(v) => ElementExpr::Capacitor(v / PICO),
            ExprSpec::Tune(SlotSpec::P) => ElementExpr::Tunable(Slot::P),
            ExprSpec::Tune(SlotSpec::S) => ElementExpr::Tunable(Slot::S),
            ExprSpec::Ser(c) => ElementExpr::Series(c.iter().map(Self::to_expr).collect()),
            ExprSpec::Par(c) => ElementExpr::Parallel(c.iter().map(Self::to_expr).collect()),
        }
    }

    fn from_expr(e: &ElementExpr) -> Self {
        match e {
            ElementExpr::Resistor(v) => ExprSpec::R(*v),
            ElementExpr::Inductor(v) => ExprSpec::L(v * NANO),
            ElementExpr::Capacitor(v) => ExprSpec::C(v * PICO),
            ElementExpr::Tunable(Slot::P) => ExprSpec::Tune(SlotSpec::P),
            ElementExpr::Tunable(Slot::S) => ExprSpec::Tune(SlotSpec::S),
            ElementExpr::Series(c) => ExprSpec::Ser(c.iter().map(Self::from_expr).collect()),
            ElementExpr::Parallel(c) => ExprSpec::Par(c.iter().map(Self::from_expr).collect()),
        }
    }
}

impl CircuitSpec {
    pub fn to_topology(&self) -> Result<CircuitTopology> {
        let arms = self
            .arms
            .iter()
            .map(|a| Arm {
                orientation: match a.orient {
                    OrientSpec::Series => Orientation::Series,
                    OrientSpec::Shunt => Orientation::Shunt,
                },
                expr: a.expr.to_expr(),
            })
            .collect();
        let range = |v: [f64; 2]| Range::new(v[0] / PICO, v[1] / PICO);
        let topo = CircuitTopology::new(
            self.name.clone(),
            Range::new(self.band_ghz[0] * 1e9, self.band_ghz[1] * 1e9),
            range(self.tunable_pf.p),
            range(self.tunable_pf.s),
            arms,
        )?;
        match self.reference_ohms {
            None => Ok(topo),
            Some(r) => {
                let r = ReferenceImpedance::new(r).map_err(|e| Error::Validation(e.to_string()))?;
                Ok(topo.with_reference(r))
            }
        }
    }

    pub fn from_topology(t: &CircuitTopology) -> Self {
        let range = |r: Range| [r.lo * PICO, r.hi * PICO];
        let reference = t.reference().ohms();
        CircuitSpec {
            name: t.name().to_string(),
            band_ghz: [t.band().lo / 1e9, t.band().hi / 1e9],
            tunable_pf: TunableSpec { p: range(t.tunable_range(Slot::P)), s: range(t.tunable_range(Slot::S)) },
            reference_ohms: (reference != ReferenceImpedance::DEFAULT_OHMS).then_some(reference),
            arms: t
                .arms()
                .iter()
                .map(|a| ArmSpec {
                    orient: match a.orientation {
                        Orientation::Series => OrientSpec::Series,
                        Orientation::Shunt => OrientSpec::Shunt,
                    },
                    expr: ExprSpec::from_expr(&a.expr),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "minimal",
        "band_ghz": [1.5, 2.0],
        "tunable_pf": {"p": [0, 10], "s": [0, 10]},
        "arms": [
            {"orient": "shunt", "expr": {"SER": [{"TUNE": "P"}, {"L": 0.3}]}},
            {"orient": "series", "expr": {"PAR": [{"TUNE": "S"}, {"C": 3.0}]}}
        ]
    }"#;

    #[test]
    fn parses_units() {
        let t = CircuitTopology::from_json(MINIMAL).unwrap();
        assert_eq!(t.arms().len(), 2);
        let ElementExpr::Series(c) = &t.arms()[0].expr else { panic!() };
        assert_eq!(c[1], ElementExpr::Inductor(0.3e-9));
        let ElementExpr::Parallel(c) = &t.arms()[1].expr else { panic!() };
        assert_eq!(c[1], ElementExpr::Capacitor(3e-12));
        assert_eq!(t.band(), Range::new(1.5e9, 2e9));
        assert_eq!(t.tunable_range(Slot::S).hi, 10e-12);
    }

    #[test]
    fn missing_tune_slot_is_a_validation_error() {
        let text = MINIMAL.replace(r#"{"TUNE": "S"}"#, r#"{"C": 1.0}"#);
        assert!(matches!(CircuitTopology::from_json(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn schema_violations_are_validation_errors() {
        for bad in [
            MINIMAL.replace("\"shunt\"", "\"sideways\""),
            MINIMAL.replace("\"L\"", "\"Q\""),
            MINIMAL.replace("band_ghz", "band"),
            MINIMAL.replace("[1.5, 2.0]", "[2.0, 1.5]"),
            "not json".to_string(),
        ] {
            assert!(matches!(CircuitTopology::from_json(&bad), Err(Error::Validation(_))), "{bad}");
        }
    }

    #[test]
    fn reference_override() {
        let text = MINIMAL.replace("\"arms\"", "\"reference_ohms\": 75, \"arms\"");
        assert_eq!(CircuitTopology::from_json(&text).unwrap().reference().ohms(), 75.0);
        let text = MINIMAL.replace("\"arms\"", "\"reference_ohms\": 0, \"arms\"");
        assert!(CircuitTopology::from_json(&text).is_err());
    }
}
