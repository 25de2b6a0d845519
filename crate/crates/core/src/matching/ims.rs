use std::time::Instant;

use super::{psi_of, MatchBox, MatchResult, Surrogate};
use crate::circuit::TunableState;
use crate::error::{Error, Result};
use crate::network::ReflectionCoefficient;
use crate::nn::{MlpModel, ModelRole};

/// One inverse-network inference from `(f, Re gl, Im gl)` to a capacitor
/// pair, clamped into the box.
///
/// The inverse network must have been trained against `recbm`; the
/// pairing is checked by fingerprint. The reported `predicted_gamma` uses
/// one extra forward query that only feeds the report and is not counted.
pub fn ims_match(
    recbm: &dyn Surrogate,
    ims: &MlpModel,
    f: f64,
    gl: ReflectionCoefficient,
    bounds: MatchBox,
) -> Result<MatchResult> {
    if ims.role() != ModelRole::Ims {
        return Err(Error::InvalidArgument("inverse matching needs an ims model".into()));
    }
    match ims.paired_fingerprint() {
        Some(fp) if fp == recbm.fingerprint() => {}
        other => {
            return Err(Error::FingerprintMismatch {
                expected: recbm.fingerprint().to_string(),
                actual: other.unwrap_or("<none>").to_string(),
            })
        }
    }
    bounds.validate()?;
    let start = Instant::now();
    let y = ims.forward(&[f, gl.0.re, gl.0.im])?;
    let k = 1.0 / ims.label_scale();
    let (cp, cs) = bounds.project(y[0] * k, y[1] * k);
    let predicted_gamma = psi_of(recbm.evaluate(TunableState::new(f, cp, cs)), gl);
    Ok(MatchResult {
        cp,
        cs,
        predicted_gamma,
        true_gamma: None,
        iterations: 1,
        evaluations: 1,
        wall_time_s: start.elapsed().as_secs_f64(),
        feasible: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::reference_practical_circuit;
    use crate::matching::OracleSurrogate;
    use crate::nn::NormalizationSpec;

    fn ims_model(paired: Option<String>) -> MlpModel {
        let norm = NormalizationSpec::new(vec![1.5e9, -1.0, -1.0], vec![2e9, 1.0, 1.0]).unwrap();
        let mut m = MlpModel::new(ModelRole::Ims, 1.0 / 16.0, norm, 1e13, 9).unwrap();
        m.set_paired_fingerprint(paired);
        m
    }

    #[test]
    fn refuses_unpaired_model() {
        let o = OracleSurrogate::new(reference_practical_circuit());
        let gl = ReflectionCoefficient::new(0.1, 0.1);
        for m in [ims_model(None), ims_model(Some("something-else".into()))] {
            let r = ims_match(&o, &m, 1.7e9, gl, MatchBox::default());
            assert!(matches!(r, Err(Error::FingerprintMismatch { .. })));
        }
    }

    #[test]
    fn output_is_clamped_and_costs_one() {
        let o = OracleSurrogate::new(reference_practical_circuit());
        let mut m = ims_model(Some(o.fingerprint().to_string()));
        // Push the output far outside the box.
        m.layers_mut().last_mut().unwrap().bias.fill(1e6);
        let r = ims_match(&o, &m, 1.7e9, ReflectionCoefficient::new(0.2, -0.3), MatchBox::default()).unwrap();
        assert_eq!((r.cp, r.cs), (10e-12, 10e-12));
        assert_eq!(r.evaluations, 1);
    }
}
