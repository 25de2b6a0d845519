use ndarray::Array2;

use crate::circuit::{simulate, CircuitTopology, FrequencyEvaluator, TunableState};
use crate::error::{Error, Result};
use crate::network::{input_reflection, objective_psi_gradient, ReferenceImpedance, ReflectionCoefficient, SParameters};
use crate::nn::{MlpModel, ModelRole};

/// Anything that maps an operating state to S-parameters. Capacitances
/// are in farads.
pub trait Surrogate: Sync {
    fn reference(&self) -> ReferenceImpedance;

    fn evaluate(&self, state: TunableState) -> Result<SParameters>;

    /// One query per point, all at frequency `f`.
    fn evaluate_batch(&self, f: f64, points: &[(f64, f64)]) -> Vec<Result<SParameters>> {
        points.iter().map(|&(cp, cs)| self.evaluate(TunableState::new(f, cp, cs))).collect()
    }

    /// Gradient of `|Γin|` with respect to `(cp, cs)`, per farad.
    fn psi_gradient(&self, state: TunableState, gl: ReflectionCoefficient) -> Result<[f64; 2]>;

    /// Forward-evaluation equivalents charged for one [`Self::psi_gradient`] call.
    fn gradient_cost(&self) -> u64;

    /// Identifies the model behind the surrogate; inverse networks are
    /// paired against this.
    fn fingerprint(&self) -> &str;
}

/// The exact circuit used as its own surrogate.
#[derive(Debug, Clone)]
pub struct OracleSurrogate {
    topology: CircuitTopology,
    fingerprint: String,
    /// Finite-difference step in farads.
    fd_step: f64,
}

impl OracleSurrogate {
    pub fn new(topology: CircuitTopology) -> Self {
        let fingerprint = format!("oracle:{}", topology.fingerprint());
        OracleSurrogate { topology, fingerprint, fd_step: 1e-16 }
    }

    pub fn topology(&self) -> &CircuitTopology {
        &self.topology
    }
}

impl Surrogate for OracleSurrogate {
    fn reference(&self) -> ReferenceImpedance {
        self.topology.reference()
    }

    fn evaluate(&self, state: TunableState) -> Result<SParameters> {
        simulate(&self.topology, state)
    }

    fn evaluate_batch(&self, f: f64, points: &[(f64, f64)]) -> Vec<Result<SParameters>> {
        match FrequencyEvaluator::new(&self.topology, f) {
            Ok(ev) => points.iter().map(|&(cp, cs)| ev.s_parameters(cp, cs)).collect(),
            Err(e) => {
                let msg = e.to_string();
                points.iter().map(|_| Err(Error::InvalidArgument(msg.clone()))).collect()
            }
        }
    }

    /// Central differences, two evaluations per axis.
    fn psi_gradient(&self, state: TunableState, gl: ReflectionCoefficient) -> Result<[f64; 2]> {
        let h = self.fd_step;
        let psi = |cp: f64, cs: f64| -> Result<f64> {
            let s = simulate(&self.topology, TunableState::new(state.f, cp, cs))?;
            Ok(input_reflection(&s, gl)?.magnitude())
        };
        let dp = (psi(state.cp + h, state.cs)? - psi(state.cp - h, state.cs)?) / (2.0 * h);
        let ds = (psi(state.cp, state.cs + h)? - psi(state.cp, state.cs - h)?) / (2.0 * h);
        Ok([dp, ds])
    }

    fn gradient_cost(&self) -> u64 {
        4
    }

    fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

/// A trained forward network used as the surrogate.
#[derive(Debug, Clone)]
pub struct NetworkSurrogate {
    model: MlpModel,
    reference: ReferenceImpedance,
    fingerprint: String,
}

impl NetworkSurrogate {
    pub fn new(model: MlpModel, reference: ReferenceImpedance) -> Result<Self> {
        if model.role() != ModelRole::Recbm {
            return Err(Error::InvalidArgument("surrogate needs a forward (recbm) model".into()));
        }
        let fingerprint = model.fingerprint();
        Ok(NetworkSurrogate { model, reference, fingerprint })
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }

    fn to_s(&self, row: &[f64]) -> SParameters {
        let k = 1.0 / self.model.label_scale();
        let mut v = [0.0; 8];
        for (o, r) in v.iter_mut().zip(row) {
            *o = r * k;
        }
        SParameters::from_array(&v, self.reference)
    }
}

impl Surrogate for NetworkSurrogate {
    fn reference(&self) -> ReferenceImpedance {
        self.reference
    }

    fn evaluate(&self, state: TunableState) -> Result<SParameters> {
        let y = self.model.forward(&[state.f, state.cp, state.cs])?;
        Ok(self.to_s(&y))
    }

    fn evaluate_batch(&self, f: f64, points: &[(f64, f64)]) -> Vec<Result<SParameters>> {
        let x = Array2::from_shape_fn((points.len(), 3), |(i, j)| match j {
            0 => f,
            1 => points[i].0,
            _ => points[i].1,
        });
        match self.model.forward_batch(x.view()) {
            Ok(y) => y.outer_iter().map(|r| Ok(self.to_s(r.as_slice().expect("row-major output")))).collect(),
            Err(e) => {
                let msg = e.to_string();
                points.iter().map(|_| Err(Error::InvalidArgument(msg.clone()))).collect()
            }
        }
    }

    /// Reverse mode through the objective and the network.
    fn psi_gradient(&self, state: TunableState, gl: ReflectionCoefficient) -> Result<[f64; 2]> {
        let x = ndarray::arr2(&[[state.f, state.cp, state.cs]]);
        let (y, cache) = self.model.forward_cached(x.view())?;
        let s = self.to_s(y.row(0).as_slice().expect("row-major output"));
        let (_, dpsi) = objective_psi_gradient(&s, gl)?;
        let k = 1.0 / self.model.label_scale();
        let upstream = Array2::from_shape_fn((1, 8), |(_, j)| dpsi[j] * k);
        let g = self.model.backward(&cache, upstream.view(), false)?;
        Ok([g.input[[0, 1]], g.input[[0, 2]]])
    }

    fn gradient_cost(&self) -> u64 {
        1
    }

    fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

/// Per-call evaluation counter around a surrogate.
pub struct Counted<'a> {
    inner: &'a dyn Surrogate,
    evaluations: u64,
}

impl<'a> Counted<'a> {
    pub fn new(inner: &'a dyn Surrogate) -> Self {
        Counted { inner, evaluations: 0 }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn inner(&self) -> &'a dyn Surrogate {
        self.inner
    }

    pub fn evaluate(&mut self, state: TunableState) -> Result<SParameters> {
        self.evaluations += 1;
        self.inner.evaluate(state)
    }

    pub fn evaluate_batch(&mut self, f: f64, points: &[(f64, f64)]) -> Vec<Result<SParameters>> {
        self.evaluations += points.len() as u64;
        self.inner.evaluate_batch(f, points)
    }

    pub fn psi_gradient(&mut self, state: TunableState, gl: ReflectionCoefficient) -> Result<[f64; 2]> {
        self.evaluations += self.inner.gradient_cost();
        self.inner.psi_gradient(state, gl)
    }
}
