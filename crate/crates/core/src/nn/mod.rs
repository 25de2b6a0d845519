//! Feed-forward surrogate networks.
//!
//! One fixed architecture family serves both the forward surrogate of the
//! circuit (3 inputs to 8 S-parameter reals) and the inverse matching
//! network (3 inputs to 2 capacitances). Hidden widths are
//! `64, 128, 256, 512, 1024, 512, 256, 128, 64`, optionally scaled down.
//! The fourth hidden layer's activation is added to the sixth hidden
//! layer's pre-activation before its ReLU. The output layer is linear.

mod adam;
mod eval;
mod io;
mod train;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_update, AdamParams, AdamState};
pub use eval::{evaluate_surrogate, DimensionError, SurrogateErrorReport};
pub use io::{deserialize_model, serialize_model, FORMAT_VERSION};
pub use train::{loss_mse, train, EpochLoss, LrSchedule, TrainingConfig, TrainingOutcome};

use crate::error::{Error, Result};

/// Full-size hidden widths.
pub const BASE_HIDDEN_WIDTHS: [usize; 9] = [64, 128, 256, 512, 1024, 512, 256, 128, 64];
/// Hidden layer (0-based) whose activation feeds the skip.
pub const SKIP_SOURCE: usize = 3;
/// Hidden layer (0-based) whose pre-activation receives the skip.
pub const SKIP_TARGET: usize = 5;
pub const INPUT_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelRole {
    /// Forward surrogate: `(f, cp, cs)` to the eight S-parameter reals.
    Recbm,
    /// Inverse network: `(f, Re gl, Im gl)` to `(cp, cs)`.
    Ims,
}

impl ModelRole {
    pub fn output_dim(self) -> usize {
        match self {
            ModelRole::Recbm => 8,
            ModelRole::Ims => 2,
        }
    }
}

/// Per-feature min-max scaling to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationSpec {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::ShapeMismatch { expected: min.len(), actual: max.len() });
        }
        for (i, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(hi > lo && lo.is_finite() && hi.is_finite()) {
                return Err(Error::DegenerateNormalization { feature: i });
            }
        }
        Ok(NormalizationSpec { min, max })
    }

    /// Column-wise extremes of `x`.
    pub fn fit(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyDataset("cannot fit normalization on zero rows"));
        }
        let mut min = Vec::with_capacity(x.ncols());
        let mut max = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            min.push(col.iter().copied().fold(f64::INFINITY, f64::min));
            max.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Self::new(min, max)
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.min.iter().zip(&self.max)).map(|(v, (lo, hi))| (v - lo) / (hi - lo)).collect()
    }

    pub fn apply_batch(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, span) = (self.min[j], self.max[j] - self.min[j]);
            col.mapv_inplace(|v| (v - lo) / span);
        }
        out
    }

    /// d(normalized)/d(raw) per feature.
    pub fn jacobian(&self) -> Vec<f64> {
        self.min.iter().zip(&self.max).map(|(lo, hi)| 1.0 / (hi - lo)).collect()
    }
}

/// Affine layer, `y = x·W + b` with `W` stored `fan_in × fan_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer { weight: Array2::zeros((fan_in, fan_out)), bias: Array1::zeros(fan_out) }
    }

    fn glorot(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weight = Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-a..=a));
        Layer { weight, bias: Array1::zeros(fan_out) }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.ncols()
    }
}

/// Hidden widths for a width scale, each at least 1.
pub fn scaled_hidden_widths(width_scale: f64) -> Vec<usize> {
    BASE_HIDDEN_WIDTHS.iter().map(|w| ((*w as f64 * width_scale).round() as usize).max(1)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    role: ModelRole,
    width_scale: f64,
    layers: Vec<Layer>,
    normalization: NormalizationSpec,
    /// Network outputs equal physical targets times this factor.
    label_scale: f64,
    /// Fingerprint of the circuit the training data came from.
    circuit_fingerprint: String,
    /// For an inverse network: fingerprint of the forward model it was
    /// built from.
    paired_fingerprint: Option<String>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Array2<f64>,
    hidden: Vec<Array2<f64>>,
}

impl ForwardCache {
    /// Post-activation output of each hidden layer, one row per sample.
    pub fn hidden(&self) -> &[Array2<f64>] {
        &self.hidden
    }
}

/// Gradients mirroring the model's layers, plus the input gradient in raw
/// (un-normalized) input units.
#[derive(Debug, Clone)]
pub struct GradientBundle {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub input: Array2<f64>,
    /// Multiply-accumulates performed by this backward pass.
    pub macs: u64,
}

impl MlpModel {
    /// Randomly initialized model: weights uniform in `±sqrt(6/(fan_in + fan_out))`,
    /// biases zero.
    pub fn new(role: ModelRole, width_scale: f64, normalization: NormalizationSpec, label_scale: f64, seed: u64) -> Result<Self> {
        let widths = Self::widths_for(role, width_scale, &normalization)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = widths.windows(2).map(|w| Layer::glorot(w[0], w[1], &mut rng)).collect();
        Self::from_layers(role, width_scale, layers, normalization, label_scale)
    }

    /// Model with every weight and bias zero.
    pub fn zeros(role: ModelRole, width_scale: f64, normalization: NormalizationSpec, label_scale: f64) -> Result<Self> {
        let widths = Self::widths_for(role, width_scale, &normalization)?;
        let layers = widths.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Self::from_layers(role, width_scale, layers, normalization, label_scale)
    }

    fn widths_for(role: ModelRole, width_scale: f64, normalization: &NormalizationSpec) -> Result<Vec<usize>> {
        if !(width_scale > 0.0 && width_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("width scale must be positive, got {width_scale}")));
        }
        if normalization.dim() != INPUT_DIM {
            return Err(Error::ShapeMismatch { expected: INPUT_DIM, actual: normalization.dim() });
        }
        let mut widths = vec![INPUT_DIM];
        widths.extend(scaled_hidden_widths(width_scale));
        widths.push(role.output_dim());
        Ok(widths)
    }

    pub fn from_layers(
        role: ModelRole,
        width_scale: f64,
        layers: Vec<Layer>,
        normalization: NormalizationSpec,
        label_scale: f64,
    ) -> Result<Self> {
        let expected = Self::widths_for(role, width_scale, &normalization)?;
        let actual: Vec<usize> = std::iter::once(layers.first().map_or(0, Layer::fan_in))
            .chain(layers.iter().map(Layer::fan_out))
            .collect();
        if actual != expected {
            return Err(Error::ModelFormat(format!("layer widths {actual:?} do not match {expected:?}")));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].fan_out() != pair[1].fan_in() || pair[0].bias.len() != pair[0].fan_out() {
                return Err(Error::ModelFormat(format!("layer {i} shapes are inconsistent")));
            }
        }
        if !(label_scale > 0.0 && label_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("label scale must be positive, got {label_scale}")));
        }
        Ok(MlpModel {
            role,
            width_scale,
            layers,
            normalization,
            label_scale,
            circuit_fingerprint: String::new(),
            paired_fingerprint: None,
        })
    }

    pub fn role(&self) -> ModelRole {
        self.role
    }

    pub fn width_scale(&self) -> f64 {
        self.width_scale
    }

    /// Input, hidden and output widths.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].fan_in()).chain(self.layers.iter().map(Layer::fan_out)).collect()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn normalization(&self) -> &NormalizationSpec {
        &self.normalization
    }

    pub fn label_scale(&self) -> f64 {
        self.label_scale
    }

    pub fn output_dim(&self) -> usize {
        self.role.output_dim()
    }

    pub fn circuit_fingerprint(&self) -> &str {
        &self.circuit_fingerprint
    }

    pub fn set_circuit_fingerprint(&mut self, fp: impl Into<String>) {
        self.circuit_fingerprint = fp.into();
    }

    pub fn paired_fingerprint(&self) -> Option<&str> {
        self.paired_fingerprint.as_deref()
    }

    pub fn set_paired_fingerprint(&mut self, fp: Option<String>) {
        self.paired_fingerprint = fp;
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    /// Multiply-accumulates of one forward pass on one sample.
    pub fn forward_macs(&self) -> u64 {
        self.layers.iter().map(|l| (l.fan_in() * l.fan_out()) as u64).sum()
    }

    /// SHA-256 of the serialized model.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        Sha256::digest(serialize_model(self)).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn check_input(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != INPUT_DIM {
            return Err(Error::InvalidArgument(format!("expected {INPUT_DIM} input features, got {}", x.ncols())));
        }
        Ok(())
    }

    /// Network output for one raw input, in network (label-scaled) units.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != INPUT_DIM {
            return Err(Error::InvalidArgument(format!("expected {INPUT_DIM} input features, got {}", x.len())));
        }
        let xs = ArrayView2::from_shape((1, INPUT_DIM), x).expect("contiguous");
        Ok(self.forward_batch(xs)?.into_raw_vec_and_offset().0)
    }

    /// Batched forward pass over raw inputs, one row per sample.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x)?.0)
    }

    /// Forward pass that also returns the activations needed by [`Self::backward`].
    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
        self.check_input(x)?;
        let input = self.normalization.apply_batch(x);
        let n_hidden = self.layers.len() - 1;
        let mut hidden: Vec<Array2<f64>> = Vec::with_capacity(n_hidden);
        for (i, layer) in self.layers[..n_hidden].iter().enumerate() {
            let prev = if i == 0 { &input } else { &hidden[i - 1] };
            let mut z = prev.dot(&layer.weight) + &layer.bias;
            if i == SKIP_TARGET {
                z += &hidden[SKIP_SOURCE];
            }
            z.mapv_inplace(|v| v.max(0.0));
            hidden.push(z);
        }
        let last = &self.layers[n_hidden];
        let out = hidden[n_hidden - 1].dot(&last.weight) + &last.bias;
        Ok((out, ForwardCache { input, hidden }))
    }

    /// Reverse pass for a scalar objective whose gradient with respect to
    /// the batch outputs is `upstream`. The input gradient is always
    /// produced; parameter gradients only when `with_parameters` is set
    /// (otherwise they are empty).
    pub fn backward(&self, cache: &ForwardCache, upstream: ArrayView2<f64>, with_parameters: bool) -> Result<GradientBundle> {
        let n = cache.input.nrows();
        if upstream.nrows() != n || upstream.ncols() != self.output_dim() {
            return Err(Error::ShapeMismatch { expected: n * self.output_dim(), actual: upstream.len() });
        }
        let n_layers = self.layers.len();
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut macs = 0u64;
        let mut skip_grad: Option<Array2<f64>> = None;
        let mut dz = upstream.to_owned();
        for i in (0..n_layers).rev() {
            let layer = &self.layers[i];
            let a_prev = if i == 0 { &cache.input } else { &cache.hidden[i - 1] };
            if with_parameters {
                weights.push(a_prev.t().dot(&dz));
                biases.push(dz.sum_axis(Axis(0)));
                macs += (n * layer.fan_in() * layer.fan_out()) as u64;
            }
            if i == SKIP_TARGET {
                skip_grad = Some(dz.clone());
            }
            let mut da = dz.dot(&layer.weight.t());
            macs += (n * layer.fan_in() * layer.fan_out()) as u64;
            if i == 0 {
                dz = da;
                break;
            }
            if i - 1 == SKIP_SOURCE {
                da += skip_grad.as_ref().expect("skip target precedes source in reverse order");
            }
            ndarray::Zip::from(&mut da).and(&cache.hidden[i - 1]).for_each(|g, &a| {
                if a <= 0.0 {
                    *g = 0.0;
                }
            });
            dz = da;
        }
        weights.reverse();
        biases.reverse();
        let jac = self.normalization.jacobian();
        for (j, mut col) in dz.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|g| g * jac[j]);
        }
        Ok(GradientBundle { weights, biases, input: dz, macs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn unit_norm() -> NormalizationSpec {
        NormalizationSpec::new(vec![0.0; 3], vec![1.0; 3]).unwrap()
    }

    #[test]
    fn widths_follow_scale() {
        assert_eq!(scaled_hidden_widths(1.0), BASE_HIDDEN_WIDTHS.to_vec());
        assert_eq!(scaled_hidden_widths(1.0 / 16.0), vec![4, 8, 16, 32, 64, 32, 16, 8, 4]);
        let m = MlpModel::new(ModelRole::Recbm, 0.125, unit_norm(), 1.0, 1).unwrap();
        assert_eq!(m.widths(), vec![3, 8, 16, 32, 64, 128, 64, 32, 16, 8, 8]);
        assert_eq!(m.widths()[SKIP_SOURCE + 1], m.widths()[SKIP_TARGET + 1]);
        let ims = MlpModel::new(ModelRole::Ims, 0.125, unit_norm(), 1e13, 1).unwrap();
        assert_eq!(*ims.widths().last().unwrap(), 2);
    }

    #[test]
    fn init_bounds_and_zero_biases() {
        let m = MlpModel::new(ModelRole::Recbm, 0.25, unit_norm(), 1.0, 9).unwrap();
        for l in m.layers() {
            let a = (6.0 / (l.fan_in() + l.fan_out()) as f64).sqrt();
            assert!(l.weight.iter().all(|w| w.abs() <= a));
            assert!(l.bias.iter().all(|b| *b == 0.0));
        }
        assert_eq!(m, MlpModel::new(ModelRole::Recbm, 0.25, unit_norm(), 1.0, 9).unwrap());
    }

    #[test]
    fn zero_model_outputs_output_bias() {
        let mut m = MlpModel::zeros(ModelRole::Recbm, 0.125, unit_norm(), 1.0).unwrap();
        assert_eq!(m.forward(&[0.3, 0.2, 0.9]).unwrap(), vec![0.0; 8]);
        let b = Array1::from_iter((0..8).map(|i| i as f64 - 3.5));
        m.layers_mut().last_mut().unwrap().bias = b.clone();
        assert_eq!(m.forward(&[0.3, 0.2, 0.9]).unwrap(), b.to_vec());
        assert_eq!(m.forward(&[-4.0, 7.0, 0.0]).unwrap(), b.to_vec());
        assert!(m.forward(&[1.0, 2.0]).is_err());

        let (_, cache) = m.forward_cached(array![[0.1, 0.2, 0.3]].view()).unwrap();
        let g = m.backward(&cache, Array2::ones((1, 8)).view(), true).unwrap();
        assert!(g.input.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn skip_is_an_identity_path_when_layers_five_and_six_vanish() {
        let mut m = MlpModel::new(ModelRole::Recbm, 0.125, unit_norm(), 1.0, 5).unwrap();
        for i in [SKIP_SOURCE + 1, SKIP_TARGET] {
            m.layers_mut()[i].weight.fill(0.0);
            m.layers_mut()[i].bias.fill(0.0);
        }
        let x = array![[0.2, 0.7, 0.4], [0.9, 0.1, 0.5]];
        let (_, cache) = m.forward_cached(x.view()).unwrap();
        // Layer-4 activations are non-negative, so the ReLU after the add
        // leaves them untouched.
        assert_eq!(cache.hidden[SKIP_TARGET], cache.hidden[SKIP_SOURCE]);
    }

    #[test]
    fn backward_cost_is_bounded_by_three_forwards() {
        let m = MlpModel::new(ModelRole::Recbm, 0.125, unit_norm(), 1.0, 3).unwrap();
        let x = Array2::from_elem((4, 3), 0.5);
        let (_, cache) = m.forward_cached(x.view()).unwrap();
        let g = m.backward(&cache, Array2::ones((4, 8)).view(), true).unwrap();
        let ratio = g.macs as f64 / (4 * m.forward_macs()) as f64;
        assert!(ratio <= 3.0, "ratio {ratio}");
        let g = m.backward(&cache, Array2::ones((4, 8)).view(), false).unwrap();
        assert!(g.weights.is_empty());
        assert_eq!(g.macs, 4 * m.forward_macs());
    }

    #[test]
    fn normalization() {
        let spec = NormalizationSpec::new(vec![1.5e9, 0.0, 0.0], vec![2e9, 1.0, 1.0]).unwrap();
        assert_eq!(spec.apply(&[1.5e9, 0.0, 0.0])[0], 0.0);
        assert_eq!(spec.apply(&[2e9, 0.0, 0.0])[0], 1.0);
        assert_eq!(spec.apply(&[1.75e9, 0.0, 0.0])[0], 0.5);
        let x = array![[1.0, 2.0, 3.0], [1.0, 4.0, 5.0]];
        assert!(matches!(NormalizationSpec::fit(x.view()), Err(Error::DegenerateNormalization { feature: 0 })));
        assert!(NormalizationSpec::fit(Array2::<f64>::zeros((0, 3)).view()).is_err());
    }
}
