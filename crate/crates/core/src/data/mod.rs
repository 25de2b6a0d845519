//! Dataset generation, splitting and persistence.

mod io;
mod scenario;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use io::{read_dataset, write_dataset, DatasetFormat};
pub use scenario::{add_measurement_noise, generate_scenarios, Scenario, ScenarioSuite, NOISE_PRESETS};

use crate::circuit::{CircuitTopology, FrequencyEvaluator, Slot};
use crate::error::{Error, Result};
use crate::nn::{MlpModel, ModelRole};

pub const SWEEP_INPUTS: [&str; 3] = ["f_hz", "cp_f", "cs_f"];
pub const SWEEP_TARGETS: [&str; 8] = ["s11_re", "s11_im", "s12_re", "s12_im", "s21_re", "s21_im", "s22_re", "s22_im"];
pub const INVERSE_INPUTS: [&str; 3] = ["f_hz", "gl_re", "gl_im"];
pub const INVERSE_TARGETS: [&str; 2] = ["cp_f", "cs_f"];

/// Rows of model inputs and targets with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub input_names: Vec<String>,
    pub target_names: Vec<String>,
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
}

impl Dataset {
    pub fn new(input_names: Vec<String>, target_names: Vec<String>, inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if inputs.ncols() != input_names.len() {
            return Err(Error::ShapeMismatch { expected: input_names.len(), actual: inputs.ncols() });
        }
        if targets.ncols() != target_names.len() {
            return Err(Error::ShapeMismatch { expected: target_names.len(), actual: targets.ncols() });
        }
        if inputs.nrows() != targets.nrows() {
            return Err(Error::ShapeMismatch { expected: inputs.nrows(), actual: targets.nrows() });
        }
        Ok(Dataset { input_names, target_names, inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            input_names: self.input_names.clone(),
            target_names: self.target_names.clone(),
            inputs: self.inputs.select(Axis(0), rows),
            targets: self.targets.select(Axis(0), rows),
        }
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Seeded shuffle, then the first `fraction` of rows (rounded) go to the
/// first partition.
pub fn split_dataset(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let n = ds.len();
    let n_first = (n as f64 * fraction).round() as usize;
    if n_first == 0 || n_first == n {
        return Err(Error::EmptyDataset("split leaves an empty partition"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((ds.select(&order[..n_first]), ds.select(&order[n_first..])))
}

/// One inclusive lattice axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl AxisSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        AxisSpec { lo, hi, step }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.step > 0.0 && self.lo <= self.hi && self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "axis {name}: need step > 0 and lo <= hi, got [{}, {}] step {}",
                self.lo, self.hi, self.step
            )));
        }
        Ok(())
    }

    /// Points counted inclusively of both endpoints.
    pub fn count(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count()).map(|i| (self.lo + i as f64 * self.step).min(self.hi)).collect()
    }
}

/// Frequency and capacitor lattices, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub f: AxisSpec,
    pub cp: AxisSpec,
    pub cs: AxisSpec,
}

impl SweepSpec {
    /// 0.05 GHz by 0.2 pF over the topology's band and ranges.
    pub fn desk(t: &CircuitTopology) -> Self {
        Self::with_steps(t, 0.05e9, 0.2e-12)
    }

    /// 0.02 GHz by 0.02 pF over the topology's band and ranges.
    pub fn paper(t: &CircuitTopology) -> Self {
        Self::with_steps(t, 0.02e9, 0.02e-12)
    }

    pub fn with_steps(t: &CircuitTopology, f_step: f64, c_step: f64) -> Self {
        let (b, p, s) = (t.band(), t.tunable_range(Slot::P), t.tunable_range(Slot::S));
        SweepSpec {
            f: AxisSpec::new(b.lo, b.hi, f_step),
            cp: AxisSpec::new(p.lo, p.hi, c_step),
            cs: AxisSpec::new(s.lo, s.hi, c_step),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.f.validate("f")?;
        self.cp.validate("cp")?;
        self.cs.validate("cs")
    }

    pub fn count(&self) -> usize {
        self.f.count() * self.cp.count() * self.cs.count()
    }
}

/// A generated dataset plus the number of lattice points dropped because
/// the evaluation was singular.
#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: Dataset,
    pub skipped: usize,
}

/// Exact S-parameters at every lattice point, rows ordered f, then cp,
/// then cs.
pub fn generate_sweep(topology: &CircuitTopology, spec: &SweepSpec) -> Result<Generated> {
    spec.validate()?;
    let (cps, css) = (spec.cp.points(), spec.cs.points());
    let per_f: Vec<Result<(Vec<[f64; 11]>, usize)>> = spec
        .f
        .points()
        .into_par_iter()
        .map(|f| {
            let ev = FrequencyEvaluator::new(topology, f)?;
            let mut rows = Vec::with_capacity(cps.len() * css.len());
            let mut skipped = 0;
            for &cp in &cps {
                for &cs in &css {
                    match ev.s_parameters(cp, cs) {
                        Ok(s) => {
                            let mut row = [0.0; 11];
                            row[..3].copy_from_slice(&[f, cp, cs]);
                            row[3..].copy_from_slice(&s.to_array());
                            rows.push(row);
                        }
                        Err(e) if e.is_singular() => skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok((rows, skipped))
        })
        .collect();
    let mut flat = Vec::new();
    let mut skipped = 0;
    for chunk in per_f {
        let (rows, s) = chunk?;
        skipped += s;
        flat.extend(rows);
    }
    let n = flat.len();
    let all = Array2::from_shape_vec((n, 11), flat.into_iter().flatten().collect()).expect("row width is 11");
    let dataset = Dataset::new(
        names(&SWEEP_INPUTS),
        names(&SWEEP_TARGETS),
        all.slice(ndarray::s![.., ..3]).to_owned(),
        all.slice(ndarray::s![.., 3..]).to_owned(),
    )?;
    Ok(Generated { dataset, skipped })
}

/// Inverse-network training data: for each lattice state, the load
/// reflection that the forward model says this state matches perfectly,
/// `gl = -s11/(s12 s21 - s11 s22)`, labelled with the state's
/// capacitances. Rows whose denominator is below 1e-9 are skipped.
pub fn generate_inverse_dataset(recbm: &MlpModel, spec: &SweepSpec) -> Result<Generated> {
    spec.validate()?;
    if recbm.role() != ModelRole::Recbm {
        return Err(Error::InvalidArgument("inverse dataset needs a forward (recbm) model".into()));
    }
    let (fs, cps, css) = (spec.f.points(), spec.cp.points(), spec.cs.points());
    let mut states = Array2::zeros((spec.count(), 3));
    let mut i = 0;
    for &f in &fs {
        for &cp in &cps {
            for &cs in &css {
                states.row_mut(i).assign(&ndarray::arr1(&[f, cp, cs]));
                i += 1;
            }
        }
    }
    const CHUNK: usize = 8192;
    let chunks: Vec<Result<Vec<[f64; 5]>>> = (0..states.nrows())
        .step_by(CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + CHUNK).min(states.nrows());
            let x = states.slice(ndarray::s![start..end, ..]);
            let y = recbm.forward_batch(x)? / recbm.label_scale();
            let mut rows = Vec::with_capacity(end - start);
            for (xr, yr) in x.outer_iter().zip(y.outer_iter()) {
                let c = |k: usize| crate::network::Complex::new(yr[2 * k], yr[2 * k + 1]);
                let (s11, s12, s21, s22) = (c(0), c(1), c(2), c(3));
                let den = s12 * s21 - s11 * s22;
                if den.norm() < 1e-9 {
                    continue;
                }
                let gl = -s11 / den;
                rows.push([xr[0], gl.re, gl.im, xr[1], xr[2]]);
            }
            Ok(rows)
        })
        .collect();
    let mut flat = Vec::new();
    for c in chunks {
        flat.extend(c?);
    }
    let n = flat.len();
    let skipped = spec.count() - n;
    let all = Array2::from_shape_vec((n, 5), flat.into_iter().flatten().collect()).expect("row width is 5");
    let dataset = Dataset::new(
        names(&INVERSE_INPUTS),
        names(&INVERSE_TARGETS),
        all.slice(ndarray::s![.., ..3]).to_owned(),
        all.slice(ndarray::s![.., 3..]).to_owned(),
    )?;
    Ok(Generated { dataset, skipped })
}
