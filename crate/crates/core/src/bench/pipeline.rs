use std::path::Path;

use super::config::RunConfig;
use super::report::write_text;
use crate::circuit::CircuitTopology;
use crate::data::{generate_inverse_dataset, generate_sweep, split_dataset, Dataset, Generated};
use crate::error::{Error, Result};
use crate::nn::{train, MlpModel, ModelRole, NormalizationSpec, SurrogateErrorReport, TrainingOutcome};

/// Label scale for inverse models: farads to tenths of a picofarad.
pub const IMS_LABEL_SCALE: f64 = 1e13;
pub const RECBM_LABEL_SCALE: f64 = 1.0;

/// Share of every generated dataset held back from training.
pub const TEST_FRACTION: f64 = 0.1;
const TEST_SALT: u64 = 0x7465_7374;

pub fn label_scale(role: ModelRole) -> f64 {
    match role {
        ModelRole::Recbm => RECBM_LABEL_SCALE,
        ModelRole::Ims => IMS_LABEL_SCALE,
    }
}

/// A generated dataset with its seeded train/test partition.
#[derive(Debug, Clone)]
pub struct Partitioned {
    pub generated: Generated,
    pub train: Dataset,
    pub test: Dataset,
}

fn partition(generated: Generated, seed: u64) -> Result<Partitioned> {
    let (train, test) = split_dataset(&generated.dataset, 1.0 - TEST_FRACTION, seed ^ TEST_SALT)?;
    Ok(Partitioned { generated, train, test })
}

pub fn sweep_datasets(cfg: &RunConfig, topology: &CircuitTopology) -> Result<Partitioned> {
    partition(generate_sweep(topology, &cfg.sweep.spec(topology))?, cfg.seed)
}

/// Inverse pairs predicted by `recbm` over the configured sweep lattice.
pub fn inverse_datasets(cfg: &RunConfig, topology: &CircuitTopology, recbm: &MlpModel) -> Result<Partitioned> {
    partition(generate_inverse_dataset(recbm, &cfg.sweep.spec(topology))?, cfg.seed)
}

/// Fresh model of the configured width trained on `data`. Inverse models
/// record the fingerprint of the forward model they were built from.
pub fn train_model(
    role: ModelRole,
    cfg: &RunConfig,
    data: &Dataset,
    circuit_fingerprint: &str,
    paired: Option<&MlpModel>,
) -> Result<(MlpModel, TrainingOutcome)> {
    if data.targets.ncols() != role.output_dim() {
        return Err(Error::ShapeMismatch { expected: role.output_dim(), actual: data.targets.ncols() });
    }
    if role == ModelRole::Ims && paired.is_none() {
        return Err(Error::InvalidArgument("an ims model must be paired with its recbm model".into()));
    }
    let norm = NormalizationSpec::fit(data.inputs.view())?;
    let mut model = MlpModel::new(role, cfg.width_scale, norm, label_scale(role), cfg.training.seed)?;
    model.set_circuit_fingerprint(circuit_fingerprint);
    model.set_paired_fingerprint(paired.map(|m| m.fingerprint()));
    let outcome = train(&mut model, data, &cfg.training)?;
    Ok((model, outcome))
}

/// `epoch,train_mse,val_mse`, one row per epoch starting at 0.
pub fn write_loss_history(path: &Path, outcome: &TrainingOutcome) -> Result<()> {
    let mut text = String::from("epoch,train_mse,val_mse\n");
    for e in &outcome.history {
        text.push_str(&format!("{},{},{}\n", e.epoch, e.train_mse, e.val_mse));
    }
    write_text(path, &text)
}

/// `eval.json` plus `eval.csv` with one row per output dimension and a
/// final `overall` row, and the two error ECDF tables.
pub fn write_eval_report(dir: &Path, report: &SurrogateErrorReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_text(&dir.join("eval.json"), &serde_json::to_string_pretty(report)?)?;
    let mut text = String::from("dimension,mae,mre\n");
    for d in &report.dimensions {
        text.push_str(&format!("{},{},{}\n", d.name, d.mae, d.mre));
    }
    text.push_str(&format!("overall,{},{}\n", report.overall_mae, report.overall_mre));
    write_text(&dir.join("eval.csv"), &text)?;
    for (name, pts) in [("abs_error", &report.abs_error_ecdf), ("rel_error", &report.rel_error_ecdf)] {
        let mut t = format!("{name},fraction\n");
        for p in pts {
            t.push_str(&format!("{},{}\n", p.value, p.fraction));
        }
        write_text(&dir.join(format!("ecdf_{name}.csv")), &t)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::{Profile, SweepSteps};
    use crate::circuit::reference_practical_circuit;
    use crate::nn::{evaluate_surrogate, TrainingConfig};

    fn tiny_cfg() -> RunConfig {
        RunConfig {
            width_scale: 1.0 / 16.0,
            sweep: SweepSteps { f_step_ghz: 0.25, c_step_pf: 2.5 },
            training: TrainingConfig { epochs: 2, batch_size: 16, ..TrainingConfig::desk() },
            ..RunConfig::for_profile(Profile::Desk)
        }
    }

    #[test]
    fn forward_then_inverse_pairing() {
        let c = reference_practical_circuit();
        let cfg = tiny_cfg();
        let sweep = sweep_datasets(&cfg, &c).unwrap();
        assert_eq!(sweep.train.len() + sweep.test.len(), 3 * 5 * 5);
        let (recbm, out) = train_model(ModelRole::Recbm, &cfg, &sweep.train, &c.fingerprint(), None).unwrap();
        assert_eq!(out.history.len(), 3);
        assert_eq!(recbm.circuit_fingerprint(), c.fingerprint());
        let inv = inverse_datasets(&cfg, &c, &recbm).unwrap();
        let (ims, _) = train_model(ModelRole::Ims, &cfg, &inv.train, &c.fingerprint(), Some(&recbm)).unwrap();
        assert_eq!(ims.paired_fingerprint(), Some(recbm.fingerprint().as_str()));
        assert_eq!(ims.label_scale(), IMS_LABEL_SCALE);

        let dir = tempfile::tempdir().unwrap();
        write_loss_history(&dir.path().join("loss.csv"), &out).unwrap();
        let loss = std::fs::read_to_string(dir.path().join("loss.csv")).unwrap();
        assert!(loss.starts_with("epoch,train_mse,val_mse\n0,"));
        let rep = evaluate_surrogate(&recbm, &sweep.test, 50).unwrap();
        write_eval_report(dir.path(), &rep).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 8 + 1);
    }

    #[test]
    fn ims_needs_a_partner() {
        let c = reference_practical_circuit();
        let ds = Dataset::new(
            crate::data::INVERSE_INPUTS.iter().map(|s| s.to_string()).collect(),
            crate::data::INVERSE_TARGETS.iter().map(|s| s.to_string()).collect(),
            ndarray::Array2::from_shape_fn((4, 3), |(i, j)| (i + j) as f64),
            ndarray::Array2::zeros((4, 2)),
        )
        .unwrap();
        assert!(train_model(ModelRole::Ims, &tiny_cfg(), &ds, &c.fingerprint(), None).is_err());
    }
}
