use serde::{Deserialize, Serialize};

use super::MlpModel;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{ecdf, EcdfPoint};

/// Relative errors are undefined for targets smaller than this.
pub const MRE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionError {
    pub name: String,
    pub mae: f64,
    pub mre: f64,
    /// Samples left out of the relative error because `|y|` was below [`MRE_FLOOR`].
    pub mre_excluded: usize,
}

/// Held-out accuracy of a model in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateErrorReport {
    pub samples: usize,
    pub dimensions: Vec<DimensionError>,
    pub overall_mae: f64,
    pub overall_mre: f64,
    pub abs_error_ecdf: Vec<EcdfPoint>,
    pub rel_error_ecdf: Vec<EcdfPoint>,
}

/// MAE and MRE per output dimension and overall, plus error ECDFs thinned
/// to at most `ecdf_points` rows each.
pub fn evaluate_surrogate(model: &MlpModel, testset: &Dataset, ecdf_points: usize) -> Result<SurrogateErrorReport> {
    if testset.len() == 0 {
        return Err(Error::EmptyDataset("test set is empty"));
    }
    let d = model.output_dim();
    if testset.targets.ncols() != d {
        return Err(Error::ShapeMismatch { expected: d, actual: testset.targets.ncols() });
    }
    let pred = model.forward_batch(testset.inputs.view())? / model.label_scale();
    let mut abs_all = Vec::with_capacity(pred.len());
    let mut rel_all = Vec::with_capacity(pred.len());
    let mut dimensions = Vec::with_capacity(d);
    for j in 0..d {
        let (mut abs_sum, mut rel_sum, mut rel_n, mut excluded) = (0.0, 0.0, 0usize, 0usize);
        for i in 0..testset.len() {
            let y = testset.targets[[i, j]];
            let e = (pred[[i, j]] - y).abs();
            abs_sum += e;
            abs_all.push(e);
            if y.abs() < MRE_FLOOR {
                excluded += 1;
            } else {
                rel_sum += e / y.abs();
                rel_n += 1;
                rel_all.push(e / y.abs());
            }
        }
        dimensions.push(DimensionError {
            name: testset.target_names[j].clone(),
            mae: abs_sum / testset.len() as f64,
            mre: if rel_n > 0 { rel_sum / rel_n as f64 } else { f64::NAN },
            mre_excluded: excluded,
        });
    }
    let overall_mae = abs_all.iter().sum::<f64>() / abs_all.len() as f64;
    let overall_mre = if rel_all.is_empty() { f64::NAN } else { rel_all.iter().sum::<f64>() / rel_all.len() as f64 };
    Ok(SurrogateErrorReport {
        samples: testset.len(),
        dimensions,
        overall_mae,
        overall_mre,
        abs_error_ecdf: ecdf(&abs_all, ecdf_points),
        rel_error_ecdf: ecdf(&rel_all, ecdf_points),
    })
}
