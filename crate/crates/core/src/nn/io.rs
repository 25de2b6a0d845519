//! Model file layout (all integers and reals little-endian):
//!
//! | field                | encoding                                   |
//! |----------------------|--------------------------------------------|
//! | magic                | `b"TMNN"`                                  |
//! | format version       | u32                                        |
//! | role                 | u8, 0 = recbm, 1 = ims                     |
//! | width scale          | f64                                        |
//! | layer widths         | u32 count, then u32 each (input..output)   |
//! | normalization        | u32 count n, then n × f64 min, n × f64 max |
//! | label scale          | f64                                        |
//! | circuit fingerprint  | u32 byte length, UTF-8                     |
//! | paired fingerprint   | u32 byte length (0 = none), UTF-8          |
//! | parameters           | per layer: weight row-major `fan_in × fan_out` f64, then bias f64 |
//!
//! Nothing may follow the last bias.

use ndarray::{Array1, Array2};

use super::{Layer, MlpModel, ModelRole, NormalizationSpec};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TMNN";
pub const FORMAT_VERSION: u32 = 1;

pub fn serialize_model(model: &MlpModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 8 * model.parameter_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(match model.role() {
        ModelRole::Recbm => 0,
        ModelRole::Ims => 1,
    });
    out.extend_from_slice(&model.width_scale().to_le_bytes());
    let widths = model.widths();
    out.extend_from_slice(&(widths.len() as u32).to_le_bytes());
    for w in widths {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    let norm = model.normalization();
    out.extend_from_slice(&(norm.dim() as u32).to_le_bytes());
    for v in norm.min.iter().chain(&norm.max) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&model.label_scale().to_le_bytes());
    for s in [model.circuit_fingerprint(), model.paired_fingerprint().unwrap_or("")] {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    }
    for layer in model.layers() {
        for v in layer.weight.iter().chain(layer.bias.iter()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        let end = end.ok_or_else(|| Error::ModelFormat(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::ModelFormat("fingerprint is not UTF-8".into()))
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn deserialize_model(bytes: &[u8]) -> Result<MlpModel> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::ModelFormat("not a model file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!("unsupported format version {version}, expected {FORMAT_VERSION}")));
    }
    let role = match r.take(1)?[0] {
        0 => ModelRole::Recbm,
        1 => ModelRole::Ims,
        other => return Err(Error::ModelFormat(format!("unknown role tag {other}"))),
    };
    let width_scale = r.f64()?;
    let n_widths = r.u32()? as usize;
    if !(2..=64).contains(&n_widths) {
        return Err(Error::ModelFormat(format!("implausible layer count {n_widths}")));
    }
    let widths = (0..n_widths).map(|_| r.u32().map(|w| w as usize)).collect::<Result<Vec<_>>>()?;
    let n_norm = r.u32()? as usize;
    if n_norm > 64 {
        return Err(Error::ModelFormat(format!("implausible feature count {n_norm}")));
    }
    let min = r.reals(n_norm)?;
    let max = r.reals(n_norm)?;
    let normalization = NormalizationSpec::new(min, max).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let label_scale = r.f64()?;
    let circuit_fp = r.string()?;
    let paired_fp = r.string()?;
    let mut layers = Vec::with_capacity(n_widths - 1);
    for w in widths.windows(2) {
        let weight = r.reals(w[0] * w[1])?;
        let bias = r.reals(w[1])?;
        layers.push(Layer {
            weight: Array2::from_shape_vec((w[0], w[1]), weight).expect("length matches shape"),
            bias: Array1::from(bias),
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::ModelFormat(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let mut model = MlpModel::from_layers(role, width_scale, layers, normalization, label_scale)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    model.set_circuit_fingerprint(circuit_fp);
    model.set_paired_fingerprint((!paired_fp.is_empty()).then_some(paired_fp));
    Ok(model)
}

impl MlpModel {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serialize_model(self)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        deserialize_model(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> MlpModel {
        let norm = NormalizationSpec::new(vec![1.5e9, 0.0, 0.0], vec![2e9, 1e-11, 1e-11]).unwrap();
        let mut m = MlpModel::new(ModelRole::Ims, 0.125, norm, 1e13, 7).unwrap();
        m.set_circuit_fingerprint("abc");
        m.set_paired_fingerprint(Some("def".into()));
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let back = deserialize_model(&serialize_model(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.fingerprint(), m.fingerprint());
    }

    #[test]
    fn rejects_corruption() {
        let bytes = serialize_model(&model());
        assert!(matches!(deserialize_model(&bytes[..bytes.len() - 1]), Err(Error::ModelFormat(_))));
        assert!(matches!(deserialize_model(&bytes[..10]), Err(Error::ModelFormat(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(deserialize_model(&bad), Err(Error::ModelFormat(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(deserialize_model(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(deserialize_model(&long).is_err());
    }
}
