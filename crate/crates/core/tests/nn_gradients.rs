mod common;

use common::{check_gradients, plain_forward, GradCheck};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tunematch::nn::{deserialize_model, serialize_model, MlpModel, ModelRole, NormalizationSpec};

fn unit_norm() -> NormalizationSpec {
    NormalizationSpec::new(vec![0.0; 3], vec![1.0; 3]).unwrap()
}

/// Model with every weight and bias drawn from N(0, 0.1).
fn gaussian_model(role: ModelRole, scale: f64, seed: u64) -> MlpModel {
    let mut m = MlpModel::zeros(role, scale, unit_norm(), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, 0.1).unwrap();
    for l in m.layers_mut() {
        l.weight.mapv_inplace(|_| d.sample(&mut rng));
        l.bias.mapv_inplace(|_| d.sample(&mut rng));
    }
    m
}

#[test]
fn tiny_model_forward_matches_plain_loops() {
    let m = gaussian_model(ModelRole::Recbm, 1.0 / 16.0, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let x: Vec<f64> = (0..3).map(|_| rng.random()).collect();
        let a = m.forward(&x).unwrap();
        let (b, _) = plain_forward(&m, &x);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0), "{p} vs {q}");
        }
    }
}

#[test]
fn glorot_model_forward_matches_plain_loops_with_normalization() {
    let norm = NormalizationSpec::new(vec![1e9, 0.0, 0.0], vec![3e9, 1e-11, 1e-11]).unwrap();
    let m = MlpModel::new(ModelRole::Ims, 0.125, norm, 1e13, 8).unwrap();
    let x = [1.75e9, 3e-12, 7e-12];
    let (b, _) = plain_forward(&m, &x);
    let a = m.forward(&x).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
    }
}

#[test]
fn gradients_match_central_differences() {
    let mut total = GradCheck::default();
    for case in 0..10u64 {
        let mut m = gaussian_model(ModelRole::Recbm, 1.0 / 16.0, 100 + case);
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let x: Vec<f64> = (0..3).map(|_| rng.random()).collect();
        let c: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let per_layer = if case == 0 { None } else { Some(32) };
        total.merge(check_gradients(&mut m, &x, &c, 1e-5, 1e-4, per_layer, &mut rng));
    }
    println!("{total:?}");
    assert_eq!(total.failed, 0, "{total:?}");
    assert!(total.checked > 1000 && total.kinks * 100 < total.checked, "{total:?}");
}

#[test]
fn ims_gradients_match_central_differences() {
    let mut m = gaussian_model(ModelRole::Ims, 1.0 / 16.0, 77);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let r = check_gradients(&mut m, &[0.2, 0.6, 0.9], &[0.7, -1.3], 1e-5, 1e-4, None, &mut rng);
    assert_eq!(r.failed, 0, "{r:?}");
}

#[test]
fn batch_gradients_are_sums_of_row_gradients() {
    let m = gaussian_model(ModelRole::Recbm, 1.0 / 16.0, 5);
    let x = ndarray::array![[0.1, 0.5, 0.9], [0.8, 0.3, 0.2]];
    let up = Array2::from_shape_fn((2, 8), |(i, j)| (i as f64 + 1.0) * (j as f64 - 3.0) / 7.0);
    let (_, cache) = m.forward_cached(x.view()).unwrap();
    let both = m.backward(&cache, up.view(), true).unwrap();
    let mut sum: Option<Vec<Array2<f64>>> = None;
    for i in 0..2 {
        let xi = x.slice(ndarray::s![i..i + 1, ..]);
        let (_, c) = m.forward_cached(xi).unwrap();
        let g = m.backward(&c, up.slice(ndarray::s![i..i + 1, ..]), true).unwrap();
        assert_eq!(g.input.row(0), both.input.row(i));
        sum = Some(match sum {
            None => g.weights,
            Some(s) => s.iter().zip(&g.weights).map(|(a, b)| a + b).collect(),
        });
    }
    for (a, b) in sum.unwrap().iter().zip(&both.weights) {
        assert!(a.iter().zip(b).all(|(p, q)| (p - q).abs() <= 1e-12 * q.abs().max(1.0)));
    }
}

#[test]
fn serialization_is_bit_exact() {
    let mut m = gaussian_model(ModelRole::Ims, 0.125, 9);
    m.set_circuit_fingerprint("abc");
    m.set_paired_fingerprint(Some("def".into()));
    let bytes = serialize_model(&m);
    let back = deserialize_model(&bytes).unwrap();
    assert_eq!(back, m);
    assert_eq!(serialize_model(&back), bytes);
    assert_eq!(back.fingerprint(), m.fingerprint());
    let mut truncated = bytes.clone();
    truncated.truncate(bytes.len() - 3);
    assert!(deserialize_model(&truncated).is_err());
}

#[test]
fn fingerprint_tracks_weights() {
    let m = gaussian_model(ModelRole::Recbm, 0.125, 1);
    let mut n = m.clone();
    n.layers_mut()[4].weight[[0, 0]] += 1e-12;
    assert_ne!(m.fingerprint(), n.fingerprint());
}

proptest! {
    #[test]
    fn batch_rows_equal_single_forward(rows in prop::collection::vec(prop::array::uniform3(0.0f64..1.0), 1..8), seed in 0u64..50) {
        let m = gaussian_model(ModelRole::Recbm, 1.0 / 16.0, seed);
        let x = Array2::from_shape_fn((rows.len(), 3), |(i, j)| rows[i][j]);
        let batch = m.forward_batch(x.view()).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let single = m.forward(r).unwrap();
            for (a, b) in single.iter().zip(batch.row(i)) {
                prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
            }
        }
    }
}
