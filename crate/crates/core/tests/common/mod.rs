//! Reference implementations shared by the integration tests. The oracles
//! here (`nodal_s`, `oracle_s`) never touch the crate's two-port algebra;
//! `library_s` is the crate path they are compared against.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::Rng;
use tunematch::circuit::{element_impedance, ElementExpr, TunableState};
use tunematch::network::{abcd_to_s, cascade, series_arm_abcd, shunt_arm_abcd, ReferenceImpedance, SParameters};

/// One two-terminal element, SI units.
#[derive(Debug, Clone, Copy)]
pub enum Elem {
    R(f64),
    L(f64),
    C(f64),
}

impl Elem {
    pub fn z(self, w: f64) -> C {
        match self {
            Elem::R(r) => C::new(r, 0.0),
            Elem::L(l) => C::new(0.0, w * l),
            Elem::C(c) => C::new(0.0, -1.0 / (w * c)),
        }
    }
}

/// A ladder arm made of one or two elements combined in series or parallel.
#[derive(Debug, Clone)]
pub struct TestArm {
    pub series: bool,
    pub parallel: bool,
    pub elems: Vec<Elem>,
}

impl TestArm {
    pub fn z(&self, w: f64) -> C {
        if self.parallel {
            C::new(1.0, 0.0) / self.elems.iter().map(|e| C::new(1.0, 0.0) / e.z(w)).sum::<C>()
        } else {
            self.elems.iter().map(|e| e.z(w)).sum()
        }
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<C>>, mut b: Vec<Vec<C>>) -> Vec<Vec<C>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let k = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= k * v;
            }
            for c in 0..b[0].len() {
                let v = b[col][c];
                b[r][c] -= k * v;
            }
        }
    }
    let m = b[0].len();
    let mut x = vec![vec![C::new(0.0, 0.0); m]; n];
    for r in (0..n).rev() {
        for c in 0..m {
            let mut s = b[r][c];
            for k in r + 1..n {
                s -= a[r][k] * x[k][c];
            }
            x[r][c] = s / a[r][r];
        }
    }
    x
}

/// S-parameters of a ladder by nodal analysis: build the node admittance
/// matrix, eliminate internal nodes, and map `Y` to `S` with equal
/// reference impedances. Needs at least one series arm so the two ports
/// sit on different nodes. Returns `[s11, s12, s21, s22]`.
pub fn nodal_s(arms: &[(bool, C)], z0: f64) -> [C; 4] {
    let mut edges: Vec<(usize, Option<usize>, C)> = Vec::new();
    let (mut node, mut n) = (0usize, 1usize);
    for &(series, z) in arms {
        let y = C::new(1.0, 0.0) / z;
        if series {
            edges.push((node, Some(n), y));
            node = n;
            n += 1;
        } else {
            edges.push((node, None, y));
        }
    }
    assert!(node != 0, "ladder needs a series arm");
    let zero = C::new(0.0, 0.0);
    let mut y = vec![vec![zero; n]; n];
    for (a, b, v) in edges {
        y[a][a] += v;
        if let Some(b) = b {
            y[b][b] += v;
            y[a][b] -= v;
            y[b][a] -= v;
        }
    }
    let ports = [0, node];
    let inner: Vec<usize> = (0..n).filter(|i| !ports.contains(i)).collect();
    let mut yp = [[zero; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            yp[i][j] = y[ports[i]][ports[j]];
        }
    }
    if !inner.is_empty() {
        let yii: Vec<Vec<C>> = inner.iter().map(|&r| inner.iter().map(|&c| y[r][c]).collect()).collect();
        let yip: Vec<Vec<C>> = inner.iter().map(|&r| ports.iter().map(|&c| y[r][c]).collect()).collect();
        let x = solve(yii, yip);
        for i in 0..2 {
            for j in 0..2 {
                let s: C = inner.iter().enumerate().map(|(k, &r)| y[ports[i]][r] * x[k][j]).sum();
                yp[i][j] -= s;
            }
        }
    }
    // S = (I - z0 Y)(I + z0 Y)^-1
    let one = C::new(1.0, 0.0);
    let a = [[one - yp[0][0] * z0, -yp[0][1] * z0], [-yp[1][0] * z0, one - yp[1][1] * z0]];
    let b = [[one + yp[0][0] * z0, yp[0][1] * z0], [yp[1][0] * z0, one + yp[1][1] * z0]];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let inv = [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]];
    let m = |i: usize, j: usize| a[i][0] * inv[0][j] + a[i][1] * inv[1][j];
    [m(0, 0), m(0, 1), m(1, 0), m(1, 1)]
}

pub fn rel_close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

fn random_elem<R: Rng>(rng: &mut R) -> Elem {
    match rng.random_range(0..3) {
        0 => Elem::R(rng.random_range(0.1..100.0)),
        1 => Elem::L(rng.random_range(0.1e-9..20e-9)),
        _ => Elem::C(rng.random_range(0.1e-12..20e-12)),
    }
}

/// 1 to 4 arms, at least one of them series.
pub fn random_ladder<R: Rng>(rng: &mut R) -> Vec<TestArm> {
    let n = rng.random_range(1..=4);
    let forced = rng.random_range(0..n);
    (0..n)
        .map(|i| TestArm {
            series: i == forced || rng.random_bool(0.5),
            parallel: rng.random_bool(0.5),
            elems: (0..rng.random_range(1..=2)).map(|_| random_elem(rng)).collect(),
        })
        .collect()
}

pub fn to_expr(arm: &TestArm) -> ElementExpr {
    let leaves: Vec<ElementExpr> = arm
        .elems
        .iter()
        .map(|e| match *e {
            Elem::R(v) => ElementExpr::Resistor(v),
            Elem::L(v) => ElementExpr::Inductor(v),
            Elem::C(v) => ElementExpr::Capacitor(v),
        })
        .collect();
    if arm.parallel {
        ElementExpr::Parallel(leaves)
    } else {
        ElementExpr::Series(leaves)
    }
}

/// The crate's path: element trees, arm ABCD matrices, cascade, S.
pub fn library_s(arms: &[TestArm], f: f64) -> SParameters {
    let st = TunableState::new(f, 0.0, 0.0);
    let m: Vec<_> = arms
        .iter()
        .map(|a| {
            let z = element_impedance(&to_expr(a), st).unwrap();
            if a.series {
                series_arm_abcd(z).unwrap()
            } else {
                shunt_arm_abcd(z.to_admittance().unwrap()).unwrap()
            }
        })
        .collect();
    abcd_to_s(&cascade(&m), ReferenceImpedance::default()).unwrap()
}

pub fn oracle_s(arms: &[TestArm], f: f64) -> [C; 4] {
    let w = 2.0 * std::f64::consts::PI * f;
    let zs: Vec<(bool, C)> = arms.iter().map(|a| (a.series, a.z(w))).collect();
    nodal_s(&zs, 50.0)
}

/// Straight-line forward pass over the model's weights with plain loops:
/// min-max normalization, ReLU hidden layers, and the post-activation skip
/// from hidden layer 3 into the pre-activation of hidden layer 5. Returns
/// the output and the ReLU on/off pattern.
pub fn plain_forward(model: &tunematch::nn::MlpModel, x: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let norm = model.normalization();
    let mut a: Vec<f64> = x.iter().zip(norm.min.iter().zip(&norm.max)).map(|(v, (lo, hi))| (v - lo) / (hi - lo)).collect();
    let layers = model.layers();
    let mut hidden: Vec<Vec<f64>> = Vec::new();
    let mut pattern = Vec::new();
    for (i, l) in layers.iter().enumerate() {
        let mut z = vec![0.0; l.fan_out()];
        for (o, zo) in z.iter_mut().enumerate() {
            let mut s = l.bias[o];
            for (k, ak) in a.iter().enumerate() {
                s += ak * l.weight[[k, o]];
            }
            *zo = s;
        }
        if i == layers.len() - 1 {
            return (z, pattern);
        }
        if i == 5 {
            for (zo, s) in z.iter_mut().zip(&hidden[3]) {
                *zo += s;
            }
        }
        for zo in z.iter_mut() {
            pattern.push(*zo > 0.0);
            *zo = zo.max(0.0);
        }
        hidden.push(z.clone());
        a = z;
    }
    unreachable!("model has an output layer")
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GradCheck {
    pub checked: usize,
    pub failed: usize,
    /// Entries skipped because a ReLU changed state inside the stencil.
    pub kinks: usize,
    pub worst_rel: f64,
    /// Largest analytic gradient magnitude seen.
    pub max_grad: f64,
    /// Entries whose analytic gradient is exactly zero.
    pub zeros: usize,
}

impl GradCheck {
    pub fn merge(&mut self, o: GradCheck) {
        self.checked += o.checked;
        self.failed += o.failed;
        self.kinks += o.kinks;
        self.worst_rel = self.worst_rel.max(o.worst_rel);
        self.max_grad = self.max_grad.max(o.max_grad);
        self.zeros += o.zeros;
    }
}

/// Compares analytic parameter and input gradients of `sum_k c_k out_k` at
/// one input against central differences (step `h`). Parameters are
/// sampled at most `per_layer` entries per weight matrix and bias vector;
/// `None` checks every parameter.
pub fn check_gradients(
    model: &mut tunematch::nn::MlpModel,
    x: &[f64],
    c: &[f64],
    h: f64,
    tol: f64,
    per_layer: Option<usize>,
    rng: &mut impl Rng,
) -> GradCheck {
    use ndarray::Array2;
    let xs = Array2::from_shape_vec((1, x.len()), x.to_vec()).unwrap();
    let (_, cache) = model.forward_cached(xs.view()).unwrap();
    let up = Array2::from_shape_vec((1, c.len()), c.to_vec()).unwrap();
    let g = model.backward(&cache, up.view(), true).unwrap();
    let base_pattern = plain_forward(model, x).1;
    let loss = |m: &tunematch::nn::MlpModel, x: &[f64]| {
        let (o, p) = plain_forward(m, x);
        (o.iter().zip(c).map(|(a, b)| a * b).sum::<f64>(), p)
    };
    let mut out = GradCheck::default();
    let compare = |analytic: f64, plus: (f64, Vec<bool>), minus: (f64, Vec<bool>), out: &mut GradCheck| {
        if plus.1 != base_pattern || minus.1 != base_pattern {
            out.kinks += 1;
            return;
        }
        let fd = (plus.0 - minus.0) / (2.0 * h);
        let scale = analytic.abs().max(fd.abs());
        // Absolute floor at the cancellation noise of the difference quotient.
        let noise = 1e-13 * plus.0.abs().max(minus.0.abs()).max(1e-3) / h;
        let err = (analytic - fd).abs();
        out.checked += 1;
        out.max_grad = out.max_grad.max(analytic.abs());
        if analytic == 0.0 {
            out.zeros += 1;
        }
        if scale > 1e3 * noise {
            out.worst_rel = out.worst_rel.max(err / scale);
        }
        if err > tol * scale + noise {
            out.failed += 1;
        }
    };
    for (li, _) in g.weights.iter().enumerate() {
        let (rows, cols) = model.layers()[li].weight.dim();
        let all: Vec<(usize, Option<usize>)> =
            (0..rows).flat_map(|r| (0..cols).map(move |c| (r, Some(c)))).chain((0..cols).map(|c| (c, None))).collect();
        let picks: Vec<(usize, Option<usize>)> = match per_layer {
            None => all,
            Some(k) => (0..k.min(all.len())).map(|_| all[rng.random_range(0..all.len())]).collect(),
        };
        for (r, col) in picks {
            let (analytic, orig) = match col {
                Some(c) => (g.weights[li][[r, c]], model.layers()[li].weight[[r, c]]),
                None => (g.biases[li][r], model.layers()[li].bias[r]),
            };
            let set = |m: &mut tunematch::nn::MlpModel, v: f64| match col {
                Some(c) => m.layers_mut()[li].weight[[r, c]] = v,
                None => m.layers_mut()[li].bias[r] = v,
            };
            set(model, orig + h);
            let p = loss(model, x);
            set(model, orig - h);
            let m = loss(model, x);
            set(model, orig);
            compare(analytic, p, m, &mut out);
        }
    }
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        xp[j] += h;
        let mut xm = x.to_vec();
        xm[j] -= h;
        compare(g.input[[0, j]], loss(model, &xp), loss(model, &xm), &mut out);
    }
    out
}
