use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{psi_of, Counted, MatchBox, MatchResult, Surrogate};
use crate::error::{Error, Result};
use crate::network::ReflectionCoefficient;

/// Simulated-annealing particle swarm settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SapsoConfig {
    pub particles: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Temperature multiplier per iteration.
    pub cooling: f64,
    pub max_iterations: u64,
    /// Stop once the global best drops below this.
    pub threshold: f64,
    /// Added to the fitness of particles outside the box.
    pub penalty: f64,
    pub bounds: MatchBox,
    pub seed: u64,
}

impl Default for SapsoConfig {
    fn default() -> Self {
        SapsoConfig {
            particles: 50,
            kappa1: 2.05,
            kappa2: 2.05,
            cooling: 0.5,
            max_iterations: 100,
            threshold: 0.005,
            penalty: 2000.0,
            bounds: MatchBox::default(),
            seed: 42,
        }
    }
}

impl SapsoConfig {
    pub fn validate(&self) -> Result<()> {
        let kappa = self.kappa1 + self.kappa2;
        if !(kappa > 4.0) {
            return Err(Error::Validation(format!("kappa1 + kappa2 must exceed 4, got {kappa}")));
        }
        if self.particles < 2 {
            return Err(Error::Validation(format!("need at least 2 particles, got {}", self.particles)));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::Validation(format!("cooling factor must lie in (0, 1), got {}", self.cooling)));
        }
        if !(self.penalty > 0.0) {
            return Err(Error::Validation(format!("penalty must be positive, got {}", self.penalty)));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::Validation(format!("threshold must be non-negative, got {}", self.threshold)));
        }
        self.bounds.validate()
    }
}

/// `χ = 2 / |2 - κ - sqrt(κ² - 4κ)|` with `κ = κ1 + κ2`.
pub fn constriction_factor(kappa1: f64, kappa2: f64) -> f64 {
    let k = kappa1 + kappa2;
    2.0 / (2.0 - k - (k * k - 4.0 * k).sqrt()).abs()
}

/// Index `k` with `Q[k-1] < u <= Q[k]` over normalized weights; uniform
/// when the weights are unusable.
fn roulette<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random();
    if !(total > 0.0 && total.is_finite()) {
        return ((u * weights.len() as f64) as usize).min(weights.len() - 1);
    }
    let mut q = 0.0;
    for (k, w) in weights.iter().enumerate() {
        q += w / total;
        if u <= q {
            return k;
        }
    }
    weights.len() - 1
}

/// Searches the box for the pair minimising `|Γin|` as seen by the
/// surrogate. The guide for each particle's social term is drawn from the
/// current positions by roulette over Metropolis weights of the personal
/// bests.
pub fn sapso_match<R: Rng>(
    surrogate: &dyn Surrogate,
    f: f64,
    gl: ReflectionCoefficient,
    cfg: &SapsoConfig,
    rng: &mut R,
) -> Result<MatchResult> {
    cfg.validate()?;
    if !(gl.0.re.is_finite() && gl.0.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("load reflection must be finite, got {}", gl.0)));
    }
    let start = Instant::now();
    let b = cfg.bounds;
    let n = cfg.particles;
    let chi = constriction_factor(cfg.kappa1, cfg.kappa2);
    let mut counter = Counted::new(surrogate);

    let mut x: Vec<[f64; 2]> = (0..n)
        .map(|_| [b.cp.lo + b.cp.width() * rng.random::<f64>(), b.cs.lo + b.cs.width() * rng.random::<f64>()])
        .collect();
    let mut v: Vec<[f64; 2]> = (0..n)
        .map(|_| [(rng.random::<f64>() - 0.5) * b.cp.width(), (rng.random::<f64>() - 0.5) * b.cs.width()])
        .collect();

    let fitness = |counter: &mut Counted<'_>, x: &[[f64; 2]]| -> Vec<f64> {
        let pts: Vec<(f64, f64)> = x.iter().map(|p| (p[0], p[1])).collect();
        counter
            .evaluate_batch(f, &pts)
            .into_iter()
            .zip(&pts)
            .map(|(s, &(cp, cs))| {
                let psi = psi_of(s, gl);
                if b.contains(cp, cs) {
                    psi
                } else {
                    psi + cfg.penalty
                }
            })
            .collect()
    };

    let mut pbest_fit = fitness(&mut counter, &x);
    let mut pbest = x.clone();
    let mut g = 0;
    for i in 1..n {
        if pbest_fit[i] < pbest_fit[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g];
    let mut gbest_fit = pbest_fit[g];
    // A perfect initial particle gives T = 0 and stops at the first check.
    let mut temperature = -gbest_fit / 0.2f64.ln();

    let mut iterations = 0;
    let mut weights = vec![0.0; n];
    while iterations < cfg.max_iterations && !(gbest_fit < cfg.threshold) {
        for (w, &fit) in weights.iter_mut().zip(&pbest_fit) {
            *w = (-(fit - gbest_fit) / temperature).exp();
        }
        for i in 0..n {
            let guide = x[roulette(&weights, rng)];
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            for d in 0..2 {
                v[i][d] = chi * (v[i][d] + cfg.kappa1 * r1 * (pbest[i][d] - x[i][d]) + cfg.kappa2 * r2 * (guide[d] - x[i][d]));
            }
        }
        for (xi, vi) in x.iter_mut().zip(&v) {
            xi[0] += vi[0];
            xi[1] += vi[1];
        }
        let fit = fitness(&mut counter, &x);
        for i in 0..n {
            if fit[i] < pbest_fit[i] {
                pbest_fit[i] = fit[i];
                pbest[i] = x[i];
                if fit[i] < gbest_fit {
                    gbest_fit = fit[i];
                    gbest = x[i];
                }
            }
        }
        temperature *= cfg.cooling;
        iterations += 1;
    }

    let (cp, cs) = b.project(gbest[0], gbest[1]);
    Ok(MatchResult {
        cp,
        cs,
        predicted_gamma: gbest_fit,
        true_gamma: None,
        iterations,
        evaluations: counter.evaluations(),
        wall_time_s: start.elapsed().as_secs_f64(),
        feasible: true,
    })
}
