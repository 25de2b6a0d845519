use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{psi_of, Counted, MatchBox, MatchResult, Surrogate};
use crate::circuit::TunableState;
use crate::error::{Error, Result};
use crate::network::ReflectionCoefficient;
use crate::nn::{adam_update, AdamParams, AdamState};

/// Gradient-descent matcher settings. The iterate and the learning rate
/// are in picofarads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamMatchConfig {
    pub initial_pf: [f64; 2],
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iterations: u64,
    pub threshold: f64,
    pub bounds: MatchBox,
}

impl Default for AdamMatchConfig {
    fn default() -> Self {
        AdamMatchConfig {
            initial_pf: [5.0, 5.0],
            learning_rate: 0.013,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_iterations: 500,
            threshold: 0.005,
            bounds: MatchBox::default(),
        }
    }
}

impl AdamMatchConfig {
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        let [p, s] = self.initial_pf;
        if !self.bounds.contains(p * 1e-12, s * 1e-12) {
            return Err(Error::Validation(format!("initial point ({p}, {s}) pF lies outside the box")));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Validation(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::Validation("decay rates must lie in [0, 1)".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Adam on `ψ(F̂(f, θ), gl)` with projection onto the box after every step.
/// Each iteration costs one gradient and one evaluation.
pub fn adadam_match(
    surrogate: &dyn Surrogate,
    f: f64,
    gl: ReflectionCoefficient,
    cfg: &AdamMatchConfig,
) -> Result<MatchResult> {
    cfg.validate()?;
    let start = Instant::now();
    let adam = AdamParams { learning_rate: cfg.learning_rate, beta1: cfg.beta1, beta2: cfg.beta2, epsilon: cfg.epsilon };
    let lo = [cfg.bounds.cp.lo * 1e12, cfg.bounds.cs.lo * 1e12];
    let hi = [cfg.bounds.cp.hi * 1e12, cfg.bounds.cs.hi * 1e12];
    let mut counter = Counted::new(surrogate);
    let mut state = AdamState::new(2);
    let mut theta = cfg.initial_pf;
    let mut psi = f64::NAN;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let at = TunableState::new(f, theta[0] * 1e-12, theta[1] * 1e-12);
        let g = counter.psi_gradient(at, gl)?;
        // Per farad to per picofarad.
        let g = [g[0] * 1e-12, g[1] * 1e-12];
        if !(g[0].is_finite() && g[1].is_finite()) {
            return Err(Error::NonFiniteGradient(iterations as usize));
        }
        adam_update(&mut theta, &g, &mut state, &adam);
        for d in 0..2 {
            theta[d] = theta[d].clamp(lo[d], hi[d]);
        }
        psi = psi_of(counter.evaluate(TunableState::new(f, theta[0] * 1e-12, theta[1] * 1e-12)), gl);
        if psi < cfg.threshold {
            break;
        }
    }
    let (cp, cs) = cfg.bounds.project(theta[0] * 1e-12, theta[1] * 1e-12);
    Ok(MatchResult {
        cp,
        cs,
        predicted_gamma: psi,
        true_gamma: None,
        iterations,
        evaluations: counter.evaluations(),
        wall_time_s: start.elapsed().as_secs_f64(),
        feasible: true,
    })
}
