use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{simulate, CircuitTopology, Slot, TunableState};
use crate::error::{Error, Result};
use crate::network::{input_reflection, load_reflection_from_input, Complex, ReflectionCoefficient};

/// Measurement noise levels used for robustness sweeps.
pub const NOISE_PRESETS: [f64; 3] = [0.0, 0.0002, 0.0004];

const MAX_RETRIES: usize = 100;
const NOISE_SALT: u64 = 0x6e6f_6973_6521;

/// One mismatched operating condition. Capacitances in farads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: usize,
    pub f: f64,
    /// Capacitor pair that matches the hidden load perfectly.
    pub cp_star: f64,
    pub cs_star: f64,
    /// Setting in place when the mismatch is measured.
    pub cp_now: f64,
    pub cs_now: f64,
    /// Measured input reflection, noise included.
    pub gin_re: f64,
    pub gin_im: f64,
    /// Hidden true load reflection.
    pub gl_re: f64,
    pub gl_im: f64,
    pub noise_sigma: f64,
}

impl Scenario {
    pub fn gin(&self) -> ReflectionCoefficient {
        ReflectionCoefficient::new(self.gin_re, self.gin_im)
    }

    pub fn gl(&self) -> ReflectionCoefficient {
        ReflectionCoefficient::new(self.gl_re, self.gl_im)
    }

    pub fn current_state(&self) -> TunableState {
        TunableState::new(self.f, self.cp_now, self.cs_now)
    }
}

/// `gin + w` with `w` circularly-symmetric complex Gaussian of variance
/// `sigma²`: real and imaginary parts independent `N(0, sigma²/2)`.
pub fn add_measurement_noise<R: Rng>(gin: ReflectionCoefficient, sigma: f64, rng: &mut R) -> ReflectionCoefficient {
    assert!(sigma >= 0.0, "noise level must be non-negative");
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let k = sigma / std::f64::consts::SQRT_2;
    ReflectionCoefficient(gin.0 + Complex::new(k * x, k * y))
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn one_scenario(topology: &CircuitTopology, id: usize, seed: u64, sigma: f64) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    let (band, p, s) = (topology.band(), topology.tunable_range(Slot::P), topology.tunable_range(Slot::S));
    let mut attempts = 0;
    let (f, cp_star, cs_star, gl) = loop {
        if attempts > MAX_RETRIES {
            return Err(Error::RetriesExhausted(MAX_RETRIES));
        }
        attempts += 1;
        let f = uniform(&mut rng, band.lo, band.hi);
        let cp = uniform(&mut rng, p.lo, p.hi);
        let cs = uniform(&mut rng, s.lo, s.hi);
        let gl = simulate(topology, TunableState::new(f, cp, cs))
            .and_then(|sp| load_reflection_from_input(&sp, ReflectionCoefficient::ZERO));
        match gl {
            // Passive antennas only.
            Ok(gl) if gl.magnitude() < 1.0 => break (f, cp, cs, gl),
            Ok(_) => {}
            Err(e) if e.is_singular() => {}
            Err(e) => return Err(e),
        }
    };
    let (cp_now, cs_now, gin) = loop {
        if attempts > MAX_RETRIES {
            return Err(Error::RetriesExhausted(MAX_RETRIES));
        }
        attempts += 1;
        let cp_now = uniform(&mut rng, p.lo, p.hi);
        let cs_now = uniform(&mut rng, s.lo, s.hi);
        match simulate(topology, TunableState::new(f, cp_now, cs_now)).and_then(|sp| input_reflection(&sp, gl)) {
            Ok(gin) => break (cp_now, cs_now, gin),
            Err(e) if e.is_singular() => {}
            Err(e) => return Err(e),
        }
    };
    // Noise comes from its own stream so every noise level sees the same
    // scenarios and the same noise direction.
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed ^ NOISE_SALT);
    noise_rng.set_stream(id as u64);
    let gin = add_measurement_noise(gin, sigma, &mut noise_rng);
    Ok(Scenario {
        id,
        f,
        cp_star,
        cs_star,
        cp_now,
        cs_now,
        gin_re: gin.0.re,
        gin_im: gin.0.im,
        gl_re: gl.0.re,
        gl_im: gl.0.im,
        noise_sigma: sigma,
    })
}

/// `n` seeded scenarios. Scenario `i` depends only on `(topology, seed, i, sigma)`.
pub fn generate_scenarios(topology: &CircuitTopology, n: usize, seed: u64, sigma: f64) -> Result<Vec<Scenario>> {
    if n == 0 {
        return Err(Error::InvalidArgument("scenario count must be at least 1".into()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level must be non-negative, got {sigma}")));
    }
    (0..n).into_par_iter().map(|i| one_scenario(topology, i, seed, sigma)).collect()
}

/// Scenario file contents; self-describing so reports can be traced back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSuite {
    pub seed: u64,
    pub noise_sigma: f64,
    pub circuit_fingerprint: String,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSuite {
    pub fn generate(topology: &CircuitTopology, n: usize, seed: u64, sigma: f64) -> Result<Self> {
        Ok(ScenarioSuite {
            seed,
            noise_sigma: sigma,
            circuit_fingerprint: topology.fingerprint(),
            scenarios: generate_scenarios(topology, n, seed, sigma)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
