//! Finite measurement resolution: Bloch-vector uncertainty, its propagation to
//! trace distances, the conclusive/inconclusive call on a measured increase,
//! and shot-noise-limited single-qubit tomography.
//!
//! All randomness comes from ChaCha8 streams. A task `k` of a run seeded with
//! `s` draws from stream `k` of the generator keyed by `s`, so parallel work
//! is reproducible regardless of scheduling.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, UnitSphere};

use crate::error::{Error, Result};
use crate::linalg::Axis;
use crate::states::{bloch_from_density, BlochVector, DensityMatrix};

/// Bloch-vector uncertainty, isotropic in direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub delta_r: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(delta_r: f64, seed: u64) -> Result<Self> {
        if !(delta_r >= 0.0 && delta_r.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta_r = {delta_r} must be >= 0")));
        }
        Ok(Self { delta_r, seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TomographyConfig {
    /// Shots per Pauli axis.
    pub shots: u64,
    pub seed: u64,
}

impl TomographyConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidArgument("tomography needs at least one shot".into()));
        }
        Ok(Self { shots, seed })
    }
}

/// Generator for task `task` of a run seeded with `seed`.
pub fn stream(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Uncertainty of a trace distance from Bloch uncertainty `δr`: `δr/√2`.
pub fn propagate_error(delta_r: f64) -> f64 {
    delta_r / std::f64::consts::SQRT_2
}

/// Which noise floor a measured increase has to clear.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ThresholdRule {
    /// `ΔD > δr/√2`.
    #[default]
    DeltaD,
    /// `ΔD > δr`, the combined error of two distances.
    Difference,
}

impl ThresholdRule {
    pub fn floor(self, delta_r: f64) -> f64 {
        match self {
            ThresholdRule::DeltaD => propagate_error(delta_r),
            ThresholdRule::Difference => delta_r,
        }
    }
}

impl std::str::FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta-d" | "delta_d" => Ok(ThresholdRule::DeltaD),
            "difference" => Ok(ThresholdRule::Difference),
            other => Err(Error::InvalidArgument(format!("unknown threshold rule '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    Conclusive,
    Inconclusive,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resolution::Conclusive => "Conclusive",
            Resolution::Inconclusive => "Inconclusive",
        })
    }
}

pub fn classify(delta_d_measured: f64, delta_r: f64) -> Resolution {
    classify_with(delta_d_measured, delta_r, ThresholdRule::DeltaD)
}

pub fn classify_with(delta_d_measured: f64, delta_r: f64, rule: ThresholdRule) -> Resolution {
    if delta_d_measured > rule.floor(delta_r) {
        Resolution::Conclusive
    } else {
        Resolution::Inconclusive
    }
}

/// Shifts `r` by `δr` along a uniformly random direction drawn from `rng`,
/// rescaling radially back onto the ball if it leaves it.
pub fn perturb_bloch_with<R: Rng + ?Sized>(r: &BlochVector, delta_r: f64, rng: &mut R) -> BlochVector {
    let u: [f64; 3] = UnitSphere.sample(rng);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = r.0[i] + delta_r * u[i];
    }
    let v = BlochVector(out);
    let n = v.norm();
    if n > 1.0 {
        BlochVector(out.map(|x| x / n))
    } else {
        v
    }
}

pub fn perturb_bloch(r: &BlochVector, spec: &NoiseSpec) -> BlochVector {
    if spec.delta_r == 0.0 {
        return *r;
    }
    perturb_bloch_with(r, spec.delta_r, &mut stream(spec.seed, 0))
}

/// Estimated Bloch vector with per-axis standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TomographyEstimate {
    /// Raw estimate; may lie marginally outside the unit ball.
    pub bloch: BlochVector,
    pub std_errors: [f64; 3],
}

/// Projective Pauli measurements, `shots` per axis.
pub fn simulate_tomography_with<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    shots: u64,
    rng: &mut R,
) -> Result<TomographyEstimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("tomography needs at least one shot".into()));
    }
    let exact = bloch_from_density(rho)?;
    let n = shots as f64;
    let mut est = [0.0; 3];
    let mut se = [0.0; 3];
    for axis in Axis::ALL {
        let i = axis.index();
        let p = ((1.0 + exact.0[i]) / 2.0).clamp(0.0, 1.0);
        // number of +1 outcomes among `shots` Bernoulli(p) trials
        let ups = Binomial::new(shots, p)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sample(rng) as f64;
        let p_hat = ups / n;
        est[i] = 2.0 * p_hat - 1.0;
        se[i] = 2.0 * (p_hat * (1.0 - p_hat) / n).sqrt();
    }
    Ok(TomographyEstimate {
        bloch: BlochVector(est),
        std_errors: se,
    })
}

pub fn simulate_tomography(rho: &DensityMatrix, cfg: &TomographyConfig) -> Result<TomographyEstimate> {
    simulate_tomography_with(rho, cfg.shots, &mut stream(cfg.seed, 0))
}

/// Standard error of `½|r₁ − r₂|` from independent per-axis errors
/// (first-order propagation).
pub fn distance_std_error(a: &TomographyEstimate, b: &TomographyEstimate) -> f64 {
    let diff: Vec<f64> = (0..3).map(|i| a.bloch.0[i] - b.bloch.0[i]).collect();
    let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.5 * (0..3).map(|i| a.std_errors[i].powi(2) + b.std_errors[i].powi(2)).sum::<f64>().sqrt();
    }
    let var: f64 = (0..3)
        .map(|i| (diff[i] / norm).powi(2) * (a.std_errors[i].powi(2) + b.std_errors[i].powi(2)))
        .sum();
    0.5 * var.sqrt()
}
