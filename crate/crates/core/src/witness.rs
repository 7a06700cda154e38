//! Trace distance, the increase-of-distinguishability memory witness and the
//! closed-form distances for the orthogonal `|0⟩, |1⟩` pair.

use std::fmt;

use crate::collision::{evolve_sequence, CollisionConfig};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::states::{check_q, BlochVector, DensityMatrix};

/// `½ Tr|a − b|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    let ev = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * ev.iter().map(|l| l.abs()).sum::<f64>())
}

/// Half the Euclidean distance between Bloch vectors.
pub fn bloch_trace_distance(r1: &BlochVector, r2: &BlochVector) -> f64 {
    0.5 * r1.distance(r2)
}

/// Distance after one collision, `½ √(3 + cos 4η)`.
pub fn closed_form_d1(eta: f64) -> f64 {
    0.5 * (3.0 + (4.0 * eta).cos()).sqrt()
}

/// Distance after two equal collisions with correlation `q`.
pub fn closed_form_d2(eta: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    let (s, c) = eta.sin_cos();
    let first = 4.0 * c * s * (c * c - q * s * s);
    let second = (q + 1.0) * (4.0 * eta).cos() - q + 1.0;
    let third = 2.0 * s * c * ((q + 1.0) * (2.0 * eta).cos() - q + 1.0);
    Ok(0.5 * (first * first + second * second + third * third).sqrt())
}

/// Leading small-η behaviour of `D(2) − D(1)`: `(1 − 4q) η²`.
pub fn small_eta_delta_d(eta: f64, q: f64) -> f64 {
    (1.0 - 4.0 * q) * eta * eta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlpVerdict {
    NonMarkovian,
    /// The witness is only sufficient, so absence of an increase proves nothing.
    NoEvidence,
}

impl fmt::Display for BlpVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlpVerdict::NonMarkovian => "NonMarkovian",
            BlpVerdict::NoEvidence => "NoEvidence",
        })
    }
}

/// NonMarkovian iff some recorded distance strictly exceeds its predecessor.
pub fn blp_verdict(distances: &[f64]) -> Result<BlpVerdict> {
    if distances.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least two steps after the initial one, got {} distances",
            distances.len()
        )));
    }
    if distances.windows(2).any(|w| w[1] > w[0]) {
        Ok(BlpVerdict::NonMarkovian)
    } else {
        Ok(BlpVerdict::NoEvidence)
    }
}

/// Time-ordered pair of system states, step 0 first.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub pairs: Vec<(DensityMatrix, DensityMatrix)>,
    pub distances: Vec<f64>,
}

impl Trajectory {
    pub fn from_pairs(pairs: Vec<(DensityMatrix, DensityMatrix)>) -> Result<Self> {
        let distances = pairs
            .iter()
            .map(|(a, b)| trace_distance(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pairs, distances })
    }

    /// Runs both initial states through the same collision sequence.
    pub fn simulate(rho1: &DensityMatrix, rho2: &DensityMatrix, cfg: &CollisionConfig) -> Result<Self> {
        let a = evolve_sequence(rho1, cfg)?;
        let b = evolve_sequence(rho2, cfg)?;
        let mut pairs = vec![(rho1.clone(), rho2.clone())];
        pairs.extend(a.into_iter().zip(b));
        Self::from_pairs(pairs)
    }

    pub fn steps(&self) -> usize {
        self.distances.len()
    }

    /// `D(2) − D(1)` when two collisions were recorded.
    pub fn delta_d(&self) -> Option<f64> {
        (self.distances.len() >= 3).then(|| self.distances[2] - self.distances[1])
    }

    pub fn verdict(&self) -> Result<BlpVerdict> {
        blp_verdict(&self.distances)
    }
}
