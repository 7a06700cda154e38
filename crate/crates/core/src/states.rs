//! System and environment states, and the qubit Bloch representation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, pauli, Axis, ComplexMatrix};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue allowed in a valid state.
pub const PSD_TOL: f64 = -1e-10;
pub const BLOCH_NORM_TOL: f64 = 1e-9;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.matrix.num_qubits()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix)?,
        })
    }

    /// Reduced state on `keep`.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        DensityMatrix::new(linalg::partial_trace(&self.matrix, self.num_qubits(), keep)?)
    }

    /// `U ρ U†`, revalidated.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.dim(),
            });
        }
        DensityMatrix::new(self.matrix.conjugate_by(u))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.matrix.is_diagonal(tol)
    }
}

/// Checks Hermiticity, unit trace and positivity within the module tolerances.
pub fn validate(m: &ComplexMatrix) -> Result<()> {
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
    }
    let tr = m.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let min = linalg::hermitian_eigenvalues(m)?
        .last()
        .copied()
        .unwrap_or(0.0);
    if min < PSD_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Projector onto the computational basis ket with the given bits
/// (first bit is qubit 0).
pub fn pure_state(bits: &[u8]) -> Result<DensityMatrix> {
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidArgument("ket labels must be 0 or 1".into()));
    }
    if bits.is_empty() {
        return Err(Error::InvalidArgument("empty ket label".into()));
    }
    let dim = 1usize << bits.len();
    if dim > linalg::MAX_DIM {
        return Err(Error::DimensionOverflow(dim));
    }
    let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let mut m = ComplexMatrix::zeros(dim);
    m[(index, index)] = Complex64::new(1.0, 0.0);
    DensityMatrix::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvFlavor {
    /// Diagonal mixture of parity sectors.
    Classical,
    /// Pure superposition with the same computational-basis weights.
    Entangled,
}

/// Environment of two qubits with same-value weight `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvSpec {
    pub q: f64,
    pub flavor: EnvFlavor,
}

impl EnvSpec {
    pub fn new(q: f64, flavor: EnvFlavor) -> Result<Self> {
        check_q(q)?;
        Ok(Self { q, flavor })
    }

    pub fn classical(q: f64) -> Result<Self> {
        Self::new(q, EnvFlavor::Classical)
    }

    pub fn entangled(q: f64) -> Result<Self> {
        Self::new(q, EnvFlavor::Entangled)
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("correlation q = {q} outside [0, 1]")));
    }
    Ok(())
}

/// Two-qubit environment state.
///
/// Classical: `q/2 (|00⟩⟨00| + |11⟩⟨11|) + (1−q)/2 (|01⟩⟨01| + |10⟩⟨10|)`.
/// Entangled: projector onto `√(q/2)(|00⟩+|11⟩) + √((1−q)/2)(|01⟩+|10⟩)`.
pub fn env_state(spec: EnvSpec) -> Result<DensityMatrix> {
    check_q(spec.q)?;
    let same = spec.q / 2.0;
    let diff = (1.0 - spec.q) / 2.0;
    let m = match spec.flavor {
        EnvFlavor::Classical => ComplexMatrix::from_real(4, &[
            same, 0., 0., 0., //
            0., diff, 0., 0., //
            0., 0., diff, 0., //
            0., 0., 0., same,
        ])?,
        EnvFlavor::Entangled => {
            let (a, b) = (same.sqrt(), diff.sqrt());
            let ket = [a, b, b, a].map(|x| Complex64::new(x, 0.0));
            ComplexMatrix::outer(&ket)?
        }
    };
    DensityMatrix::new(m)
}

/// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let v = Self(r);
        if v.norm() > 1.0 + BLOCH_NORM_TOL || r.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState(format!("Bloch vector {r:?} has length > 1")));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.num_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let m = rho.matrix();
    let r = Axis::ALL.map(|a| (&pauli(a) * m).trace().re);
    BlochVector::new(r)
}

/// `½(1 + r·σ)`.
pub fn density_from_bloch(r: &BlochVector) -> Result<DensityMatrix> {
    if r.norm() > 1.0 + BLOCH_NORM_TOL {
        return Err(Error::InvalidState(format!("Bloch vector {:?} has length > 1", r.0)));
    }
    let mut m = ComplexMatrix::identity(2);
    for a in Axis::ALL {
        m = &m + &pauli(a).scale_real(r.0[a.index()]);
    }
    DensityMatrix::new(m.scale_real(0.5))
}
