//! Collisional dynamics: the conditional system-environment unitary, the
//! sequential global evolution with partial trace, and the equivalent
//! Kraus maps after one and two collisions.

use crate::error::{Error, Result};
use crate::linalg::{self, pauli_rotation, Axis, ComplexMatrix};
use crate::states::{self, check_q, DensityMatrix, EnvSpec};

/// Per-collision strengths and the environment they act through.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionConfig {
    /// One entry per collision; collision `k` uses environment qubit `k`.
    pub etas: Vec<f64>,
    pub env: EnvSpec,
}

impl CollisionConfig {
    pub fn new(etas: Vec<f64>, env: EnvSpec) -> Result<Self> {
        if etas.is_empty() {
            return Err(Error::InvalidArgument("at least one collision is required".into()));
        }
        if let Some(bad) = etas.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument(format!("collision strength {bad} is not finite")));
        }
        Ok(Self { etas, env })
    }

    /// Two collisions of equal strength.
    pub fn two_step(eta: f64, env: EnvSpec) -> Result<Self> {
        Self::new(vec![eta, eta], env)
    }
}

/// `e^{iησx} ⊗ |0⟩⟨0| + e^{iησy} ⊗ |1⟩⟨1|`, system first, controlling
/// environment qubit second.
pub fn conditional_unitary(eta: f64) -> ComplexMatrix {
    let rx = pauli_rotation(Axis::X, eta);
    let ry = pauli_rotation(Axis::Y, eta);
    let mut u = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            u[(2 * i, 2 * j)] = rx[(i, j)];
            u[(2 * i + 1, 2 * j + 1)] = ry[(i, j)];
        }
    }
    u
}

/// Global operator for collision with environment qubit `env_qubit`
/// (1-based position in the `system ⊗ env…` register).
pub fn collision_operator(eta: f64, num_qubits: usize, env_qubit: usize) -> Result<ComplexMatrix> {
    if env_qubit == 0 || env_qubit >= num_qubits {
        return Err(Error::InvalidArgument(format!(
            "environment qubit {env_qubit} not in 1..{num_qubits}"
        )));
    }
    linalg::embed(&conditional_unitary(eta), num_qubits, &[0, env_qubit])
}

/// Evolves `rho0 ⊗ ρ_env` through the collisions in order and returns the
/// reduced system state after each one.
///
/// The global state is carried between collisions, so correlations in the
/// environment act on the system history.
pub fn evolve_sequence(rho0: &DensityMatrix, cfg: &CollisionConfig) -> Result<Vec<DensityMatrix>> {
    let env = states::env_state(cfg.env)?;
    evolve_with_env(rho0, &env, &cfg.etas)
}

/// Same as [`evolve_sequence`] with an explicit environment state.
pub fn evolve_with_env(
    rho0: &DensityMatrix,
    env: &DensityMatrix,
    etas: &[f64],
) -> Result<Vec<DensityMatrix>> {
    if rho0.num_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho0.dim(),
        });
    }
    if etas.len() > env.num_qubits() {
        return Err(Error::InvalidArgument(format!(
            "{} collisions requested but the environment has {} qubits",
            etas.len(),
            env.num_qubits()
        )));
    }
    let mut global = rho0.tensor(env)?;
    let n = global.num_qubits();
    let mut reduced = Vec::with_capacity(etas.len());
    for (k, &eta) in etas.iter().enumerate() {
        let u = collision_operator(eta, n, k + 1)?;
        global = global.evolve(&u)?;
        reduced.push(global.reduce(&[0])?);
    }
    Ok(reduced)
}

fn kraus_sum(rho: &DensityMatrix, terms: &[(f64, ComplexMatrix)]) -> Result<DensityMatrix> {
    if rho.num_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(2);
    for (w, k) in terms {
        out = &out + &rho.matrix().conjugate_by(k).scale_real(*w);
    }
    DensityMatrix::new(out)
}

/// Single-collision map `½[e^{iησx} ρ e^{−iησx} + e^{iησy} ρ e^{−iησy}]`.
pub fn map_lambda10(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    kraus_sum(rho, &[
        (0.5, pauli_rotation(Axis::X, eta)),
        (0.5, pauli_rotation(Axis::Y, eta)),
    ])
}

/// Two-collision map: same-axis branches weighted `q/2`, crossed branches
/// `(1−q)/2`. The first collision acts first (rightmost factor).
pub fn map_lambda20(rho: &DensityMatrix, eta1: f64, eta2: f64, q: f64) -> Result<DensityMatrix> {
    check_q(q)?;
    let x1 = pauli_rotation(Axis::X, eta1);
    let y1 = pauli_rotation(Axis::Y, eta1);
    let x2 = pauli_rotation(Axis::X, eta2);
    let y2 = pauli_rotation(Axis::Y, eta2);
    let same = q / 2.0;
    let crossed = (1.0 - q) / 2.0;
    kraus_sum(rho, &[
        (same, &x2 * &x1),
        (same, &y2 * &y1),
        (crossed, &y2 * &x1),
        (crossed, &x2 * &y1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::states::{pure_state, EnvFlavor};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn conditional_unitary_examples() {
        assert!(conditional_unitary(0.0).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let p0 = ComplexMatrix::from_real(2, &[1., 0., 0., 0.]).unwrap();
        let p1 = ComplexMatrix::from_real(2, &[0., 0., 0., 1.]).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let want = &pauli(Axis::X).kron(&p0).unwrap() + &pauli(Axis::Y).kron(&p1).unwrap();
        assert!(conditional_unitary(FRAC_PI_2).max_abs_diff(&want.scale(i)) < 1e-15);

        // U|00⟩ = cos η |00⟩ + i sin η |10⟩
        let u = conditional_unitary(0.05);
        let col: Vec<Complex64> = (0..4).map(|r| u[(r, 0)]).collect();
        let (s, c) = 0.05f64.sin_cos();
        let want = [Complex64::new(c, 0.), Complex64::new(0., 0.), Complex64::new(0., s), Complex64::new(0., 0.)];
        for (a, b) in col.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn conditional_unitary_blocks() {
        let eta = 0.37;
        let u = conditional_unitary(eta);
        assert!(u.unitarity_defect() < 1e-13);
        let rx = pauli_rotation(Axis::X, eta);
        let ry = pauli_rotation(Axis::Y, eta);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(u[(2 * i, 2 * j)], rx[(i, j)]);
                assert_eq!(u[(2 * i + 1, 2 * j + 1)], ry[(i, j)]);
                assert_eq!(u[(2 * i, 2 * j + 1)], Complex64::new(0., 0.));
            }
        }
    }

    #[test]
    fn zero_strength_leaves_state() {
        let rho = pure_state(&[0]).unwrap();
        let cfg = CollisionConfig::new(vec![0.0], EnvSpec::classical(0.3).unwrap()).unwrap();
        let out = evolve_sequence(&rho, &cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].matrix().max_abs_diff(rho.matrix()) < 1e-15);

        assert!(map_lambda10(&rho, 0.0).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!(map_lambda20(&rho, 0.0, 0.0, 0.4).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let mixed = DensityMatrix::new(ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        for eta in [0.01, 0.3, 1.7] {
            let out = map_lambda10(&mixed, eta).unwrap();
            assert!(out.matrix().max_abs_diff(mixed.matrix()) < 1e-15);
        }
    }

    #[test]
    fn correlated_limit_doubles_angle() {
        let rho = pure_state(&[0]).unwrap();
        let eta = 0.08;
        let got = map_lambda20(&rho, eta, eta, 1.0).unwrap();
        let want = map_lambda10(&rho, 2.0 * eta).unwrap();
        assert!(got.matrix().max_abs_diff(want.matrix()) < 1e-15);
    }

    #[test]
    fn circuit_matches_maps_at_sample_points() {
        let rho = pure_state(&[0]).unwrap();
        let cfg = CollisionConfig::two_step(0.1, EnvSpec::classical(0.0).unwrap()).unwrap();
        let traj = evolve_sequence(&rho, &cfg).unwrap();
        let one = map_lambda10(&rho, 0.1).unwrap();
        let two = map_lambda20(&rho, 0.1, 0.1, 0.0).unwrap();
        assert!(traj[0].matrix().max_abs_diff(one.matrix()) < 1e-12);
        assert!(traj[1].matrix().max_abs_diff(two.matrix()) < 1e-12);

        let cfg = CollisionConfig::two_step(0.05, EnvSpec::classical(0.0).unwrap()).unwrap();
        let traj = evolve_sequence(&rho, &cfg).unwrap();
        assert!(traj[0].matrix().max_abs_diff(map_lambda10(&rho, 0.05).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn config_errors() {
        let env = EnvSpec::classical(0.2).unwrap();
        assert!(CollisionConfig::new(vec![], env).is_err());
        assert!(CollisionConfig::new(vec![f64::NAN], env).is_err());
        let cfg = CollisionConfig::new(vec![0.1, 0.1, 0.1], env).unwrap();
        assert!(matches!(
            evolve_sequence(&pure_state(&[0]).unwrap(), &cfg),
            Err(Error::InvalidArgument(_))
        ));
        let two_qubit = pure_state(&[0, 0]).unwrap();
        assert!(matches!(
            evolve_sequence(&two_qubit, &CollisionConfig::two_step(0.1, env).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(map_lambda20(&pure_state(&[0]).unwrap(), 0.1, 0.1, 1.5).is_err());
        assert!(collision_operator(0.1, 3, 0).is_err());
        assert!(collision_operator(0.1, 3, 3).is_err());
    }

    #[test]
    fn global_operators_are_unitary() {
        for eta in [0.0, 0.01, 0.1, 0.3, 2.0] {
            for k in [1, 2] {
                assert!(collision_operator(eta, 3, k).unwrap().unitarity_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn entangled_flavor_traj_equal() {
        let rho = pure_state(&[1]).unwrap();
        for q in [0.0, 0.15, 0.25, 0.5, 1.0] {
            let a = evolve_sequence(&rho, &CollisionConfig::two_step(0.2, EnvSpec::new(q, EnvFlavor::Classical).unwrap()).unwrap()).unwrap();
            let b = evolve_sequence(&rho, &CollisionConfig::two_step(0.2, EnvSpec::new(q, EnvFlavor::Entangled).unwrap()).unwrap()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(x.matrix().max_abs_diff(y.matrix()) < 1e-11);
            }
        }
    }
}
