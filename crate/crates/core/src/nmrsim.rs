//! Pulse-level NMR back-end.
//!
//! Three spin-½ nuclei evolve under the rotating-frame Ising Hamiltonian
//!
//! ```text
//! H/ħ = Σₙ 2π νₙ I_zⁿ + Σ_{k≠m} 2π J_km I_zᵏ I_zᵐ
//! ```
//!
//! with offsets `νₙ` and couplings `J_km` in Hz. The coupling sum runs over
//! ordered pairs, so a pair contributes `π J σ_z σ_z`. Pulses are ideal, hard
//! and perfectly selective. A field gradient removes every coherence in the
//! z basis.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::collision::conditional_unitary;
use crate::error::{Error, Result};
use crate::linalg::{self, pauli, Axis, ComplexMatrix};
use crate::states::{self, check_q, DensityMatrix, EnvSpec};

/// System spin index; environment spins are 1 and 2.
pub const SYSTEM_SPIN: usize = 0;

/// Free-evolution times quoted for the two collisions, `1/(4 J_{s,env_k})`.
pub const TAU1_ENV1: f64 = 0.00358;
pub const TAU1_ENV2: f64 = 0.00525;

#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    offsets: Vec<f64>,
    couplings: Vec<Vec<f64>>,
}

impl SpinSystem {
    pub fn new(offsets: Vec<f64>, couplings: Vec<Vec<f64>>) -> Result<Self> {
        let n = offsets.len();
        if n == 0 || (1usize << n) > linalg::MAX_DIM {
            return Err(Error::InvalidArgument(format!("unsupported spin count {n}")));
        }
        if offsets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("offsets must be finite".into()));
        }
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("coupling matrix must be n x n".into()));
        }
        #[allow(clippy::needless_range_loop)]
        for k in 0..n {
            if couplings[k][k] != 0.0 {
                return Err(Error::InvalidArgument("coupling diagonal must be zero".into()));
            }
            for m in 0..n {
                if !couplings[k][m].is_finite() || couplings[k][m] != couplings[m][k] {
                    return Err(Error::InvalidArgument(format!(
                        "coupling J[{k}][{m}] is not symmetric and finite"
                    )));
                }
            }
        }
        Ok(Self { offsets, couplings })
    }

    pub fn n_spins(&self) -> usize {
        self.offsets.len()
    }

    pub fn offset(&self, spin: usize) -> f64 {
        self.offsets[spin]
    }

    pub fn coupling(&self, k: usize, m: usize) -> f64 {
        self.couplings[k][m]
    }

    /// Diagonal of `H/ħ` in rad/s.
    pub fn hamiltonian_diagonal(&self) -> Vec<f64> {
        let n = self.n_spins();
        (0..1usize << n)
            .map(|b| {
                let z = |s: usize| if (b >> (n - 1 - s)) & 1 == 0 { 1.0 } else { -1.0 };
                let mut e = 0.0;
                for s in 0..n {
                    e += PI * self.offsets[s] * z(s);
                }
                for k in 0..n {
                    for m in (k + 1)..n {
                        e += PI * self.couplings[k][m] * z(k) * z(m);
                    }
                }
                e
            })
            .collect()
    }
}

impl Default for SpinSystem {
    /// Well-separated offsets; system couplings from the quoted `τ₁` values;
    /// a placeholder environment-environment coupling.
    fn default() -> Self {
        let j01 = 1.0 / (4.0 * TAU1_ENV1);
        let j02 = 1.0 / (4.0 * TAU1_ENV2);
        let j12 = 30.0;
        Self::new(
            vec![0.0, 10_000.0, -10_000.0],
            vec![
                vec![0.0, j01, j02],
                vec![j01, 0.0, j12],
                vec![j02, j12, 0.0],
            ],
        )
        .expect("default spin system is valid")
    }
}

/// Rotation axis of a pulse; a negated axis rotates the other way.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PulseAxis {
    pub axis: Axis,
    pub negated: bool,
}

impl PulseAxis {
    pub const X: PulseAxis = PulseAxis { axis: Axis::X, negated: false };
    pub const Y: PulseAxis = PulseAxis { axis: Axis::Y, negated: false };
    pub const Z: PulseAxis = PulseAxis { axis: Axis::Z, negated: false };
    pub const XBAR: PulseAxis = PulseAxis { axis: Axis::X, negated: true };
    pub const YBAR: PulseAxis = PulseAxis { axis: Axis::Y, negated: true };
    pub const ZBAR: PulseAxis = PulseAxis { axis: Axis::Z, negated: true };
}

impl fmt::Display for PulseAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        write!(f, "{}", self.axis)
    }
}

impl FromStr for PulseAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (negated, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let axis = match rest {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            _ => return Err(Error::InvalidArgument(format!("unknown pulse axis '{s}'"))),
        };
        Ok(PulseAxis { axis, negated })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseOp {
    /// `exp(−iθ(I_x cos φ + I_y sin φ))` on one spin, with the phase origin
    /// shifted by π/2 for the y axis. z rotations ignore the phase.
    Rotation {
        target: usize,
        axis: PulseAxis,
        angle: f64,
        phase: f64,
    },
    FreeEvolution { duration: f64 },
    Gradient,
}

impl PulseOp {
    pub fn rot(target: usize, axis: PulseAxis, angle: f64) -> Self {
        PulseOp::Rotation { target, axis, angle, phase: 0.0 }
    }

    pub fn rot_phase(target: usize, axis: PulseAxis, angle: f64, phase: f64) -> Self {
        PulseOp::Rotation { target, axis, angle, phase }
    }

    pub fn free(duration: f64) -> Self {
        PulseOp::FreeEvolution { duration }
    }
}

impl fmt::Display for PulseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseOp::Rotation { target, axis, angle, phase } => {
                write!(f, "ROT {target} {axis} {angle} {phase}")
            }
            PulseOp::FreeEvolution { duration } => write!(f, "FREE {duration}"),
            PulseOp::Gradient => f.write_str("GRAD"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseProgram {
    pub label: String,
    pub ops: Vec<PulseOp>,
}

impl PulseProgram {
    pub fn new(label: impl Into<String>, ops: Vec<PulseOp>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("pulse program is empty".into()));
        }
        Ok(Self { label: label.into(), ops })
    }

    /// Sum of free-evolution durations in seconds.
    pub fn total_free_time(&self) -> f64 {
        self.ops
            .iter()
            .map(|op| match op {
                PulseOp::FreeEvolution { duration } => *duration,
                _ => 0.0,
            })
            .sum()
    }

    /// One op per line; the label goes on a leading `# ` comment line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.label.is_empty() {
            out.push_str("# ");
            out.push_str(&self.label);
            out.push('\n');
        }
        for op in &self.ops {
            out.push_str(&op.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut label = String::new();
        let mut ops = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if ops.is_empty() && label.is_empty() {
                    label = comment.trim().to_string();
                }
                continue;
            }
            ops.push(parse_op(line).map_err(|msg| Error::Parse { line: line_no, msg })?);
        }
        PulseProgram::new(label, ops)
    }
}

fn parse_op(line: &str) -> std::result::Result<PulseOp, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("bad number '{s}': {e}"));
    match fields.as_slice() {
        ["ROT", spin, axis, angle, phase] => Ok(PulseOp::Rotation {
            target: spin.parse().map_err(|e| format!("bad spin index '{spin}': {e}"))?,
            axis: axis.parse().map_err(|e: Error| e.to_string())?,
            angle: num(angle)?,
            phase: num(phase)?,
        }),
        ["FREE", tau] => {
            let duration = num(tau)?;
            if duration < 0.0 {
                return Err(format!("negative duration {duration}"));
            }
            Ok(PulseOp::FreeEvolution { duration })
        }
        ["GRAD"] => Ok(PulseOp::Gradient),
        _ => Err(format!("unrecognized instruction '{line}'")),
    }
}

/// `exp(−iHτ)`, diagonal in the computational basis.
pub fn free_propagator(sys: &SpinSystem, tau: f64) -> Result<ComplexMatrix> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("free evolution time {tau} must be >= 0")));
    }
    let phases: Vec<Complex64> = sys
        .hamiltonian_diagonal()
        .into_iter()
        .map(|e| Complex64::from_polar(1.0, -e * tau))
        .collect();
    ComplexMatrix::from_diag(&phases)
}

fn single_spin_rotation(axis: PulseAxis, angle: f64, phase: f64) -> ComplexMatrix {
    let theta = if axis.negated { -angle } else { angle };
    let generator = match axis.axis {
        Axis::Z => pauli(Axis::Z),
        Axis::X | Axis::Y => {
            let phi = phase + if axis.axis == Axis::Y { FRAC_PI_2 } else { 0.0 };
            &pauli(Axis::X).scale_real(phi.cos()) + &pauli(Axis::Y).scale_real(phi.sin())
        }
    };
    // exp(−iθ n·σ/2) = cos(θ/2) − i sin(θ/2) n·σ
    let (s, c) = (theta / 2.0).sin_cos();
    &ComplexMatrix::identity(2).scale_real(c) + &generator.scale(Complex64::new(0.0, -s))
}

pub fn rotation_propagator(sys: &SpinSystem, op: &PulseOp) -> Result<ComplexMatrix> {
    let PulseOp::Rotation { target, axis, angle, phase } = *op else {
        return Err(Error::InvalidArgument(format!("'{op}' is not a rotation")));
    };
    if target >= sys.n_spins() {
        return Err(Error::InvalidArgument(format!(
            "rotation target {target} out of range for {} spins",
            sys.n_spins()
        )));
    }
    linalg::embed(&single_spin_rotation(axis, angle, phase), sys.n_spins(), &[target])
}

/// Zeroes every off-diagonal element in the z basis.
pub fn gradient_dephase(rho: &DensityMatrix) -> DensityMatrix {
    let m = ComplexMatrix::from_diag(&rho.matrix().diagonal()).expect("same dimension");
    DensityMatrix::new(m).expect("diagonal of a state is a state")
}

/// Unitary of a gradient-free program (first op applied first).
pub fn program_propagator(sys: &SpinSystem, prog: &PulseProgram) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(1 << sys.n_spins());
    for op in &prog.ops {
        let step = match op {
            PulseOp::Rotation { .. } => rotation_propagator(sys, op)?,
            PulseOp::FreeEvolution { duration } => free_propagator(sys, *duration)?,
            PulseOp::Gradient => {
                return Err(Error::InvalidArgument(
                    "a program containing GRAD has no propagator".into(),
                ))
            }
        };
        u = &step * &u;
    }
    Ok(u)
}

pub fn run_program(rho0: &DensityMatrix, sys: &SpinSystem, prog: &PulseProgram) -> Result<DensityMatrix> {
    if rho0.num_qubits() != sys.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: 1 << sys.n_spins(),
            got: rho0.dim(),
        });
    }
    prog.ops.iter().try_fold(rho0.clone(), |rho, op| match op {
        PulseOp::Rotation { .. } => rho.evolve(&rotation_propagator(sys, op)?),
        PulseOp::FreeEvolution { duration } => rho.evolve(&free_propagator(sys, *duration)?),
        PulseOp::Gradient => Ok(gradient_dephase(&rho)),
    })
}

fn pi_pulse(spin: usize) -> PulseOp {
    PulseOp::rot(spin, PulseAxis::X, PI)
}

/// Evolution of `tau` under the `a`–`b` coupling alone.
///
/// Each half is split by π pulses on the remaining spins, which cancels
/// their couplings and offsets; π pulses on `a` and `b` between the halves
/// cancel the offsets of `a` and `b` while keeping the `a`–`b` term.
pub fn echoed_coupling(n_spins: usize, a: usize, b: usize, tau: f64) -> Vec<PulseOp> {
    let idle: Vec<usize> = (0..n_spins).filter(|&s| s != a && s != b).collect();
    let mut half = Vec::new();
    half.push(PulseOp::free(tau / 4.0));
    half.extend(idle.iter().map(|&s| pi_pulse(s)));
    half.push(PulseOp::free(tau / 4.0));
    half.extend(idle.iter().map(|&s| pi_pulse(s)));

    let mut ops = half.clone();
    ops.push(pi_pulse(a));
    ops.push(pi_pulse(b));
    ops.extend(half);
    ops.push(pi_pulse(a));
    ops.push(pi_pulse(b));
    ops
}

// Rotation mapping σ_z onto (σ_x + σ_y)/√2: π/2 about the axis at phase 3π/4.
const TILT_PHASE: f64 = 3.0 * PI / 4.0;

/// Controlled-(σ_x + σ_y)/√2 on the system, controlled by `env`.
///
/// Built as a CZ, itself an echoed `τ = 1/(4J)` free evolution followed by
/// `−π/2` z rotations on both spins, and conjugated by the tilt pulse.
fn controlled_w(n_spins: usize, env: usize, tau: f64) -> Vec<PulseOp> {
    let mut ops = vec![PulseOp::rot_phase(SYSTEM_SPIN, PulseAxis::XBAR, FRAC_PI_2, TILT_PHASE)];
    ops.extend(echoed_coupling(n_spins, SYSTEM_SPIN, env, tau));
    ops.push(PulseOp::rot(SYSTEM_SPIN, PulseAxis::ZBAR, FRAC_PI_2));
    ops.push(PulseOp::rot(env, PulseAxis::ZBAR, FRAC_PI_2));
    ops.push(PulseOp::rot_phase(SYSTEM_SPIN, PulseAxis::X, FRAC_PI_2, TILT_PHASE));
    ops
}

/// Pulse program implementing the collision unitary between the system and
/// environment spin `which` (1 or 2), up to a global phase.
///
/// The coupling evolutions are fixed at `1/(4J)`; the strength `η` is carried
/// by the system rotation `R_x̄(2η) = e^{iησ_x}` between two controlled-W
/// blocks, since `W e^{iησ_x} W = e^{iησ_y}`.
pub fn compile_collision(eta: f64, which: usize, sys: &SpinSystem) -> Result<PulseProgram> {
    if !eta.is_finite() {
        return Err(Error::Compilation(format!("collision strength {eta} is not finite")));
    }
    if which == 0 || which >= sys.n_spins() {
        return Err(Error::Compilation(format!("environment spin {which} does not exist")));
    }
    let j = sys.coupling(SYSTEM_SPIN, which);
    if j == 0.0 {
        return Err(Error::Compilation(format!(
            "system has no coupling to environment spin {which}"
        )));
    }
    let tau = 1.0 / (4.0 * j.abs());
    let mut ops = controlled_w(sys.n_spins(), which, tau);
    let mut cz_sign_fix = Vec::new();
    if j < 0.0 {
        // J < 0 conjugates the conditional phase; π z rotations on both spins restore the CZ
        cz_sign_fix.push(PulseOp::rot(SYSTEM_SPIN, PulseAxis::Z, PI));
        cz_sign_fix.push(PulseOp::rot(which, PulseAxis::Z, PI));
    }
    ops.splice(1..1, cz_sign_fix.iter().copied());
    ops.push(PulseOp::rot(SYSTEM_SPIN, PulseAxis::XBAR, 2.0 * eta));
    let mut second = controlled_w(sys.n_spins(), which, tau);
    second.splice(1..1, cz_sign_fix);
    ops.extend(second);
    PulseProgram::new(format!("collision {which}, eta = {eta}"), ops)
}

/// Target of [`compile_collision`]: the collision unitary on the full register.
pub fn ideal_collision(eta: f64, which: usize, n_spins: usize) -> Result<ComplexMatrix> {
    linalg::embed(&conditional_unitary(eta), n_spins, &[SYSTEM_SPIN, which])
}

/// Runs the compiled collisions in order on `rho0 ⊗ env` and returns the
/// reduced system state after each.
pub fn pulse_trajectory(
    rho0: &DensityMatrix,
    env: &DensityMatrix,
    etas: &[f64],
    sys: &SpinSystem,
) -> Result<Vec<DensityMatrix>> {
    let mut global = rho0.tensor(env)?;
    if global.num_qubits() != sys.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: 1 << sys.n_spins(),
            got: global.dim(),
        });
    }
    let mut out = Vec::with_capacity(etas.len());
    for (k, &eta) in etas.iter().enumerate() {
        let prog = compile_collision(eta, k + 1, sys)?;
        global = run_program(&global, sys, &prog)?;
        out.push(global.reduce(&[SYSTEM_SPIN])?);
    }
    Ok(out)
}

/// Preparation of `|s⟩⟨s| ⊗ ρ_env(q)` from the pseudo-pure `|000⟩`.
///
/// Both environment spins are tipped to the equator, evolve for `τ₂` under
/// their mutual coupling (echoed), and spin 2 is turned back by ±π/2 about x
/// before the gradient. The same-parity weight is `(1 ± sin(2πJτ₂))/2`;
/// `τ₂ ∈ [0, 1/(4J)]` is found by bisection on the simulated populations.
#[derive(Clone, Debug)]
pub struct Preparation {
    pub program: PulseProgram,
    pub tau2: f64,
}

pub fn compile_preparation(q: f64, system_bit: u8, sys: &SpinSystem) -> Result<Preparation> {
    check_q(q)?;
    if system_bit > 1 {
        return Err(Error::InvalidArgument("system bit must be 0 or 1".into()));
    }
    if sys.n_spins() != 3 {
        return Err(Error::Compilation("preparation needs three spins".into()));
    }
    let j12 = sys.coupling(1, 2);
    if j12 == 0.0 {
        return Err(Error::Compilation("environment spins are not coupled".into()));
    }
    let tau_max = 1.0 / (4.0 * j12.abs());
    let start = states::pure_state(&[0, 0, 0])?;

    let build = |tau2: f64, back: PulseAxis| -> Result<PulseProgram> {
        let mut ops = Vec::new();
        if system_bit == 1 {
            ops.push(pi_pulse(SYSTEM_SPIN));
        }
        ops.push(PulseOp::rot(1, PulseAxis::Y, FRAC_PI_2));
        ops.push(PulseOp::rot(2, PulseAxis::Y, FRAC_PI_2));
        ops.extend(echoed_coupling(3, 1, 2, tau2));
        ops.push(PulseOp::rot(2, back, FRAC_PI_2));
        ops.push(PulseOp::Gradient);
        PulseProgram::new(format!("prepare q = {q}"), ops)
    };
    let same_parity = |tau2: f64, back: PulseAxis| -> Result<f64> {
        let rho = run_program(&start, sys, &build(tau2, back)?)?;
        let env = rho.reduce(&[1, 2])?;
        Ok(env.matrix()[(0, 0)].re + env.matrix()[(3, 3)].re)
    };

    // pick the turn-back direction whose range [½, far] contains q
    let back = [PulseAxis::X, PulseAxis::XBAR]
        .into_iter()
        .find(|&ax| {
            same_parity(tau_max, ax)
                .map(|far| (q - 0.5) * (far - 0.5) >= 0.0)
                .unwrap_or(false)
        })
        .ok_or_else(|| Error::Compilation("no preparation branch reaches q".into()))?;

    let far = same_parity(tau_max, back)?;
    let toward = |t: f64| -> Result<f64> { Ok((same_parity(t, back)? - q) * (far - 0.5).signum()) };
    let (mut lo, mut hi) = (0.0, tau_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if toward(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-18 {
            break;
        }
    }
    let tau2 = 0.5 * (lo + hi);
    Ok(Preparation {
        program: build(tau2, back)?,
        tau2,
    })
}

/// `|s⟩⟨s| ⊗ ρ_env` built directly, the reference for [`compile_preparation`].
pub fn direct_preparation(spec: EnvSpec, system_bit: u8) -> Result<DensityMatrix> {
    states::pure_state(&[system_bit])?.tensor(&states::env_state(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{map_lambda10, map_lambda20};
    use crate::linalg::distance_up_to_phase;
    use crate::states::{pure_state, EnvFlavor};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coupled_pair(j: f64) -> SpinSystem {
        SpinSystem::new(vec![0.0, 0.0], vec![vec![0.0, j], vec![j, 0.0]]).unwrap()
    }

    // H built from I_z operators and the literal ordered-pair sum.
    fn hamiltonian_by_operators(sys: &SpinSystem) -> ComplexMatrix {
        let n = sys.n_spins();
        let iz = |s: usize| linalg::embed(&pauli(Axis::Z).scale_real(0.5), n, &[s]).unwrap();
        let mut h = ComplexMatrix::zeros(1 << n);
        for s in 0..n {
            h = &h + &iz(s).scale_real(2.0 * PI * sys.offset(s));
        }
        for k in 0..n {
            for m in 0..n {
                if k != m {
                    h = &h + &(&iz(k) * &iz(m)).scale_real(2.0 * PI * sys.coupling(k, m));
                }
            }
        }
        h
    }

    #[test]
    fn spin_system_validation() {
        assert!(SpinSystem::new(vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(SpinSystem::new(vec![0.0, 1.0], vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(SpinSystem::new(vec![f64::NAN], vec![vec![0.0]]).is_err());
        assert!(SpinSystem::new(vec![0.0; 4], vec![vec![0.0; 4]; 4]).is_err());
        let d = SpinSystem::default();
        assert!((d.coupling(0, 1) - 69.832_402_234_636_87).abs() < 1e-9);
        assert!((d.coupling(0, 2) - 47.619_047_619_047_62).abs() < 1e-9);
    }

    #[test]
    fn free_propagator_examples() {
        let sys = SpinSystem::default();
        assert!(free_propagator(&sys, 0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(8)) < 1e-15);
        assert!(free_propagator(&sys, -1.0).is_err());

        let j = 50.0;
        let u = free_propagator(&coupled_pair(j), 1.0 / (4.0 * j)).unwrap();
        let m = Complex64::from_polar(1.0, -PI / 4.0);
        let p = Complex64::from_polar(1.0, PI / 4.0);
        let want = ComplexMatrix::from_diag(&[m, p, p, m]).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn free_propagator_matches_operator_hamiltonian() {
        let sys = SpinSystem::default();
        let tau = TAU1_ENV1;
        let u = free_propagator(&sys, tau).unwrap();
        let h = hamiltonian_by_operators(&sys);
        assert!(h.is_diagonal(0.0));
        for b in 0..8 {
            let want = Complex64::from_polar(1.0, -h[(b, b)].re * tau);
            assert!((u[(b, b)] - want).norm() < 1e-12, "basis {b}");
        }
        assert!(u.is_diagonal(0.0));
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn rotation_examples() {
        let sys = SpinSystem::default();
        let zero = rotation_propagator(&sys, &PulseOp::rot(1, PulseAxis::X, 0.0)).unwrap();
        assert!(zero.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-15);

        let u = rotation_propagator(&sys, &PulseOp::rot(0, PulseAxis::X, PI)).unwrap();
        let want = pauli(Axis::X).scale(c(0.0, -1.0)).kron(&ComplexMatrix::identity(4)).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-15);

        for (bar, plain) in [(PulseAxis::XBAR, PulseAxis::X), (PulseAxis::YBAR, PulseAxis::Y), (PulseAxis::ZBAR, PulseAxis::Z)] {
            let a = rotation_propagator(&sys, &PulseOp::rot_phase(2, bar, 0.7, 0.3)).unwrap();
            let b = rotation_propagator(&sys, &PulseOp::rot_phase(2, plain, -0.7, 0.3)).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
            assert!(a.unitarity_defect() < 1e-12);
        }

        // y axis is x axis with the phase advanced by π/2
        let y = rotation_propagator(&sys, &PulseOp::rot(1, PulseAxis::Y, 1.1)).unwrap();
        let x90 = rotation_propagator(&sys, &PulseOp::rot_phase(1, PulseAxis::X, 1.1, FRAC_PI_2)).unwrap();
        assert!(y.max_abs_diff(&x90) < 1e-15);

        assert!(rotation_propagator(&sys, &PulseOp::rot(3, PulseAxis::X, 1.0)).is_err());
        assert!(rotation_propagator(&sys, &PulseOp::Gradient).is_err());
    }

    #[test]
    fn gradient_examples() {
        let diag = pure_state(&[1]).unwrap();
        assert_eq!(gradient_dephase(&diag), diag);

        let plus = DensityMatrix::new(ComplexMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap()).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(gradient_dephase(&plus).matrix().max_abs_diff(&half) < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::new(
            ComplexMatrix::outer(&[c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]).unwrap(),
        )
        .unwrap();
        let want = ComplexMatrix::from_real(4, &[
            0.5, 0., 0., 0., //
            0., 0., 0., 0., //
            0., 0., 0., 0., //
            0., 0., 0., 0.5,
        ])
        .unwrap();
        let once = gradient_dephase(&bell);
        assert!(once.matrix().max_abs_diff(&want) < 1e-15);
        assert_eq!(gradient_dephase(&once), once);
        assert!((once.matrix().trace() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trivial_programs() {
        let sys = SpinSystem::default();
        let rho = direct_preparation(EnvSpec::classical(0.2).unwrap(), 0).unwrap();
        let noop = PulseProgram::new("noop", vec![PulseOp::rot(0, PulseAxis::X, 0.0)]).unwrap();
        assert!(run_program(&rho, &sys, &noop).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let wait = PulseProgram::new("wait", vec![PulseOp::free(TAU1_ENV1)]).unwrap();
        assert!(run_program(&rho, &sys, &wait).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-14);

        assert!(PulseProgram::new("empty", vec![]).is_err());
        assert!(run_program(&pure_state(&[0]).unwrap(), &sys, &noop).is_err());
    }

    #[test]
    fn spin_echo_refocuses_couplings_of_pulsed_spin() {
        let sys = SpinSystem::default();
        let tau = 0.0042;
        for k in 0..3 {
            let prog = PulseProgram::new("echo", vec![
                PulseOp::free(tau),
                pi_pulse(k),
                PulseOp::free(tau),
                pi_pulse(k),
            ])
            .unwrap();
            let u = program_propagator(&sys, &prog).unwrap();
            // reference: free evolution with every term touching spin k removed
            let mut offsets: Vec<f64> = (0..3).map(|s| sys.offset(s)).collect();
            offsets[k] = 0.0;
            let mut couplings = vec![vec![0.0; 3]; 3];
            #[allow(clippy::needless_range_loop)]
            for a in 0..3 {
                for b in 0..3 {
                    if a != k && b != k {
                        couplings[a][b] = sys.coupling(a, b);
                    }
                }
            }
            let reduced = SpinSystem::new(offsets, couplings).unwrap();
            let want = free_propagator(&reduced, 2.0 * tau).unwrap();
            assert!(distance_up_to_phase(&u, &want) < 1e-12, "spin {k}");
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn echoed_coupling_isolates_pair() {
        let sys = SpinSystem::default();
        let tau = 0.003;
        let u = program_propagator(&sys, &PulseProgram::new("pair", echoed_coupling(3, 0, 2, tau)).unwrap()).unwrap();
        let only = SpinSystem::new(vec![0.0; 3], vec![
            vec![0.0, 0.0, sys.coupling(0, 2)],
            vec![0.0, 0.0, 0.0],
            vec![sys.coupling(0, 2), 0.0, 0.0],
        ])
        .unwrap();
        assert!(distance_up_to_phase(&u, &free_propagator(&only, tau).unwrap()) < 1e-12);
    }

    #[test]
    fn compiled_collisions_match_unitary() {
        let sys = SpinSystem::default();
        for which in [1, 2] {
            for eta in [0.0, 0.01, 0.05, 0.1, 0.3, -0.2, 1.0] {
                let prog = compile_collision(eta, which, &sys).unwrap();
                let u = program_propagator(&sys, &prog).unwrap();
                let target = ideal_collision(eta, which, 3).unwrap();
                let dist = distance_up_to_phase(&u, &target);
                assert!(dist <= 1e-6, "which={which} eta={eta} dist={dist}");
                assert!(dist < 1e-12, "which={which} eta={eta} dist={dist}");
                assert!(prog.ops.iter().all(|op| !matches!(op, PulseOp::Gradient)));
            }
        }
    }

    #[test]
    fn compile_uses_quoted_free_times() {
        let sys = SpinSystem::default();
        let c1 = compile_collision(0.05, 1, &sys).unwrap();
        let c2 = compile_collision(0.05, 2, &sys).unwrap();
        // two controlled-W blocks, each one τ₁ of coupling evolution
        assert!((c1.total_free_time() - 2.0 * TAU1_ENV1).abs() < 1e-15);
        assert!((c2.total_free_time() - 2.0 * TAU1_ENV2).abs() < 1e-15);
        let total = c1.total_free_time() + c2.total_free_time();
        assert!(total < 0.03, "{total}");
    }

    #[test]
    fn compile_handles_negative_coupling() {
        let mut j = vec![vec![0.0; 3]; 3];
        j[0][1] = -40.0;
        j[1][0] = -40.0;
        j[0][2] = 25.0;
        j[2][0] = 25.0;
        let sys = SpinSystem::new(vec![100.0, -300.0, 800.0], j).unwrap();
        for which in [1, 2] {
            let u = program_propagator(&sys, &compile_collision(0.07, which, &sys).unwrap()).unwrap();
            assert!(distance_up_to_phase(&u, &ideal_collision(0.07, which, 3).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn compile_errors() {
        let mut j = vec![vec![0.0; 3]; 3];
        j[1][2] = 30.0;
        j[2][1] = 30.0;
        let uncoupled = SpinSystem::new(vec![0.0; 3], j).unwrap();
        assert!(matches!(compile_collision(0.1, 1, &uncoupled), Err(Error::Compilation(_))));
        let sys = SpinSystem::default();
        assert!(matches!(compile_collision(0.1, 3, &sys), Err(Error::Compilation(_))));
        assert!(matches!(compile_collision(f64::INFINITY, 1, &sys), Err(Error::Compilation(_))));
    }

    #[test]
    fn pulse_level_matches_maps() {
        let sys = SpinSystem::default();
        for q in [0.0, 0.25] {
            let env = states::env_state(EnvSpec::classical(q).unwrap()).unwrap();
            for eta in [0.01, 0.05, 0.1] {
                let rho0 = pure_state(&[0]).unwrap();
                let traj = pulse_trajectory(&rho0, &env, &[eta, eta], &sys).unwrap();
                let one = map_lambda10(&rho0, eta).unwrap();
                let two = map_lambda20(&rho0, eta, eta, q).unwrap();
                assert!(traj[0].matrix().max_abs_diff(one.matrix()) < 1e-6);
                assert!(traj[1].matrix().max_abs_diff(two.matrix()) < 1e-6);
            }
        }
    }

    #[test]
    fn preparation_reaches_env_state() {
        let sys = SpinSystem::default();
        for bit in [0u8, 1] {
            for q in [0.0, 0.15, 0.25, 0.5, 0.7, 1.0] {
                let prep = compile_preparation(q, bit, &sys).unwrap();
                assert!(prep.tau2 >= 0.0 && prep.tau2 <= 1.0 / (4.0 * sys.coupling(1, 2)) + 1e-15);
                let start = pure_state(&[0, 0, 0]).unwrap();
                let rho = run_program(&start, &sys, &prep.program).unwrap();
                let want = direct_preparation(EnvSpec::new(q, EnvFlavor::Classical).unwrap(), bit).unwrap();
                let err = rho.matrix().max_abs_diff(want.matrix());
                assert!(err < 1e-9, "q={q} bit={bit} err={err}");
            }
        }
        assert!(compile_preparation(1.5, 0, &sys).is_err());
    }

    #[test]
    fn text_round_trip() {
        let sys = SpinSystem::default();
        let mut prog = compile_collision(0.05, 2, &sys).unwrap();
        prog.ops.push(PulseOp::Gradient);
        let text = prog.to_text();
        assert!(text.lines().any(|l| l.starts_with("ROT 0 -x ")));
        assert!(text.lines().any(|l| l.starts_with("FREE ")));
        assert!(text.lines().any(|l| l == "GRAD"));
        assert_eq!(PulseProgram::parse(&text).unwrap(), prog);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(PulseProgram::parse("ROT 0 w 1 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(PulseProgram::parse("GRAD\nFREE -1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(PulseProgram::parse("JUMP\n"), Err(Error::Parse { .. })));
        assert!(PulseProgram::parse("# nothing\n").is_err());
        let p = PulseProgram::parse("# echo\nFREE 0.001\nROT 1 y 3.14 0\n").unwrap();
        assert_eq!(p.label, "echo");
        assert_eq!(p.ops.len(), 2);
    }
}
