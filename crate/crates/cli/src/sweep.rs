//! Evaluation of `D(1)`, `D(2)` and `ΔD` over an `(η, q)` grid.

use rayon::prelude::*;

use nmr_collision::collision::{evolve_sequence, map_lambda10, map_lambda20, CollisionConfig};
use nmr_collision::nmrsim::{pulse_trajectory, SpinSystem};
use nmr_collision::resolution::{
    classify_with, distance_std_error, perturb_bloch_with, propagate_error, simulate_tomography_with, stream,
    Resolution, TomographyEstimate,
};
use nmr_collision::states::{env_state, pure_state, DensityMatrix, EnvSpec};
use nmr_collision::witness::{bloch_trace_distance, closed_form_d1, closed_form_d2, trace_distance};

use crate::config::{Mode, SweepConfig};
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub q: f64,
    pub d1: f64,
    pub d2: f64,
    pub delta_d: f64,
    pub d1_analytic: f64,
    pub d2_analytic: f64,
    pub delta_d_analytic: f64,
    /// Error bar on `delta_d`.
    pub delta_d_error: f64,
    /// Shot-noise standard errors of `d1` and `d2` (zero outside tomography).
    pub d1_std_error: f64,
    pub d2_std_error: f64,
    pub verdict: Resolution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub mode: Mode,
    pub q_values: Vec<f64>,
    /// `δD`, the constant resolution floor drawn on plots.
    pub delta_d_floor: f64,
    /// Grouped by `q` in `q_values` order, `η` ascending within a group.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn series(&self, q: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.q == q)
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let etas = cfg.eta_grid();
    let points: Vec<(f64, f64)> = cfg
        .q_values
        .iter()
        .flat_map(|&q| etas.iter().map(move |&eta| (eta, q)))
        .collect();
    let sys = SpinSystem::default();

    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, &(eta, q))| evaluate_point(cfg, &sys, index as u64, eta, q))
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        mode: cfg.mode,
        q_values: cfg.q_values.clone(),
        delta_d_floor: propagate_error(cfg.delta_r),
        rows,
    })
}

/// Reduced states of the `|0⟩` and `|1⟩` runs after collisions 1 and 2.
fn evolved_pairs(
    cfg: &SweepConfig,
    sys: &SpinSystem,
    eta: f64,
    q: f64,
) -> Result<[(DensityMatrix, DensityMatrix); 2]> {
    let up = pure_state(&[0]).map_err(CliError::from)?;
    let down = pure_state(&[1]).map_err(CliError::from)?;
    let env = EnvSpec::new(q, cfg.env_flavor).map_err(|e| CliError::Usage(e.to_string()))?;
    let (a, b) = match cfg.mode {
        Mode::Map => (
            vec![map_lambda10(&up, eta)?, map_lambda20(&up, eta, eta, q)?],
            vec![map_lambda10(&down, eta)?, map_lambda20(&down, eta, eta, q)?],
        ),
        Mode::Circuit | Mode::Tomography => {
            let c = CollisionConfig::two_step(eta, env)?;
            (evolve_sequence(&up, &c)?, evolve_sequence(&down, &c)?)
        }
        Mode::Pulse => {
            let env = env_state(env)?;
            (
                pulse_trajectory(&up, &env, &[eta, eta], sys)?,
                pulse_trajectory(&down, &env, &[eta, eta], sys)?,
            )
        }
    };
    let mut a = a.into_iter();
    let mut b = b.into_iter();
    let mut next = || -> (DensityMatrix, DensityMatrix) { (a.next().unwrap(), b.next().unwrap()) };
    Ok([next(), next()])
}

fn evaluate_point(cfg: &SweepConfig, sys: &SpinSystem, index: u64, eta: f64, q: f64) -> Result<SweepRow> {
    let pairs = evolved_pairs(cfg, sys, eta, q)?;
    let floor = propagate_error(cfg.delta_r);

    let (d1, d2, se1, se2, err) = if cfg.mode == Mode::Tomography {
        let mut rng = stream(cfg.seed, index);
        let mut measure = |rho: &DensityMatrix| -> Result<TomographyEstimate> {
            let mut est = simulate_tomography_with(rho, cfg.shots, &mut rng)?;
            if cfg.delta_r > 0.0 {
                est.bloch = perturb_bloch_with(&est.bloch, cfg.delta_r, &mut rng);
            }
            Ok(est)
        };
        let mut est = Vec::with_capacity(4);
        for (a, b) in &pairs {
            est.push((measure(a)?, measure(b)?));
        }
        let d = |k: usize| bloch_trace_distance(&est[k].0.bloch, &est[k].1.bloch);
        let se = |k: usize| distance_std_error(&est[k].0, &est[k].1);
        let shot_err = (se(0).powi(2) + se(1).powi(2)).sqrt();
        (d(0), d(1), se(0), se(1), (floor * floor + shot_err * shot_err).sqrt())
    } else {
        let d1 = trace_distance(&pairs[0].0, &pairs[0].1)?;
        let d2 = trace_distance(&pairs[1].0, &pairs[1].1)?;
        (d1, d2, 0.0, 0.0, floor)
    };

    let d1_analytic = closed_form_d1(eta);
    let d2_analytic = closed_form_d2(eta, q)?;
    let delta_d = d2 - d1;
    Ok(SweepRow {
        eta,
        q,
        d1,
        d2,
        delta_d,
        d1_analytic,
        d2_analytic,
        delta_d_analytic: d2_analytic - d1_analytic,
        delta_d_error: err,
        d1_std_error: se1,
        d2_std_error: se2,
        verdict: classify_with(delta_d, cfg.delta_r, cfg.threshold_rule),
    })
}
