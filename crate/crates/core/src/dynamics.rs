//! Nonlinear BdG flow with a per-momentum exact unitary step.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BdgError, Result};
use crate::grid::MomentumGrid;
use crate::model::{delta_from_alpha, DeltaField, Potential};
use crate::state::BdGState;

/// Largest accepted `dt * max_k E(k)`.
pub const RESOLUTION_GUARD: f64 = 0.5;
/// Default `dt * max_k E(k)` when the step is chosen automatically.
pub const AUTO_STEP_FACTOR: f64 = 0.1;
/// Admissibility violation that aborts an evolution.
pub const ABORT_MARGIN: f64 = 1e-8;

const PAR_CHUNK: usize = 512;

/// Exact conjugation `Gamma -> U Gamma U^*` with `U = exp(-i dt H)` for the frozen
/// 2x2 Hamiltonian `H = [[eps, delta], [conj(delta), -eps]]`.
///
/// With `U = c - i s H/E`, `a = eps/E` and `b = delta/E` the matrix elements are
///
/// `gamma' = gamma + s^2 |b|^2 (1 - 2 gamma) + 2 s^2 a Re(b conj(alpha)) + 2 c s Im(b conj(alpha))`,
/// `alpha' = (c - i s a)^2 alpha + s^2 b (a (2 gamma - 1) + b conj(alpha)) + i c s b (2 gamma - 1)`.
///
/// Every change of `gamma` carries a factor `b`, so nodes with a negligible gap keep
/// `gamma` to full relative precision and the normal state is bit-identical.
#[inline]
pub fn unitary_step_2x2(gamma: f64, alpha: Complex64, eps: f64, delta: Complex64, dt: f64) -> (f64, Complex64) {
    let e = eps.hypot(delta.norm());
    if e == 0.0 || dt == 0.0 {
        return (gamma, alpha);
    }
    let a = eps / e;
    let b = delta / e;
    let (s, c) = (e * dt).sin_cos();
    let s2 = s * s;
    let cs = c * s;
    let ba = b * alpha.conj();
    let g1 = 2.0 * gamma - 1.0;
    let gamma_new = gamma - s2 * b.norm_sqr() * g1 + 2.0 * (s2 * a * ba.re + cs * ba.im);
    let phase = Complex64::new(c, -s * a);
    let alpha_new = phase * phase * alpha + s2 * b * (a * g1 + b * alpha.conj()) + Complex64::new(0.0, cs) * b * g1;
    (gamma_new, alpha_new)
}

/// `eps(k) = k^2 - mu` and the gap field generated by the state.
pub fn hamiltonian_field(
    state: &BdGState,
    potential: &Potential,
    mu: f64,
    grid: &MomentumGrid,
) -> Result<(Vec<f64>, DeltaField)> {
    let delta = delta_from_alpha(&state.alpha, potential, grid)?;
    Ok((grid.epsilon(mu), delta))
}

/// Largest quasiparticle energy `sqrt(eps^2 + |Delta|^2)` over the grid.
pub fn max_quasiparticle_energy(eps: &[f64], delta: &DeltaField) -> f64 {
    eps.iter()
        .zip(&delta.values)
        .map(|(e, d)| e.hypot(d.norm()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    pub observe_every: usize,
    pub midpoint_iters: usize,
}

impl EvolveConfig {
    /// Step chosen as `factor / max_k E(k)` for the given initial state.
    pub fn auto(
        state0: &BdGState,
        potential: &Potential,
        mu: f64,
        grid: &MomentumGrid,
        t_end: f64,
        factor: f64,
    ) -> Result<Self> {
        let (eps, delta) = hamiltonian_field(state0, potential, mu, grid)?;
        let e_max = max_quasiparticle_energy(&eps, &delta);
        Ok(EvolveConfig {
            dt: factor / e_max,
            t_end,
            observe_every: 1,
            midpoint_iters: 2,
        })
    }

    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self, e_max: f64) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(BdgError::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(BdgError::Domain(format!("t_end must be finite and non-negative, got {}", self.t_end)));
        }
        if self.observe_every == 0 {
            return Err(BdgError::Domain("observe_every must be at least 1".into()));
        }
        if self.dt * e_max > RESOLUTION_GUARD * (1.0 + 1e-12) {
            return Err(BdgError::Resolution(format!(
                "dt * max E = {:.4} exceeds {RESOLUTION_GUARD}; reduce dt below {:e}",
                self.dt * e_max,
                RESOLUTION_GUARD / e_max
            )));
        }
        Ok(())
    }
}

/// Receives the state at every observation time.
pub trait Observer {
    fn observe(&mut self, t: f64, state: &BdGState, delta: &DeltaField) -> Result<()>;
}

impl<F: FnMut(f64, &BdGState, &DeltaField) -> Result<()>> Observer for F {
    fn observe(&mut self, t: f64, state: &BdGState, delta: &DeltaField) -> Result<()> {
        self(t, state, delta)
    }
}

/// Applies [`unitary_step_2x2`] at every node with a common step.
pub fn step_all(from: &BdGState, eps: &[f64], delta: &[Complex64], dt: f64, to: &mut BdGState) {
    to.gamma
        .par_iter_mut()
        .with_min_len(PAR_CHUNK)
        .zip(to.alpha.par_iter_mut().with_min_len(PAR_CHUNK))
        .enumerate()
        .for_each(|(i, (g, a))| {
            let (g2, a2) = unitary_step_2x2(from.gamma[i], from.alpha[i], eps[i], delta[i], dt);
            *g = g2;
            *a = a2;
        });
}

/// Integrates the nonlinear BdG flow with midpoint-self-consistent gap fields.
///
/// Each step rotates every 2x2 block exactly for a frozen Hamiltonian; the gap used
/// is the average of the gap at the start of the step and at the predicted end,
/// refined `midpoint_iters` times. Observers see step 0, every `observe_every`-th
/// step and the final step. Returns the final state.
pub fn evolve_nonlinear(
    state0: &BdGState,
    potential: &Potential,
    mu: f64,
    grid: &MomentumGrid,
    config: &EvolveConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<BdGState> {
    if state0.len() != grid.len() {
        return Err(BdgError::DimensionMismatch("initial state and grid differ in length".into()));
    }
    state0.check_admissible(crate::state::ADMISSIBILITY_TOL)?;
    let (eps, mut delta) = hamiltonian_field(state0, potential, mu, grid)?;
    config.validate(max_quasiparticle_energy(&eps, &delta))?;

    let steps = config.steps();
    let mut state = state0.clone();
    let mut trial = state0.clone();
    let mut trial_delta = DeltaField::zeros(grid.len());
    let mut mid = DeltaField::zeros(grid.len());

    for obs in observers.iter_mut() {
        obs.observe(0.0, &state, &delta)?;
    }
    for step in 1..=steps {
        step_all(&state, &eps, &delta.values, config.dt, &mut trial);
        for _ in 0..config.midpoint_iters {
            potential.apply_delta(grid, &trial.alpha, &mut trial_delta.values);
            for ((m, d), p) in mid.values.iter_mut().zip(&delta.values).zip(&trial_delta.values) {
                *m = 0.5 * (d + p);
            }
            step_all(&state, &eps, &mid.values, config.dt, &mut trial);
        }
        std::mem::swap(&mut state, &mut trial);
        potential.apply_delta(grid, &state.alpha, &mut delta.values);

        let t = step as f64 * config.dt;
        let margin = state.admissibility_margin();
        if !(margin >= -ABORT_MARGIN) {
            return Err(BdgError::InvariantViolation {
                what: "admissibility (gamma - 1/2)^2 + |alpha|^2 <= 1/4".into(),
                value: -margin,
                t: Some(t),
            });
        }
        if step % config.observe_every == 0 || step == steps {
            for obs in observers.iter_mut() {
                obs.observe(t, &state, &delta)?;
            }
        }
    }
    Ok(state)
}
