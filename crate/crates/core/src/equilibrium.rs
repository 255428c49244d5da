//! Self-consistent BCS equilibria and initial states for the dynamics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BdgError, Result};
use crate::grid::MomentumGrid;
use crate::model::{delta_from_alpha, DeltaField, Potential};
use crate::spectral::ReferenceData;
use crate::state::{gibbs_point, gibbs_state, normal_point, BdGState};

/// Damping of the gap-equation fixed-point iteration.
pub const GAP_DAMPING: f64 = 0.5;
pub const GAP_TOL: f64 = 1e-10;
pub const GAP_MAX_ITER: usize = 10_000;

/// Converged gap-equation data.
#[derive(Debug, Clone)]
pub struct GapSolution {
    pub delta: DeltaField,
    pub state: BdGState,
    pub iterations: usize,
    /// Relative change of the last iteration.
    pub residual: f64,
}

/// Damped fixed-point iteration `Delta <- (1 - theta) Delta + theta V[alpha(Gibbs(Delta))]`.
///
/// Stops when the relative update falls below [`GAP_TOL`], or when the field has
/// collapsed below `1e-12` of its initial norm, in which case the normal state is returned.
pub fn gap_equation_solve(
    temperature: f64,
    mu: f64,
    potential: &Potential,
    grid: &MomentumGrid,
    delta_init: &DeltaField,
) -> Result<GapSolution> {
    potential.check_grid(grid)?;
    let init_norm = delta_init.norm(grid);
    if !(init_norm > 0.0) {
        return Err(BdgError::Domain("gap equation needs a nonzero initial field".into()));
    }
    let mut delta = delta_init.clone();
    let mut update = DeltaField::zeros(grid.len());
    let mut residual = f64::INFINITY;
    for iteration in 1..=GAP_MAX_ITER {
        let state = gibbs_state(&delta, temperature, mu, grid)?;
        potential.apply_delta(grid, &state.alpha, &mut update.values);
        let mut diff_sq = 0.0;
        let old_norm = delta.norm(grid);
        for ((d, u), w) in delta.values.iter_mut().zip(&update.values).zip(grid.weights()) {
            let next = (1.0 - GAP_DAMPING) * *d + GAP_DAMPING * u;
            diff_sq += w * (next - *d).norm_sqr();
            *d = next;
        }
        residual = diff_sq.sqrt() / old_norm;
        let norm = delta.norm(grid);
        if norm < 1e-12 * init_norm {
            let zero = DeltaField::zeros(grid.len());
            let state = gibbs_state(&zero, temperature, mu, grid)?;
            return Ok(GapSolution {
                delta: zero,
                state,
                iterations: iteration,
                residual: 0.0,
            });
        }
        if residual <= GAP_TOL {
            let state = gibbs_state(&delta, temperature, mu, grid)?;
            return Ok(GapSolution {
                delta,
                state,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(BdgError::NonConvergence {
        what: "gap equation".into(),
        iterations: GAP_MAX_ITER,
        residual,
    })
}

/// Initial gap field proportional to `V alpha_*`, of norm `scale`.
pub fn seed_delta(reference: &ReferenceData, scale: f64) -> Result<DeltaField> {
    let a: Vec<Complex64> = reference.alpha_star.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut d = delta_from_alpha(&a, &reference.potential, &reference.grid)?;
    let n = d.norm(&reference.grid);
    if !(n > 0.0) {
        return Err(BdgError::Domain("potential annihilates the gap eigenfunction".into()));
    }
    d.values.iter_mut().for_each(|v| *v *= scale / n);
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialStateKind {
    /// `alpha = h psi0 alpha_*` on top of the normal state.
    PerturbedNormal,
    /// Self-consistent equilibrium below `T_c`, pairing density rescaled so that `psi = psi0`.
    ScaledEquilibrium,
}

/// Builds the initial state of a run.
///
/// `PerturbedNormal` keeps `alpha = h psi0 alpha_*` exactly and takes `gamma(k)` from the
/// Gibbs state whose gap at `k` reproduces `|alpha(k)|`. For `psi0 = 0` this is the normal
/// state; in general `gamma - gamma_n = O(h^2)` and the state is admissible whenever
/// `h |psi0| |alpha_*(k)| < 1/2`.
pub fn build_initial_state(
    kind: InitialStateKind,
    psi0: Complex64,
    h: f64,
    reference: &ReferenceData,
    temperature: f64,
) -> Result<BdGState> {
    if !(h > 0.0) {
        return Err(BdgError::Domain(format!("h must be positive, got {h}")));
    }
    if !(temperature > 0.0) {
        return Err(BdgError::Domain(format!("temperature must be positive, got {temperature}")));
    }
    let grid = &reference.grid;
    let mu = reference.mu;
    match kind {
        InitialStateKind::PerturbedNormal => {
            let alpha: Vec<Complex64> = reference.alpha_star.iter().map(|a| h * psi0 * *a).collect();
            let peak = alpha.iter().map(|a| a.norm()).fold(0.0, f64::max);
            if peak >= 0.5 {
                return Err(BdgError::HTooLarge {
                    excess: peak * peak - 0.25,
                });
            }
            let gamma = grid
                .nodes()
                .par_iter()
                .zip(&alpha)
                .map(|(k, a)| dressed_gamma(k * k - mu, a.norm(), temperature))
                .collect();
            BdGState::new(gamma, alpha)
        }
        InitialStateKind::ScaledEquilibrium => {
            if temperature >= reference.t_c {
                return Err(BdgError::Domain(format!(
                    "scaled equilibrium needs T < T_c (T = {temperature}, T_c = {})",
                    reference.t_c
                )));
            }
            let seed = seed_delta(reference, 0.1)?;
            let sol = gap_equation_solve(temperature, mu, &reference.potential, grid, &seed)?;
            let overlap = grid.inner_real_complex(&reference.alpha_star, &sol.state.alpha);
            if overlap.norm() == 0.0 {
                return Err(BdgError::Domain("equilibrium has no overlap with alpha_*".into()));
            }
            let c = h * psi0 / overlap;
            let alpha: Vec<Complex64> = sol.state.alpha.iter().map(|a| c * a).collect();
            let state = BdGState {
                gamma: sol.state.gamma,
                alpha,
            };
            let m = state.admissibility_margin();
            if m < -crate::state::ADMISSIBILITY_TOL {
                return Err(BdgError::HTooLarge { excess: -m });
            }
            Ok(state)
        }
    }
}

/// `gamma` of the 2x2 Gibbs block at energy `eps` whose pairing amplitude equals `target`.
pub(crate) fn dressed_gamma(eps: f64, target: f64, temperature: f64) -> f64 {
    if target == 0.0 {
        return normal_point(eps, temperature);
    }
    let amplitude = |d: f64| {
        let e = eps.hypot(d);
        if e == 0.0 {
            0.0
        } else {
            d * (e / (2.0 * temperature)).tanh() / (2.0 * e)
        }
    };
    let mut hi = target.max(1e-300);
    while amplitude(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if amplitude(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    gibbs_point(eps, Complex64::new(0.5 * (lo + hi), 0.0), temperature).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dimension;
    use crate::spectral::{critical_temperature, default_bracket};
    use crate::state::normal_state;
    use std::sync::Arc;

    fn reference() -> ReferenceData {
        let g = MomentumGrid::clustered(Dimension::ThreeDRadial, 512, 6.0, 1.0).unwrap();
        let p = Potential::separable_gaussian(&g, 0.34, 1.0).unwrap();
        critical_temperature(1.0, Arc::new(p), Arc::new(g), default_bracket(1.0)).unwrap()
    }

    #[test]
    fn dressed_gamma_reproduces_amplitude() {
        for (eps, a, t) in [(0.3, 0.01, 0.18), (-0.02, 0.2, 0.18), (0.0, 0.4, 0.1), (5.0, 1e-8, 0.2)] {
            let g = dressed_gamma(eps, a, t);
            let m = g * (1.0 - g) - a * a;
            assert!(m >= -1e-15, "eps {eps}");
            assert!(g > 0.0 && g < 1.0);
        }
        assert_eq!(dressed_gamma(0.7, 0.0, 0.2), normal_point(0.7, 0.2));
    }

    #[test]
    fn perturbed_normal_with_zero_psi_is_normal_state() {
        let r = reference();
        let t = r.t_c + 0.01;
        let s = build_initial_state(InitialStateKind::PerturbedNormal, Complex64::new(0.0, 0.0), 0.1, &r, t).unwrap();
        let n = normal_state(t, 1.0, &r.grid).unwrap();
        assert_eq!(s, n);
    }

    #[test]
    fn perturbed_normal_rejects_large_h() {
        let r = reference();
        let res = build_initial_state(InitialStateKind::PerturbedNormal, Complex64::new(1.0, 0.0), 50.0, &r, r.t_c);
        assert!(matches!(res, Err(BdgError::HTooLarge { .. })));
    }

    #[test]
    fn gap_equation_above_tc_collapses() {
        let r = reference();
        let seed = seed_delta(&r, 0.3).unwrap();
        let sol = gap_equation_solve(1.5 * r.t_c, 1.0, &r.potential, &r.grid, &seed).unwrap();
        assert!(sol.delta.values.iter().all(|d| d.norm() == 0.0));
    }

    #[test]
    fn gap_equation_fixed_point_is_stable() {
        let r = reference();
        let seed = seed_delta(&r, 0.3).unwrap();
        let t = 0.8 * r.t_c;
        let sol = gap_equation_solve(t, 1.0, &r.potential, &r.grid, &seed).unwrap();
        let again = delta_from_alpha(&sol.state.alpha, &r.potential, &r.grid).unwrap();
        let diff: Vec<Complex64> = again.values.iter().zip(&sol.delta.values).map(|(a, b)| a - b).collect();
        assert!(r.grid.norm_complex(&diff) <= 1e-9 * sol.delta.norm(&r.grid));
        assert!(crate::state::pressure_difference(&sol.state, t, 1.0, &r.potential, &r.grid).unwrap() < 0.0);
    }

    #[test]
    fn scaled_equilibrium_hits_requested_psi() {
        let r = reference();
        let t = r.t_c - 0.01;
        let psi0 = Complex64::new(0.6, 0.3);
        let s = build_initial_state(InitialStateKind::ScaledEquilibrium, psi0, 0.1, &r, t).unwrap();
        let psi = r.grid.inner_real_complex(&r.alpha_star, &s.alpha) / 0.1;
        assert!((psi - psi0).norm() < 1e-12);
        assert!(build_initial_state(InitialStateKind::ScaledEquilibrium, psi0, 0.1, &r, r.t_c + 0.01).is_err());
    }
}
