//! BdG states, the Gibbs family, and the pressure functional relative to the normal state.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{BdgError, Result};
use crate::grid::MomentumGrid;
use crate::model::{DeltaField, Potential};
use crate::quadrature::compensated_sum;

/// Pointwise tolerance on `(gamma - 1/2)^2 + |alpha|^2 <= 1/4` accepted by constructors.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

/// Translation-invariant, even quasi-free state: `gamma(k)` and `alpha_hat(k)` per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct BdGState {
    pub gamma: Vec<f64>,
    pub alpha: Vec<Complex64>,
}

impl BdGState {
    /// Validated constructor; rejects fields of unequal length and inadmissible data.
    pub fn new(gamma: Vec<f64>, alpha: Vec<Complex64>) -> Result<Self> {
        if gamma.len() != alpha.len() {
            return Err(BdgError::DimensionMismatch(format!(
                "gamma has {} values, alpha has {}",
                gamma.len(),
                alpha.len()
            )));
        }
        let state = BdGState { gamma, alpha };
        state.check_admissible(ADMISSIBILITY_TOL)?;
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// `min_k [gamma (1 - gamma) - |alpha|^2]`, which equals `min_k (1/4 - s^2)`.
    pub fn admissibility_margin(&self) -> f64 {
        self.gamma
            .iter()
            .zip(&self.alpha)
            .map(|(g, a)| margin(*g, *a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_admissible(&self, tol: f64) -> Result<()> {
        if let Some((i, g)) = self
            .gamma
            .iter()
            .enumerate()
            .find(|(_, g)| !(**g >= -tol && **g <= 1.0 + tol))
        {
            return Err(BdgError::invariant(format!("gamma outside [0, 1] at node {i}"), *g));
        }
        let m = self.admissibility_margin();
        if !(m >= -tol) {
            return Err(BdgError::invariant("(gamma - 1/2)^2 + |alpha|^2 <= 1/4", -m));
        }
        Ok(())
    }

    /// The conserved field `s(k) = sqrt((gamma - 1/2)^2 + |alpha|^2)`.
    pub fn s_field(&self) -> Vec<f64> {
        self.gamma.iter().zip(&self.alpha).map(|(g, a)| s_value(*g, *a)).collect()
    }

    /// Multiplies the pairing density by `e^{i theta}`.
    pub fn rotate_phase(&mut self, theta: f64) {
        let u = Complex64::from_polar(1.0, theta);
        self.alpha.iter_mut().for_each(|a| *a *= u);
    }
}

#[inline]
pub(crate) fn margin(gamma: f64, alpha: Complex64) -> f64 {
    gamma * (1.0 - gamma) - alpha.norm_sqr()
}

#[inline]
pub(crate) fn s_value(gamma: f64, alpha: Complex64) -> f64 {
    (gamma - 0.5).hypot(alpha.norm())
}

/// Entropy density `-[l+ ln l+ + l- ln l-]` of a 2x2 block with eigenvalues `1/2 +- s`;
/// the small eigenvalue is taken from the margin to keep its relative accuracy.
#[inline]
pub(crate) fn entropy_density(gamma: f64, alpha: Complex64) -> f64 {
    let s = s_value(gamma, alpha);
    let hi = (0.5 + s).clamp(1e-30, 1.0);
    let lo = (margin(gamma, alpha) / (0.5 + s)).clamp(1e-30, 1.0);
    -(hi * hi.ln() + lo * lo.ln())
}

/// Fermi–Dirac occupation `(1 + e^{eps/T})^{-1}`, evaluated without overflow.
#[inline]
pub fn fermi(eps: f64, temperature: f64) -> f64 {
    let x = eps / temperature;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `gamma_n` at energy `eps`, bit-identical to the normal-state Gibbs value.
#[inline]
pub(crate) fn normal_point(eps: f64, temperature: f64) -> f64 {
    gibbs_point(eps, Complex64::new(0.0, 0.0), temperature).0
}

/// Gibbs state of a single 2x2 block with gap `delta` at energy `eps`.
#[inline]
pub(crate) fn gibbs_point(eps: f64, delta: Complex64, temperature: f64) -> (f64, Complex64) {
    let d2 = delta.norm_sqr();
    let e = eps.hypot(delta.norm());
    if e == 0.0 {
        return (0.5, Complex64::new(0.0, 0.0));
    }
    let t = (e / (2.0 * temperature)).tanh();
    let gamma = if eps > 0.0 {
        let one_minus_t = 2.0 / ((e / temperature).exp() + 1.0);
        d2 / (2.0 * e * (e + eps)) + eps * one_minus_t / (2.0 * e)
    } else {
        0.5 - eps * t / (2.0 * e)
    };
    (gamma, -delta * (t / (2.0 * e)))
}

/// Gibbs state `Gamma = (1 + e^{H/T})^{-1}` for the BdG Hamiltonian with gap field `delta`.
pub fn gibbs_state(delta: &DeltaField, temperature: f64, mu: f64, grid: &MomentumGrid) -> Result<BdGState> {
    if !(temperature > 0.0) {
        return Err(BdgError::Domain(format!("Gibbs state needs T > 0, got {temperature}")));
    }
    if delta.values.len() != grid.len() {
        return Err(BdgError::DimensionMismatch("gap field and grid differ in length".into()));
    }
    let (gamma, alpha) = grid
        .nodes()
        .par_iter()
        .zip(&delta.values)
        .map(|(k, d)| gibbs_point(k * k - mu, *d, temperature))
        .unzip();
    Ok(BdGState { gamma, alpha })
}

/// The pairing-free Fermi–Dirac state.
pub fn normal_state(temperature: f64, mu: f64, grid: &MomentumGrid) -> Result<BdGState> {
    gibbs_state(&DeltaField::zeros(grid.len()), temperature, mu, grid)
}

/// `gamma_n(k)` alone.
pub fn normal_gamma(temperature: f64, mu: f64, grid: &MomentumGrid) -> Vec<f64> {
    grid.nodes().iter().map(|k| normal_point(k * k - mu, temperature)).collect()
}

/// Interaction energy `(1/2) Re <alpha, Delta>`.
pub fn interaction_energy(state: &BdGState, potential: &Potential, grid: &MomentumGrid) -> Result<f64> {
    let delta = crate::model::delta_from_alpha(&state.alpha, potential, grid)?;
    Ok(0.5 * grid.inner_complex(&state.alpha, &delta.values).re)
}

/// `F(Gamma) - F(Gamma_n)` as one integral of pointwise differences against the normal state.
pub fn pressure_difference(
    state: &BdGState,
    temperature: f64,
    mu: f64,
    potential: &Potential,
    grid: &MomentumGrid,
) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(BdgError::Domain(format!("pressure needs T > 0, got {temperature}")));
    }
    check_lengths(state, grid)?;
    state.check_admissible(ADMISSIBILITY_TOL)?;
    let local = compensated_sum(grid.nodes().iter().zip(grid.weights()).enumerate().map(|(i, (k, w))| {
        let eps = k * k - mu;
        let gn = normal_point(eps, temperature);
        let ds = entropy_density(state.gamma[i], state.alpha[i]) - entropy_density(gn, Complex64::new(0.0, 0.0));
        w * (eps * (state.gamma[i] - gn) - temperature * ds)
    }));
    Ok(local + interaction_energy(state, potential, grid)?)
}

/// `F(b) - F(a)` from pointwise differences of the two states; used to monitor drift.
pub fn pressure_change(
    a: &BdGState,
    b: &BdGState,
    temperature: f64,
    mu: f64,
    potential: &Potential,
    grid: &MomentumGrid,
) -> Result<f64> {
    check_lengths(a, grid)?;
    check_lengths(b, grid)?;
    let local = compensated_sum(grid.nodes().iter().zip(grid.weights()).enumerate().map(|(i, (k, w))| {
        let eps = k * k - mu;
        let ds = entropy_density(b.gamma[i], b.alpha[i]) - entropy_density(a.gamma[i], a.alpha[i]);
        w * (eps * (b.gamma[i] - a.gamma[i]) - temperature * ds)
    }));
    Ok(local + interaction_energy(b, potential, grid)? - interaction_energy(a, potential, grid)?)
}

fn check_lengths(state: &BdGState, grid: &MomentumGrid) -> Result<()> {
    if state.len() != grid.len() || state.alpha.len() != grid.len() {
        return Err(BdgError::DimensionMismatch(format!(
            "state has {} nodes, grid has {}",
            state.len(),
            grid.len()
        )));
    }
    Ok(())
}
