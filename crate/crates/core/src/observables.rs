//! Order parameter, the `(xi, eta)` decomposition, conserved quantities and
//! residuals of the exact identities satisfied by the flow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Observer;
use crate::error::{BdgError, Result};
use crate::grid::MomentumGrid;
use crate::model::DeltaField;
use crate::quadrature::compensated_sum;
use crate::spectral::ReferenceData;
use crate::state::{entropy_density, normal_gamma, s_value, BdGState};

/// `psi = h^{-1} <alpha_*, alpha>`.
pub fn psi_of(state: &BdGState, reference: &ReferenceData, h: f64) -> Complex64 {
    reference.grid.inner_real_complex(&reference.alpha_star, &state.alpha) / h
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub psi: Complex64,
    /// `alpha - h psi alpha_*`, orthogonal to `alpha_*`.
    pub xi: Vec<Complex64>,
    /// `gamma - gamma_n(T)`.
    pub eta: Vec<f64>,
}

pub fn decompose(state: &BdGState, reference: &ReferenceData, h: f64, temperature: f64) -> Decomposition {
    let psi = psi_of(state, reference, h);
    let xi = state
        .alpha
        .iter()
        .zip(&reference.alpha_star)
        .map(|(a, s)| a - h * psi * *s)
        .collect();
    let gn = normal_gamma(temperature, reference.mu, &reference.grid);
    let eta = state.gamma.iter().zip(&gn).map(|(g, n)| g - n).collect();
    Decomposition { psi, xi, eta }
}

/// `s(k) = sqrt((gamma - 1/2)^2 + |alpha|^2)`.
pub fn s_field(state: &BdGState) -> Vec<f64> {
    state.s_field()
}

fn tanh_field(temperature: f64, mu: f64, grid: &MomentumGrid) -> Vec<f64> {
    grid.nodes().iter().map(|k| ((k * k - mu) / (2.0 * temperature)).tanh()).collect()
}

/// Max over `k` of the defect of
/// `eta_t^2 - eta_0^2 - (eta_t - eta_0) tanh(eps/2T) = |alpha_0|^2 - |alpha_t|^2`.
pub fn eq10_residual(
    state_t: &BdGState,
    state_0: &BdGState,
    temperature: f64,
    mu: f64,
    grid: &MomentumGrid,
) -> f64 {
    let gn = normal_gamma(temperature, mu, grid);
    let th = tanh_field(temperature, mu, grid);
    eq10_with(state_t, state_0, &gn, &th)
}

fn eq10_with(state_t: &BdGState, state_0: &BdGState, gn: &[f64], th: &[f64]) -> f64 {
    (0..state_t.len())
        .map(|i| {
            let et = state_t.gamma[i] - gn[i];
            let e0 = state_0.gamma[i] - gn[i];
            let lhs = (et - e0) * (et + e0 - th[i]);
            let rhs = state_0.alpha[i].norm_sqr() - state_t.alpha[i].norm_sqr();
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Minimum number of grid nodes a Fermi shell must contain.
pub const MIN_SHELL_NODES: usize = 8;

/// `int_{||k| - sqrt(mu)| <= delta} |field|^2` restricted to the grid nodes in the shell.
pub fn fermi_shell_mass(field: &[Complex64], delta: f64, mu: f64, grid: &MomentumGrid) -> Result<f64> {
    let kf = mu.sqrt();
    if !(delta > 0.0 && delta < kf) {
        return Err(BdgError::Domain(format!("shell half-width must lie in (0, sqrt(mu)), got {delta}")));
    }
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| (grid.nodes()[i].abs() - kf).abs() <= delta)
        .collect();
    if inside.len() < MIN_SHELL_NODES {
        return Err(BdgError::Resolution(format!(
            "Fermi shell of half-width {delta} holds {} grid nodes, need {MIN_SHELL_NODES}",
            inside.len()
        )));
    }
    Ok(compensated_sum(inside.iter().map(|&i| grid.weights()[i] * field[i].norm_sqr())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaCubicResidual {
    /// Max outside the shell of `|(eta_t - eta_0) - (|alpha_t|^2 - |alpha_0|^2) / tanh(eps/2T)|`.
    pub outside: f64,
    /// Max inside the shell of `|eta_t - eta_0|`.
    pub inside: f64,
}

pub fn eta_cubic_residual(
    state_t: &BdGState,
    state_0: &BdGState,
    temperature: f64,
    mu: f64,
    exclusion: f64,
    grid: &MomentumGrid,
) -> Result<EtaCubicResidual> {
    if !(exclusion > 0.0) {
        return Err(BdgError::Domain(format!("exclusion must be positive, got {exclusion}")));
    }
    let kf = mu.sqrt();
    let th = tanh_field(temperature, mu, grid);
    let mut out = EtaCubicResidual {
        outside: 0.0,
        inside: 0.0,
    };
    for i in 0..grid.len() {
        let d_eta = state_t.gamma[i] - state_0.gamma[i];
        if (grid.nodes()[i].abs() - kf).abs() <= exclusion {
            out.inside = out.inside.max(d_eta.abs());
        } else {
            let d_a = state_t.alpha[i].norm_sqr() - state_0.alpha[i].norm_sqr();
            out.outside = out.outside.max((d_eta - d_a / th[i]).abs());
        }
    }
    Ok(out)
}

/// One observation of a run; one CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservablesRecord {
    pub t: f64,
    pub psi_re: f64,
    pub psi_im: f64,
    pub abs_psi_sq: f64,
    pub pressure_drift: f64,
    pub s_drift: f64,
    pub xi_norm: f64,
    pub eta_norm: f64,
    pub delta_norm: f64,
    pub eq10_residual: f64,
    pub admissibility_margin: f64,
}

impl ObservablesRecord {
    pub const COLUMNS: [&'static str; 11] = [
        "t",
        "psi_re",
        "psi_im",
        "abs_psi_sq",
        "pressure_drift",
        "s_drift",
        "xi_norm",
        "eta_norm",
        "delta_norm",
        "eq10_residual",
        "admissibility_margin",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.psi_re,
            self.psi_im,
            self.abs_psi_sq,
            self.pressure_drift,
            self.s_drift,
            self.xi_norm,
            self.eta_norm,
            self.delta_norm,
            self.eq10_residual,
            self.admissibility_margin,
        ]
    }

    pub fn psi(&self) -> Complex64 {
        Complex64::new(self.psi_re, self.psi_im)
    }
}

/// Thresholds checked at every observation of a nonlinear run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantLimits {
    pub s_drift: f64,
    pub eq10: f64,
    pub margin: f64,
}

impl Default for InvariantLimits {
    fn default() -> Self {
        InvariantLimits {
            s_drift: 1e-10,
            eq10: 1e-9,
            margin: -1e-12,
        }
    }
}

/// Observer producing an [`ObservablesRecord`] per observation and recording
/// every breach of [`InvariantLimits`].
pub struct Monitor<'a> {
    reference: &'a ReferenceData,
    h: f64,
    temperature: f64,
    state0: BdGState,
    s0: Vec<f64>,
    entropy0: Vec<f64>,
    gamma_n: Vec<f64>,
    tanh_eps: Vec<f64>,
    interaction0: Option<f64>,
    pub limits: InvariantLimits,
    pub records: Vec<ObservablesRecord>,
    pub violations: Vec<String>,
}

impl<'a> Monitor<'a> {
    pub fn new(reference: &'a ReferenceData, state0: &BdGState, h: f64, temperature: f64) -> Self {
        let grid = &reference.grid;
        Monitor {
            reference,
            h,
            temperature,
            s0: state0.s_field(),
            entropy0: state0
                .gamma
                .iter()
                .zip(&state0.alpha)
                .map(|(g, a)| entropy_density(*g, *a))
                .collect(),
            gamma_n: normal_gamma(temperature, reference.mu, grid),
            tanh_eps: tanh_field(temperature, reference.mu, grid),
            state0: state0.clone(),
            interaction0: None,
            limits: InvariantLimits::default(),
            records: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn record(&self, t: f64, state: &BdGState, delta: &DeltaField) -> ObservablesRecord {
        let grid = &self.reference.grid;
        let mu = self.reference.mu;
        let psi = psi_of(state, self.reference, self.h);
        let xi: Vec<Complex64> = state
            .alpha
            .iter()
            .zip(&self.reference.alpha_star)
            .map(|(a, s)| a - self.h * psi * *s)
            .collect();
        let eta: Vec<f64> = state.gamma.iter().zip(&self.gamma_n).map(|(g, n)| g - n).collect();
        let interaction = 0.5 * grid.inner_complex(&state.alpha, &delta.values).re;
        let local = compensated_sum((0..grid.len()).map(|i| {
            let k = grid.nodes()[i];
            let ds = entropy_density(state.gamma[i], state.alpha[i]) - self.entropy0[i];
            grid.weights()[i] * ((k * k - mu) * (state.gamma[i] - self.state0.gamma[i]) - self.temperature * ds)
        }));
        let s_drift = state
            .gamma
            .iter()
            .zip(&state.alpha)
            .zip(&self.s0)
            .map(|((g, a), s0)| (s_value(*g, *a) - s0).abs())
            .fold(0.0, f64::max);
        ObservablesRecord {
            t,
            psi_re: psi.re,
            psi_im: psi.im,
            abs_psi_sq: psi.norm_sqr(),
            pressure_drift: local + interaction - self.interaction0.unwrap_or(interaction),
            s_drift,
            xi_norm: grid.norm_complex(&xi),
            eta_norm: grid.norm(&eta),
            delta_norm: delta.norm(grid),
            eq10_residual: eq10_with(state, &self.state0, &self.gamma_n, &self.tanh_eps),
            admissibility_margin: state.admissibility_margin(),
        }
    }
}

impl Observer for Monitor<'_> {
    fn observe(&mut self, t: f64, state: &BdGState, delta: &DeltaField) -> Result<()> {
        if self.interaction0.is_none() {
            let grid = &self.reference.grid;
            self.interaction0 = Some(0.5 * grid.inner_complex(&state.alpha, &delta.values).re);
        }
        let r = self.record(t, state, delta);
        if !(r.s_drift <= self.limits.s_drift) {
            self.violations.push(format!("s drift {:e} at t = {t}", r.s_drift));
        }
        if !(r.eq10_residual <= self.limits.eq10) {
            self.violations.push(format!("identity residual {:e} at t = {t}", r.eq10_residual));
        }
        if !(r.admissibility_margin >= self.limits.margin) {
            self.violations.push(format!("admissibility margin {:e} at t = {t}", r.admissibility_margin));
        }
        self.records.push(r);
        Ok(())
    }
}
