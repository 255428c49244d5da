//! The resonance `lambda` of `S^{1/2} L S^{1/2}` for rank-one potentials, from the
//! leading-order perturbative formula and from complex dilation of Gaussian form factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{BdgError, Result};
use crate::grid::{Dimension, MomentumGrid};
use crate::model::{k_t, RadialFunction};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonanceMethod {
    LeadingOrder,
    ComplexDilationRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub lambda: Complex64,
    pub method: ResonanceMethod,
    pub theta_used: Option<Complex64>,
    /// Principal-value integral `P`.
    pub p_value: f64,
    /// Fermi-surface weight `Q`.
    pub q_weight: f64,
    pub prefactor: f64,
    /// Root-finder iterations, zero for the leading-order formula.
    pub iterations: usize,
}

const QUAD_ABS: f64 = 1e-14;
const QUAD_REL: f64 = 1e-12;
/// Half-width, relative to `sqrt(mu)`, of the window where the subtracted integrand is
/// replaced by its Taylor form.
const POLE_WINDOW: f64 = 1e-3;

/// Leading-order resonance `lambda = prefactor / (P - i Q)` with
/// `prefactor = (T_c - T) / T_c^2 * int |phi|^2 cosh^{-2}(eps / 2T) d^3k`,
/// `P = p.v. int |phi|^2 / (eps K_{T_c}) d^3k` and `Q = pi^2 sqrt(mu) |phi(sqrt mu)|^2 / T_c`.
///
/// Integrals run over `|k| <= k_max` of the grid by adaptive quadrature; the pole of
/// `P` at the Fermi momentum is removed by subtraction.
pub fn resonance_leading_order(
    phi: &RadialFunction,
    mu: f64,
    temperature: f64,
    t_c: f64,
    grid: &MomentumGrid,
) -> Result<ResonanceResult> {
    if grid.dimension() != Dimension::ThreeDRadial {
        return Err(BdgError::DimensionMismatch("resonance formula is three-dimensional".into()));
    }
    if !(mu > 0.0 && temperature > 0.0 && t_c > 0.0) {
        return Err(BdgError::Domain("resonance needs mu, T, T_c > 0".into()));
    }
    let kf = mu.sqrt();
    let k_max = grid.k_max();
    let phi_f = phi.eval(kf);
    if phi_f.abs() < 1e-12 {
        return Err(BdgError::Domain(
            "Q ~ 0: form factor vanishes on the Fermi sphere, resonance formula degenerate".into(),
        ));
    }
    let sech2 = |k: f64| {
        let c = ((k * k - mu) / (2.0 * temperature)).cosh();
        4.0 * PI * k * k * phi.eval(k).powi(2) / (c * c)
    };
    let i1 = integrate(sech2, 0.0, kf, QUAD_ABS, QUAD_REL)? + integrate(sech2, kf, k_max, QUAD_ABS, QUAD_REL)?;
    let prefactor = (t_c - temperature) / (t_c * t_c) * i1;
    let p_value = principal_value(phi, mu, t_c, k_max)?;
    let q_weight = PI * PI * kf * phi_f * phi_f / t_c;
    let lambda = Complex64::new(prefactor, 0.0) / Complex64::new(p_value, -q_weight);
    Ok(ResonanceResult {
        lambda,
        method: ResonanceMethod::LeadingOrder,
        theta_used: None,
        p_value,
        q_weight,
        prefactor,
        iterations: 0,
    })
}

/// `p.v. int_0^{k_max} g(k) / (k^2 - mu) dk` with `g(k) = 4 pi k^2 phi(k)^2 / K_{T_c}(k)`.
pub fn principal_value(phi: &RadialFunction, mu: f64, t_c: f64, k_max: f64) -> Result<f64> {
    let kf = mu.sqrt();
    if !(k_max > kf) {
        return Err(BdgError::Domain("k_max must exceed the Fermi momentum".into()));
    }
    let g = |k: f64| 4.0 * PI * k * k * phi.eval(k).powi(2) / k_t(k * k - mu, t_c);
    let g0 = g(kf);
    let hd = 1e-3 * kf;
    let (gp, gm) = (g(kf + hd), g(kf - hd));
    let g1 = (gp - gm) / (2.0 * hd);
    let g2 = (gp - 2.0 * g0 + gm) / (2.0 * hd * hd);
    let window = POLE_WINDOW * kf;
    let subtracted = |k: f64| {
        let x = k - kf;
        if x.abs() < window {
            (g1 + g2 * x) / (2.0 * kf + x)
        } else {
            (g(k) - g0) / (k * k - mu)
        }
    };
    let body = integrate(subtracted, 0.0, kf, QUAD_ABS, QUAD_REL)? + integrate(subtracted, kf, k_max, QUAD_ABS, QUAD_REL)?;
    let pv_kernel = ((k_max - kf) / (k_max + kf)).abs().ln() / (2.0 * kf);
    Ok(body + g0 * pv_kernel)
}

/// Resonance as the root of the complex-dilated rank-one condition
/// `F(lambda) = 1 - sum_i w_i phi_theta(k_i)^2 L_theta(k_i) / (2 e^{-2 theta} k_i^2 - 2 mu + lambda)`
/// for `phi(k) = amplitude * exp(-k^2 / 2 width^2)`, with
/// `phi_theta(k)^2 = e^{-3 theta} phi(e^{-theta} k)^2` and `L_theta = 2 tanh((e^{-2 theta} k^2 - mu) / 2T)`.
///
/// Secant iteration seeded by the leading-order value.
pub fn resonance_rootfind_gaussian(
    amplitude: f64,
    width: f64,
    mu: f64,
    temperature: f64,
    t_c: f64,
    theta: Complex64,
    grid: &MomentumGrid,
) -> Result<ResonanceResult> {
    if grid.dimension() != Dimension::ThreeDRadial {
        return Err(BdgError::DimensionMismatch("complex dilation is implemented in three dimensions".into()));
    }
    let b = -theta.im;
    if !(b > 0.0) {
        return Err(BdgError::Domain(format!("need Im theta < 0, got {}", theta.im)));
    }
    let thermal_limit = 0.5 * (PI * temperature / mu).atan();
    if b >= thermal_limit.min(PI / 4.0) {
        return Err(BdgError::Domain(format!(
            "|Im theta| = {b} must stay below {:.4} to avoid thermal poles",
            thermal_limit.min(PI / 4.0)
        )));
    }
    let seed = resonance_leading_order(&RadialFunction::gaussian(amplitude, width), mu, temperature, t_c, grid)?;
    let rot = (-2.0 * theta).exp();
    let pre = (-3.0 * theta).exp() * amplitude * amplitude;
    let terms: Vec<(Complex64, Complex64)> = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .map(|(k, w)| {
            let k2 = rot * k * k;
            let phi2 = pre * (-k2 / (width * width)).exp();
            let l = 2.0 * ((k2 - mu) / (2.0 * temperature)).tanh();
            (w * phi2 * l, 2.0 * k2 - 2.0 * mu)
        })
        .collect();
    let f = |lambda: Complex64| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (num, den) in &terms {
            s += num / (den + lambda);
        }
        Complex64::new(1.0, 0.0) - s
    };

    let mut l0 = seed.lambda;
    let mut l1 = seed.lambda * Complex64::new(1.001, 0.001);
    if l1 == l0 {
        l1 = l0 + Complex64::new(1e-8, -1e-8);
    }
    let mut f0 = f(l0);
    let mut f1 = f(l1);
    let mut iterations = 0;
    while f1.norm() > 1e-10 {
        iterations += 1;
        if iterations > 100 || !f1.norm().is_finite() {
            return Err(BdgError::NonConvergence {
                what: "resonance secant".into(),
                iterations,
                residual: f1.norm(),
            });
        }
        let denom = f1 - f0;
        if denom.norm() == 0.0 {
            return Err(BdgError::NonConvergence {
                what: "resonance secant (stalled)".into(),
                iterations,
                residual: f1.norm(),
            });
        }
        let l2 = l1 - f1 * (l1 - l0) / denom;
        l0 = l1;
        f0 = f1;
        l1 = l2;
        f1 = f(l1);
    }

    // The root must sit well clear of the discretized rotated continuum.
    for i in 0..terms.len() {
        let here = terms[i].1;
        let spacing = if i + 1 < terms.len() {
            (terms[i + 1].1 - here).norm()
        } else {
            (here - terms[i - 1].1).norm()
        };
        if (here + l1).norm() < 3.0 * spacing {
            return Err(BdgError::Resolution(format!(
                "resonance {l1} lies on the discretized continuum; increase |Im theta|"
            )));
        }
    }

    Ok(ResonanceResult {
        lambda: l1,
        method: ResonanceMethod::ComplexDilationRoot,
        theta_used: Some(theta),
        iterations,
        ..seed
    })
}

/// `1 / |Im lambda|`, the predicted linear decay time.
pub fn predicted_decay_timescale(result: &ResonanceResult) -> Result<f64> {
    if !(result.lambda.im < 0.0) {
        return Err(BdgError::Domain(format!(
            "no decay: Im lambda = {:e} is not negative",
            result.lambda.im
        )));
    }
    Ok(1.0 / result.lambda.im.abs())
}
