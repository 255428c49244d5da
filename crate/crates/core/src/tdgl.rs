//! The time-dependent Ginzburg–Landau ODE `i d psi' = a psi + b |psi|^2 psi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BdgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdglParams {
    pub a: f64,
    pub b: f64,
    pub d: Complex64,
    /// Coefficient of `(T - T_c)` in the GL energy, for reporting.
    pub c_gl: f64,
}

impl TdglParams {
    pub fn new(a: f64, b: f64, d: Complex64, c_gl: f64) -> Result<Self> {
        if !(d.im > 0.0) {
            return Err(BdgError::Domain(format!("TDGL needs Im d > 0, got {}", d.im)));
        }
        if !(b >= 0.0) {
            return Err(BdgError::Domain(format!("TDGL needs b >= 0, got {b}")));
        }
        if !(c_gl > 0.0) {
            return Err(BdgError::Domain(format!("C_GL must be positive, got {c_gl}")));
        }
        Ok(TdglParams { a, b, d, c_gl })
    }

    /// `a = C_GL (T - T_c)`, `b = 2`, and purely imaginary `d` chosen so that the
    /// linearized magnitude decays (or grows) at `rate`.
    pub fn calibrated(c_gl: f64, temperature: f64, t_c: f64, rate: f64) -> Result<Self> {
        let a = c_gl * (temperature - t_c);
        if a == 0.0 || !(rate > 0.0) {
            return Err(BdgError::Domain("rate calibration needs T != T_c and a positive rate".into()));
        }
        Self::new(a, 2.0, Complex64::new(0.0, a.abs() / rate), c_gl)
    }

    /// Decay rate of `|psi|` in the linear regime, `a Im d / |d|^2`.
    pub fn linear_rate(&self) -> f64 {
        self.a * self.d.im / self.d.norm_sqr()
    }

    /// `a |psi|^2 + (b/2) |psi|^4`.
    pub fn gl_energy(&self, psi: Complex64) -> f64 {
        let n = psi.norm_sqr();
        self.a * n + 0.5 * self.b * n * n
    }

    fn rhs(&self, psi: Complex64) -> Complex64 {
        -Complex64::i() * (self.a * psi + self.b * psi.norm_sqr() * psi) / self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdglSample {
    pub t: f64,
    pub psi: Complex64,
    pub gl_energy: f64,
}

/// Exact solution for `b = 0`: `psi_0 exp(-i a t / d)`.
pub fn tdgl_linear_exact(psi0: Complex64, params: &TdglParams, t: f64) -> Complex64 {
    psi0 * (-Complex64::i() * params.a * t / params.d).exp()
}

/// Classical RK4 on the requested (nondecreasing) times, with internal substeps.
pub fn tdgl_evolve(psi0: Complex64, params: &TdglParams, t_grid: &[f64]) -> Result<Vec<TdglSample>> {
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(BdgError::Domain("TDGL time grid must be nondecreasing".into()));
    }
    let mut psi = psi0;
    let mut t = t_grid.first().copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while t < target {
            let scale = (params.a.abs() + params.b * psi.norm_sqr()) / params.d.norm();
            let max_h = if scale > 0.0 { 0.02 / scale } else { f64::INFINITY };
            let h = (target - t).min(max_h);
            let k1 = params.rhs(psi);
            let k2 = params.rhs(psi + 0.5 * h * k1);
            let k3 = params.rhs(psi + 0.5 * h * k2);
            let k4 = params.rhs(psi + h * k3);
            psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = if target - t <= h { target } else { t + h };
        }
        out.push(TdglSample {
            t,
            psi,
            gl_energy: params.gl_energy(psi),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_case_matches_closed_form() {
        let p = TdglParams::new(0.3, 0.0, Complex64::new(0.4, 1.2), 1.0).unwrap();
        let psi0 = Complex64::new(0.7, 0.2);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let s = tdgl_evolve(psi0, &p, &times).unwrap();
        for x in &s {
            let exact = tdgl_linear_exact(psi0, &p, x.t);
            assert!((x.psi - exact).norm() < 1e-9);
            let mag = psi0.norm() * (-0.3 * x.t * 1.2 / p.d.norm_sqr()).exp();
            assert!((x.psi.norm() - mag).abs() < 1e-9);
        }
    }

    #[test]
    fn minimum_of_gl_energy_is_stationary_in_magnitude() {
        let p = TdglParams::new(-0.5, 2.0, Complex64::new(0.1, 1.0), 1.0).unwrap();
        let psi0 = Complex64::from_polar((0.25f64).sqrt(), 0.4);
        let s = tdgl_evolve(psi0, &p, &[0.0, 10.0, 50.0]).unwrap();
        for x in &s {
            assert!((x.psi.norm() - psi0.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn calibrated_rate() {
        let p = TdglParams::calibrated(1.0, 0.2, 0.19, 0.03).unwrap();
        assert!((p.linear_rate() - 0.03).abs() < 1e-15);
        assert_eq!(p.b, 2.0);
        assert!(TdglParams::new(1.0, 1.0, Complex64::new(1.0, -0.1), 1.0).is_err());
    }
}
