//! Linearized pair dynamics `alpha_t = S^{-1/2} exp(-it S^{1/2} L S^{1/2}) S^{1/2} alpha_0`
//! around the normal state above `T_c`.

use faer::{Mat, Side};
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{BdgError, Result};
use crate::grid::MomentumGrid;
use crate::model::Potential;
use crate::quadrature::compensated_sum;
use crate::spectral::assemble_kt_plus_v;

/// Linear model at a fixed temperature, stored through its eigendecomposition.
///
/// All matrices act in the basis `x = sqrt(w) alpha`.
pub struct LinearModel {
    pub temperature: f64,
    pub mu: f64,
    pub grid: Arc<MomentumGrid>,
    /// `K_T + V`.
    pub s_matrix: Mat<f64>,
    /// `2 tanh(eps / 2T)`.
    pub l_diag: Vec<f64>,
    /// Eigenvalues of `A = S^{1/2} L S^{1/2}`.
    pub omega: Vec<f64>,
    /// Eigenvectors of `A` (columns).
    pub modes: Mat<f64>,
    /// `S^{-1/2} P`.
    back: Mat<f64>,
    /// `P^T S^{1/2}`.
    forward: Mat<f64>,
    /// Smallest eigenvalue of `S`.
    pub s_min: f64,
}

fn eigen(m: &Mat<f64>, what: &str) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| BdgError::NonConvergence {
        what: format!("{what} eigendecomposition ({e:?})"),
        iterations: 0,
        residual: f64::NAN,
    })?;
    let s = evd.S().column_vector();
    let values = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

fn scale_columns(u: &Mat<f64>, f: &[f64]) -> Mat<f64> {
    Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * f[j])
}

impl LinearModel {
    /// Assembles `S`, checks it is positive definite (`T > T_c`) and diagonalizes `A`.
    pub fn new(temperature: f64, mu: f64, potential: &Potential, grid: Arc<MomentumGrid>) -> Result<Self> {
        let s_matrix = assemble_kt_plus_v(temperature, mu, potential, &grid)?;
        let (lam, q) = eigen(&s_matrix, "S")?;
        let s_min = lam[0];
        if !(s_min > 0.0) {
            return Err(BdgError::Domain(format!(
                "linear model requires T > T_c (lowest eigenvalue of K_T + V is {s_min:e})"
            )));
        }
        let root: Vec<f64> = lam.iter().map(|l| l.sqrt()).collect();
        let inv_root: Vec<f64> = root.iter().map(|r| 1.0 / r).collect();
        let qt = q.transpose().to_owned();
        let s_half = &scale_columns(&q, &root) * &qt;
        let s_inv_half = &scale_columns(&q, &inv_root) * &qt;
        let l_diag: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|k| 2.0 * ((k * k - mu) / (2.0 * temperature)).tanh())
            .collect();
        let n = grid.len();
        let ls = Mat::from_fn(n, n, |i, j| l_diag[i] * s_half[(i, j)]);
        let a = &s_half * &ls;
        let a_sym = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
        let (omega, modes) = eigen(&a_sym, "S^1/2 L S^1/2")?;
        let back = &s_inv_half * &modes;
        let forward = modes.transpose().to_owned() * &s_half;
        Ok(LinearModel {
            temperature,
            mu,
            grid,
            s_matrix,
            l_diag,
            omega,
            modes,
            back,
            forward,
            s_min,
        })
    }

    fn to_basis(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        alpha.iter().zip(self.grid.weights()).map(|(a, w)| a * w.sqrt()).collect()
    }

    fn to_field(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().zip(self.grid.weights()).map(|(x, w)| x / w.sqrt()).collect()
    }

    fn apply(m: &Mat<f64>, x: &[Complex64]) -> Vec<Complex64> {
        (0..m.nrows())
            .map(|i| {
                let re = compensated_sum((0..m.ncols()).map(|j| m[(i, j)] * x[j].re));
                let im = compensated_sum((0..m.ncols()).map(|j| m[(i, j)] * x[j].im));
                Complex64::new(re, im)
            })
            .collect()
    }

    fn mode_coefficients(&self, alpha0: &[Complex64]) -> Vec<Complex64> {
        Self::apply(&self.forward, &self.to_basis(alpha0))
    }

    /// `U(t) x = exp(-it A) x` in the symmetric basis.
    pub fn apply_u(&self, x: &[Complex64], t: f64) -> Vec<Complex64> {
        let pt = self.modes.transpose().to_owned();
        let c: Vec<Complex64> = Self::apply(&pt, x)
            .iter()
            .zip(&self.omega)
            .map(|(c, w)| c * Complex64::from_polar(1.0, -w * t))
            .collect();
        Self::apply(&self.modes, &c)
    }

    /// Overlaps `<probe, alpha_t>` at every requested time, each in `O(N)`.
    pub fn overlap_series(&self, probe: &[f64], alpha0: &[Complex64], times: &[f64]) -> Vec<Complex64> {
        let q: Vec<f64> = probe.iter().zip(self.grid.weights()).map(|(p, w)| p * w.sqrt()).collect();
        let n = self.omega.len();
        let row: Vec<f64> = (0..n)
            .map(|j| compensated_sum((0..n).map(|i| q[i] * self.back[(i, j)])))
            .collect();
        let c = self.mode_coefficients(alpha0);
        let weights: Vec<Complex64> = row.iter().zip(&c).map(|(r, c)| r * c).collect();
        times
            .iter()
            .map(|t| {
                let terms = || {
                    weights
                        .iter()
                        .zip(&self.omega)
                        .map(|(w, o)| w * Complex64::from_polar(1.0, -o * t))
                };
                Complex64::new(compensated_sum(terms().map(|z| z.re)), compensated_sum(terms().map(|z| z.im)))
            })
            .collect()
    }
}

impl LinearModel {
    /// `alpha_t` at every requested time, sharing the mode projection of `alpha0`.
    pub fn evolve_series(&self, alpha0: &[Complex64], times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        if alpha0.len() != self.grid.len() {
            return Err(BdgError::DimensionMismatch(format!(
                "field has {} values, model has {} nodes",
                alpha0.len(),
                self.grid.len()
            )));
        }
        let c0 = self.mode_coefficients(alpha0);
        Ok(times
            .iter()
            .map(|t| {
                let c: Vec<Complex64> = c0
                    .iter()
                    .zip(&self.omega)
                    .map(|(c, w)| c * Complex64::from_polar(1.0, -w * t))
                    .collect();
                self.to_field(&Self::apply(&self.back, &c))
            })
            .collect())
    }
}

/// `alpha_t` of the linearized dynamics, exact in `t`.
pub fn linear_evolve(alpha0: &[Complex64], model: &LinearModel, t: f64) -> Result<Vec<Complex64>> {
    if alpha0.len() != model.grid.len() {
        return Err(BdgError::DimensionMismatch(format!(
            "field has {} values, model has {} nodes",
            alpha0.len(),
            model.grid.len()
        )));
    }
    let c: Vec<Complex64> = model
        .mode_coefficients(alpha0)
        .iter()
        .zip(&model.omega)
        .map(|(c, w)| c * Complex64::from_polar(1.0, -w * t))
        .collect();
    Ok(model.to_field(&LinearModel::apply(&model.back, &c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dimension;

    fn grid() -> Arc<MomentumGrid> {
        Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, 128, 6.0, 1.0).unwrap())
    }

    fn field(g: &MomentumGrid) -> Vec<Complex64> {
        g.nodes()
            .iter()
            .map(|k| Complex64::new((-k * k).exp(), 0.2 * k * (-k * k).exp()))
            .collect()
    }

    #[test]
    fn free_dynamics_is_a_phase() {
        let g = grid();
        let zero = Potential::separable_gaussian(&g, 0.0, 1.0).unwrap();
        let m = LinearModel::new(0.2, 1.0, &zero, g.clone()).unwrap();
        let a0 = field(&g);
        let t = 3.7;
        let at = linear_evolve(&a0, &m, t).unwrap();
        for ((a, b), k) in at.iter().zip(&a0).zip(g.nodes()) {
            let expected = b * Complex64::from_polar(1.0, -2.0 * (k * k - 1.0) * t);
            assert!((a - expected).norm() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn time_zero_is_identity_and_u_is_unitary() {
        let g = grid();
        let p = Potential::separable_gaussian(&g, 0.34, 1.0).unwrap();
        let m = LinearModel::new(0.25, 1.0, &p, g.clone()).unwrap();
        let a0 = field(&g);
        let same = linear_evolve(&a0, &m, 0.0).unwrap();
        for (a, b) in same.iter().zip(&a0) {
            assert!((a - b).norm() < 1e-11);
        }
        let x: Vec<Complex64> = a0.iter().zip(g.weights()).map(|(a, w)| a * w.sqrt()).collect();
        let y = m.apply_u(&x, 12.5);
        let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((nx - ny).abs() < 1e-12 * nx);
    }

    #[test]
    fn overlap_series_matches_full_propagation() {
        let g = grid();
        let p = Potential::separable_gaussian(&g, 0.34, 1.0).unwrap();
        let m = LinearModel::new(0.25, 1.0, &p, g.clone()).unwrap();
        let a0 = field(&g);
        let probe: Vec<f64> = g.nodes().iter().map(|k| (-k * k / 2.0).exp()).collect();
        let times = [0.0, 1.0, 4.5];
        let fast = m.overlap_series(&probe, &a0, &times);
        for (t, f) in times.iter().zip(&fast) {
            let at = linear_evolve(&a0, &m, *t).unwrap();
            let slow = g.inner_real_complex(&probe, &at);
            assert!((slow - f).norm() < 1e-12);
        }
    }

    #[test]
    fn below_tc_is_rejected() {
        let g = grid();
        let p = Potential::separable_gaussian(&g, 0.34, 1.0).unwrap();
        assert!(matches!(LinearModel::new(0.05, 1.0, &p, g), Err(BdgError::Domain(_))));
    }
}
