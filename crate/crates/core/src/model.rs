//! Model definitions: the symbol `K_T`, radial form factors and potentials,
//! and the pairing field `Delta` generated by a pair density.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{BdgError, Result};
use crate::grid::{Dimension, MomentumGrid};
use crate::quadrature::{compensated_sum, gauss_legendre};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub temperature: f64,
    pub h: f64,
}

impl ModelParams {
    pub fn new(mu: f64, temperature: f64, h: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(BdgError::Domain(format!("chemical potential must be positive, got {mu}")));
        }
        if !(temperature >= 0.0) {
            return Err(BdgError::Domain(format!("temperature must be non-negative, got {temperature}")));
        }
        if !(h > 0.0) {
            return Err(BdgError::Domain(format!("h must be positive, got {h}")));
        }
        Ok(ModelParams { mu, temperature, h })
    }

    /// Checks `|T - T_c| <= h^2`, the window the plateau bound is stated in.
    pub fn check_near_critical(&self, t_c: f64) -> Result<()> {
        let off = (self.temperature - t_c).abs();
        if off > self.h * self.h * (1.0 + 1e-12) {
            return Err(BdgError::Domain(format!(
                "|T - T_c| = {off:e} exceeds h^2 = {:e}",
                self.h * self.h
            )));
        }
        Ok(())
    }
}

/// `K_T(eps) = eps / tanh(eps / 2T)`; equals `2T` at `eps = 0` and is always `>= 2T`.
pub fn k_t_eval(eps: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(BdgError::Domain(format!(
            "K_T needs T > 0 (got {temperature}); use k_zero_temperature for T = 0"
        )));
    }
    Ok(k_t(eps, temperature))
}

/// Unchecked `K_T`; callers guarantee `temperature > 0`.
#[inline]
pub(crate) fn k_t(eps: f64, temperature: f64) -> f64 {
    let x = eps / (2.0 * temperature);
    if x.abs() < 1e-4 {
        let x2 = x * x;
        2.0 * temperature * (1.0 + x2 / 3.0 - x2 * x2 / 45.0)
    } else {
        eps / x.tanh()
    }
}

/// Zero-temperature branch `K_0(eps) = |eps|`.
pub fn k_zero_temperature(eps: f64) -> f64 {
    eps.abs()
}

/// A real radial function of `|k|`, either closed-form Gaussian or tabulated.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialFunction {
    /// `amplitude * exp(-k^2 / (2 width^2))`.
    Gaussian { amplitude: f64, width: f64 },
    Table(Table),
}

impl RadialFunction {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        RadialFunction::Gaussian { amplitude, width }
    }

    pub fn eval(&self, k: f64) -> f64 {
        match self {
            RadialFunction::Gaussian { amplitude, width } => amplitude * (-k * k / (2.0 * width * width)).exp(),
            RadialFunction::Table(t) => t.eval(k.abs()),
        }
    }

    pub fn sample(&self, grid: &MomentumGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&k| self.eval(k)).collect()
    }
}

/// Natural cubic spline through tabulated `(k, value)` pairs; zero beyond the last node,
/// constant below the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    k: Vec<f64>,
    v: Vec<f64>,
    second: Vec<f64>,
}

impl Table {
    pub fn new(k: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if k.len() != v.len() || k.len() < 2 {
            return Err(BdgError::Parse("table needs at least two (k, value) rows".into()));
        }
        if k.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(BdgError::Parse("table k column must be strictly increasing".into()));
        }
        let n = k.len();
        let mut second = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (k[i] - k[i - 1]) / (k[i + 1] - k[i - 1]);
            let p = sig * second[i - 1] + 2.0;
            second[i] = (sig - 1.0) / p;
            let d = (v[i + 1] - v[i]) / (k[i + 1] - k[i]) - (v[i] - v[i - 1]) / (k[i] - k[i - 1]);
            u[i] = (6.0 * d / (k[i + 1] - k[i - 1]) - sig * u[i - 1]) / p;
        }
        second[n - 1] = 0.0;
        for i in (0..n - 1).rev() {
            second[i] = second[i] * second[i + 1] + u[i];
        }
        Ok(Table { k, v, second })
    }

    /// Reads whitespace-separated `k value` rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut k = Vec::new();
        let mut v = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(BdgError::Parse(format!("line {}: expected two columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| BdgError::Parse(format!("line {}: {e}", lineno + 1)))
            };
            k.push(parse(cols[0])?);
            v.push(parse(cols[1])?);
        }
        Table::new(k, v)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Table::parse(&std::fs::read_to_string(path)?)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.k.len();
        if x <= self.k[0] {
            return self.v[0];
        }
        if x > self.k[n - 1] {
            return 0.0;
        }
        let hi = self.k.partition_point(|&k| k < x).clamp(1, n - 1);
        let lo = hi - 1;
        let h = self.k[hi] - self.k[lo];
        let a = (self.k[hi] - x) / h;
        let b = (x - self.k[lo]) / h;
        a * self.v[lo]
            + b * self.v[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }
}

/// Two-body interaction, sampled on a specific grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V(x) = -g delta(x)` in one dimension. Acts as a rank-one potential with
    /// constant form factor `sqrt(g / 2 pi)`.
    Contact1D { coupling: f64, form: Vec<f64> },
    /// `V = -|phi><phi|` with radial real form factor sampled on the grid.
    SeparableRankOne {
        phi_hat: Vec<f64>,
        profile: RadialFunction,
    },
    /// Local radial potential with Fourier transform `v_hat`; `kernel[i * n + j]`
    /// holds the angular-averaged `W(k_i, k_j)` so that `Delta_i = sum_j W_ij w_j alpha_j`.
    LocalRadial {
        v_hat: RadialFunction,
        kernel: Vec<f64>,
        n: usize,
    },
}

impl Potential {
    pub fn contact_1d(grid: &MomentumGrid, coupling: f64) -> Result<Self> {
        if grid.dimension() != Dimension::OneD {
            return Err(BdgError::DimensionMismatch("contact potential needs a 1D grid".into()));
        }
        if !(coupling > 0.0) {
            return Err(BdgError::Domain(format!("contact coupling must be positive, got {coupling}")));
        }
        let value = (coupling / (2.0 * PI)).sqrt();
        Ok(Potential::Contact1D {
            coupling,
            form: vec![value; grid.len()],
        })
    }

    pub fn separable(grid: &MomentumGrid, profile: RadialFunction) -> Result<Self> {
        let phi_hat = profile.sample(grid);
        if phi_hat.iter().any(|v| !v.is_finite()) {
            return Err(BdgError::Domain("form factor is not finite on the grid".into()));
        }
        Ok(Potential::SeparableRankOne { phi_hat, profile })
    }

    /// Gaussian form factor `amplitude * exp(-k^2 / 2 width^2)`.
    pub fn separable_gaussian(grid: &MomentumGrid, amplitude: f64, width: f64) -> Result<Self> {
        Self::separable(grid, RadialFunction::gaussian(amplitude, width))
    }

    /// Local radial potential; the angular average over the relative angle uses
    /// `angular_nodes` Gauss–Legendre points.
    pub fn local_radial(grid: &MomentumGrid, v_hat: RadialFunction, angular_nodes: usize) -> Result<Self> {
        if grid.dimension() != Dimension::ThreeDRadial {
            return Err(BdgError::DimensionMismatch("local radial potential needs a 3D radial grid".into()));
        }
        let (x, w) = gauss_legendre(angular_nodes.max(2));
        let k = grid.nodes();
        let n = k.len();
        let pref = 2.0 * (2.0 * PI).powf(-1.5);
        let mut kernel = vec![0.0; n * n];
        kernel.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for j in i..n {
                let s = k[i] * k[i] + k[j] * k[j];
                let p = 2.0 * k[i] * k[j];
                let avg: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| w * v_hat.eval((s - p * x).max(0.0).sqrt()))
                    .sum();
                row[j] = pref * 0.5 * avg;
            }
        });
        for i in 0..n {
            for j in 0..i {
                kernel[i * n + j] = kernel[j * n + i];
            }
        }
        Ok(Potential::LocalRadial { v_hat, kernel, n })
    }

    pub fn len(&self) -> usize {
        match self {
            Potential::Contact1D { form, .. } => form.len(),
            Potential::SeparableRankOne { phi_hat, .. } => phi_hat.len(),
            Potential::LocalRadial { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Form factor `phi` of a rank-one potential `-|phi><phi|` (contact included).
    pub fn rank_one_form(&self) -> Option<&[f64]> {
        match self {
            Potential::Contact1D { form, .. } => Some(form),
            Potential::SeparableRankOne { phi_hat, .. } => Some(phi_hat),
            Potential::LocalRadial { .. } => None,
        }
    }

    pub fn check_grid(&self, grid: &MomentumGrid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(BdgError::DimensionMismatch(format!(
                "potential sampled on {} nodes, grid has {}",
                self.len(),
                grid.len()
            )));
        }
        match (self, grid.dimension()) {
            (Potential::Contact1D { .. }, Dimension::ThreeDRadial) => Err(BdgError::DimensionMismatch(
                "contact potential on a 3D grid".into(),
            )),
            (Potential::LocalRadial { .. }, Dimension::OneD) => Err(BdgError::DimensionMismatch(
                "local radial potential on a 1D grid".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Writes `Delta = delta_from_alpha(alpha)` into `out` without allocating.
    pub(crate) fn apply_delta(&self, grid: &MomentumGrid, alpha: &[Complex64], out: &mut [Complex64]) {
        match self {
            Potential::Contact1D { form, .. } | Potential::SeparableRankOne { phi_hat: form, .. } => {
                let c = grid.inner_real_complex(form, alpha);
                for (o, f) in out.iter_mut().zip(form) {
                    *o = -2.0 * f * c;
                }
            }
            Potential::LocalRadial { kernel, n, .. } => {
                let wa: Vec<Complex64> = grid.weights().iter().zip(alpha).map(|(w, a)| *w * a).collect();
                out.par_iter_mut().enumerate().for_each(|(i, o)| {
                    let row = &kernel[i * n..(i + 1) * n];
                    let re = compensated_sum(row.iter().zip(&wa).map(|(k, a)| k * a.re));
                    let im = compensated_sum(row.iter().zip(&wa).map(|(k, a)| k * a.im));
                    *o = Complex64::new(re, im);
                });
            }
        }
    }

    /// The potential block of `K_T + V` in the weight-symmetrized basis, entry `(i, j)`.
    pub(crate) fn symmetric_entry(&self, sqrt_w: &[f64], i: usize, j: usize) -> f64 {
        match self {
            Potential::Contact1D { form, .. } | Potential::SeparableRankOne { phi_hat: form, .. } => {
                -sqrt_w[i] * form[i] * form[j] * sqrt_w[j]
            }
            Potential::LocalRadial { kernel, n, .. } => {
                0.5 * sqrt_w[i] * kernel[i * n + j] * sqrt_w[j]
            }
        }
    }
}

/// The pairing field `Delta(k)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaField {
    pub values: Vec<Complex64>,
}

impl DeltaField {
    pub fn zeros(n: usize) -> Self {
        DeltaField {
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn norm(&self, grid: &MomentumGrid) -> f64 {
        grid.norm_complex(&self.values)
    }
}

/// `Delta(k) = 2 (2 pi)^{-3/2} int V_hat(k - k') alpha(k') d^3k'`, i.e. twice the
/// potential applied to the pair wavefunction in momentum space.
pub fn delta_from_alpha(alpha: &[Complex64], potential: &Potential, grid: &MomentumGrid) -> Result<DeltaField> {
    potential.check_grid(grid)?;
    if alpha.len() != grid.len() {
        return Err(BdgError::DimensionMismatch(format!(
            "field has {} values, grid has {} nodes",
            alpha.len(),
            grid.len()
        )));
    }
    let mut out = DeltaField::zeros(grid.len());
    potential.apply_delta(grid, alpha, &mut out.values);
    Ok(out)
}
