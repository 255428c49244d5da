//! Momentum quadrature grids carrying the integration measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{BdgError, Result};
use crate::quadrature::{compensated_sum, gauss_legendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dimension {
    /// Signed momenta on `[-k_max, k_max]`, measure `dk`.
    OneD,
    /// Momentum magnitudes on `(0, k_max]`, measure `4 pi k^2 dk`.
    ThreeDRadial,
}

impl Dimension {
    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::OneD => "one-d",
            Dimension::ThreeDRadial => "three-d-radial",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "one-d" => Some(Dimension::OneD),
            "three-d-radial" => Some(Dimension::ThreeDRadial),
            _ => None,
        }
    }
}

/// Layout of the composite Gauss–Legendre panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelLayout {
    /// Nodes per panel.
    pub order: usize,
    /// Strength of the sinh clustering of panel breakpoints around the Fermi momentum.
    pub clustering: f64,
}

impl Default for PanelLayout {
    fn default() -> Self {
        PanelLayout {
            order: 16,
            clustering: 6.0,
        }
    }
}

/// Quadrature nodes and weights over momentum space.
///
/// Weights include the full measure, so `sum_i w_i f(k_i)` approximates
/// the integral of a radial (3D) or one-dimensional function.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    dimension: Dimension,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    k_max: f64,
}

impl MomentumGrid {
    /// Default grid for the given dimension: `k_max = 6 sqrt(mu)`,
    /// 2048 radial nodes (3D) or 4096 signed nodes (1D).
    pub fn default_for(dimension: Dimension, mu: f64) -> Result<Self> {
        let n = match dimension {
            Dimension::ThreeDRadial => 2048,
            Dimension::OneD => 4096,
        };
        Self::clustered(dimension, n, 6.0 * mu.sqrt(), mu.sqrt())
    }

    /// Composite Gauss–Legendre grid with panels clustered around `k_fermi`.
    pub fn clustered(dimension: Dimension, n: usize, k_max: f64, k_fermi: f64) -> Result<Self> {
        Self::with_layout(dimension, n, k_max, k_fermi, PanelLayout::default())
    }

    pub fn with_layout(
        dimension: Dimension,
        n: usize,
        k_max: f64,
        k_fermi: f64,
        layout: PanelLayout,
    ) -> Result<Self> {
        if !(k_max > 0.0) || !(k_fermi > 0.0) || k_fermi >= k_max {
            return Err(BdgError::Domain(format!(
                "need 0 < k_fermi < k_max, got k_fermi = {k_fermi}, k_max = {k_max}"
            )));
        }
        let half = match dimension {
            Dimension::ThreeDRadial => n,
            Dimension::OneD => n / 2,
        };
        if layout.order == 0 || !half.is_multiple_of(layout.order) || half < 2 * layout.order || !n.is_multiple_of(2) && dimension == Dimension::OneD {
            return Err(BdgError::Domain(format!(
                "grid size {n} must give a multiple of {} nodes per half-line (at least two panels)",
                layout.order
            )));
        }
        let panels = half / layout.order;
        let breaks = clustered_breakpoints(panels, k_max, k_fermi, layout.clustering);
        let (x, w) = gauss_legendre(layout.order);
        let mut k = Vec::with_capacity(half);
        let mut dk = Vec::with_capacity(half);
        for p in breaks.windows(2) {
            let (lo, hi) = (p[0], p[1]);
            let c = 0.5 * (lo + hi);
            let r = 0.5 * (hi - lo);
            for (xi, wi) in x.iter().zip(&w) {
                k.push(c + r * xi);
                dk.push(r * wi);
            }
        }
        let (nodes, weights) = match dimension {
            Dimension::ThreeDRadial => {
                let weights = k.iter().zip(&dk).map(|(k, w)| 4.0 * PI * k * k * w).collect();
                (k, weights)
            }
            Dimension::OneD => {
                let mut nodes: Vec<f64> = k.iter().rev().map(|k| -k).collect();
                nodes.extend_from_slice(&k);
                let mut weights: Vec<f64> = dk.iter().rev().copied().collect();
                weights.extend_from_slice(&dk);
                (nodes, weights)
            }
        };
        Self::from_parts(dimension, nodes, weights, k_max)
    }

    /// Builds a grid from explicit nodes and weights, checking every invariant.
    pub fn from_parts(dimension: Dimension, nodes: Vec<f64>, weights: Vec<f64>, k_max: f64) -> Result<Self> {
        let grid = MomentumGrid {
            dimension,
            nodes,
            weights,
            k_max,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 || n != self.weights.len() {
            return Err(BdgError::Domain("grid needs equal, nonzero numbers of nodes and weights".into()));
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(BdgError::invariant("grid weights must be strictly positive", 0.0));
        }
        if self.nodes.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(BdgError::invariant("grid nodes must be strictly increasing", 0.0));
        }
        if self.nodes.iter().any(|k| k.abs() > self.k_max * (1.0 + 1e-14)) {
            return Err(BdgError::invariant("grid node beyond k_max", self.k_max));
        }
        match self.dimension {
            Dimension::ThreeDRadial => {
                if self.nodes[0] <= 0.0 {
                    return Err(BdgError::invariant("radial nodes must be positive", self.nodes[0]));
                }
            }
            Dimension::OneD => {
                let asym = (0..n)
                    .map(|i| (self.nodes[i] + self.nodes[n - 1 - i]).abs())
                    .fold(0.0, f64::max);
                if asym > 1e-12 * self.k_max {
                    return Err(BdgError::invariant("1D nodes must be symmetric about 0", asym));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// Exact measure of the ball (3D) or interval (1D) of radius `k_max`.
    pub fn measure(&self) -> f64 {
        match self.dimension {
            Dimension::ThreeDRadial => 4.0 * PI * self.k_max.powi(3) / 3.0,
            Dimension::OneD => 2.0 * self.k_max,
        }
    }

    /// Kinetic energy relative to the chemical potential, `k^2 - mu`, per node.
    pub fn epsilon(&self, mu: f64) -> Vec<f64> {
        self.nodes.iter().map(|k| k * k - mu).collect()
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        compensated_sum(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }

    /// Weighted inner product of two real fields.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        compensated_sum(self.weights.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| w * a * b))
    }

    /// Weighted inner product of a real field with a complex one.
    pub fn inner_real_complex(&self, a: &[f64], b: &[Complex64]) -> Complex64 {
        let re = compensated_sum(self.weights.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| w * a * b.re));
        let im = compensated_sum(self.weights.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| w * a * b.im));
        Complex64::new(re, im)
    }

    /// `<a, b>` with the first argument conjugated.
    pub fn inner_complex(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let terms = || self.weights.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| *w * a.conj() * b);
        Complex64::new(compensated_sum(terms().map(|z| z.re)), compensated_sum(terms().map(|z| z.im)))
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    pub fn norm_complex(&self, a: &[Complex64]) -> f64 {
        compensated_sum(self.weights.iter().zip(a).map(|(w, z)| w * z.norm_sqr()))
            .max(0.0)
            .sqrt()
    }
}

/// Panel breakpoints `k(u_j)` for `u_j = j / panels` under the map
/// `k(u) = k_f + a sinh(b (u - u0))` with `k(0) = 0`, `k(1) = k_max`.
fn clustered_breakpoints(panels: usize, k_max: f64, k_fermi: f64, b: f64) -> Vec<f64> {
    if b <= 0.0 {
        return (0..=panels).map(|j| k_max * j as f64 / panels as f64).collect();
    }
    let target = (k_max - k_fermi) / k_fermi;
    let ratio = |u0: f64| (b * (1.0 - u0)).sinh() / (b * u0).sinh();
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u0 = 0.5 * (lo + hi);
    let a = k_fermi / (b * u0).sinh();
    let mut breaks: Vec<f64> = (0..=panels)
        .map(|j| k_fermi + a * (b * (j as f64 / panels as f64 - u0)).sinh())
        .collect();
    breaks[0] = 0.0;
    breaks[panels] = k_max;
    breaks
}
