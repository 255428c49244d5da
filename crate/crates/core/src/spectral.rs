//! The operator `K_T + V`, its lowest eigenpair, and the critical temperature.

use faer::{Mat, Side};
use std::sync::Arc;

use crate::error::{BdgError, Result};
use crate::grid::MomentumGrid;
use crate::model::{k_t, Potential};
use crate::quadrature::compensated_sum;

/// Relative eigen-residual accepted from either eigensolver path.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;
/// Smallest accepted gap between the two lowest eigenvalues at `T_c`.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Dense matrix of `K_T + V` in the basis `x = sqrt(w) alpha`, exactly symmetric.
pub fn assemble_kt_plus_v(temperature: f64, mu: f64, potential: &Potential, grid: &MomentumGrid) -> Result<Mat<f64>> {
    check_temperature(temperature)?;
    potential.check_grid(grid)?;
    let sw = grid.sqrt_weights();
    let diag = kt_diagonal(temperature, mu, grid);
    let n = grid.len();
    let mut m = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = potential.symmetric_entry(&sw, i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m[(j, j)] += diag[j];
    }
    Ok(m)
}

pub(crate) fn kt_diagonal(temperature: f64, mu: f64, grid: &MomentumGrid) -> Vec<f64> {
    grid.nodes().iter().map(|k| k_t(k * k - mu, temperature)).collect()
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0) {
        return Err(BdgError::Domain(format!("K_T + V needs T > 0, got {temperature}")));
    }
    Ok(())
}

/// Lowest eigenvalue of `K_T + V` with its eigenvector and the next eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Eigenvector as a field `alpha(k)`, unit norm in the weighted grid inner product.
    pub vector: Vec<f64>,
    /// Second-lowest eigenvalue.
    pub second: f64,
    /// `||M v - value v|| / ||v||` in the symmetric basis.
    pub residual: f64,
}

/// Lowest eigenpair of `K_T + V`. Rank-one potentials go through the secular
/// equation `1 = sum_i u_i^2 / (K_i - lambda)`; local potentials through a dense solve.
pub fn lowest_eigenpair(temperature: f64, mu: f64, potential: &Potential, grid: &MomentumGrid) -> Result<Eigenpair> {
    check_temperature(temperature)?;
    potential.check_grid(grid)?;
    match potential.rank_one_form() {
        Some(phi) => secular_lowest(temperature, mu, phi, grid),
        None => dense_lowest_eigenpair(temperature, mu, potential, grid),
    }
}

/// Lowest eigenpair from a full dense symmetric eigendecomposition.
pub fn dense_lowest_eigenpair(
    temperature: f64,
    mu: f64,
    potential: &Potential,
    grid: &MomentumGrid,
) -> Result<Eigenpair> {
    let m = assemble_kt_plus_v(temperature, mu, potential, grid)?;
    let n = grid.len();
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| BdgError::NonConvergence {
        what: format!("dense symmetric eigensolver ({e:?})"),
        iterations: 0,
        residual: f64::NAN,
    })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let x: Vec<f64> = (0..n).map(|i| u[(i, 0)]).collect();
    let value = s[0];
    let second = if n > 1 { s[1] } else { f64::INFINITY };
    let mut mx = vec![0.0; n];
    for j in 0..n {
        for (i, out) in mx.iter_mut().enumerate() {
            *out += m[(i, j)] * x[j];
        }
    }
    let residual = residual_norm(&mx, &x, value);
    finish(x, value, second, residual, potential.rank_one_form(), grid)
}

fn residual_norm(mx: &[f64], x: &[f64], value: f64) -> f64 {
    let r = compensated_sum(mx.iter().zip(x).map(|(m, x)| (m - value * x).powi(2))).sqrt();
    let nx = compensated_sum(x.iter().map(|x| x * x)).sqrt();
    r / nx
}

fn finish(
    x: Vec<f64>,
    value: f64,
    second: f64,
    residual: f64,
    probe_form: Option<&[f64]>,
    grid: &MomentumGrid,
) -> Result<Eigenpair> {
    if !(residual <= EIGEN_RESIDUAL_TOL) {
        return Err(BdgError::NonConvergence {
            what: "lowest eigenpair residual".into(),
            iterations: 1,
            residual,
        });
    }
    let nx = compensated_sum(x.iter().map(|x| x * x)).sqrt();
    let mut vector: Vec<f64> = x.iter().zip(grid.weights()).map(|(x, w)| x / (nx * w.sqrt())).collect();
    let probe = match probe_form {
        Some(phi) => grid.inner(phi, &vector),
        None => grid.integrate(&vector),
    };
    let probe = if probe.abs() > 1e-14 {
        probe
    } else {
        vector.iter().copied().fold(0.0, |acc: f64, v| if v.abs() > acc.abs() { v } else { acc })
    };
    if probe < 0.0 {
        vector.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(Eigenpair {
        value,
        vector,
        second,
        residual,
    })
}

fn secular_lowest(temperature: f64, mu: f64, phi: &[f64], grid: &MomentumGrid) -> Result<Eigenpair> {
    let d = kt_diagonal(temperature, mu, grid);
    let u: Vec<f64> = grid.sqrt_weights().iter().zip(phi).map(|(s, p)| s * p).collect();
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| d[*a].total_cmp(&d[*b]));
    let d1 = d[order[0]];
    let multiplicity = order.iter().take_while(|&&i| d[i] == d1).count();
    let d2 = order.iter().map(|&i| d[i]).find(|&v| v > d1);
    let u_norm_sq = compensated_sum(u.iter().map(|u| u * u));

    if u_norm_sq == 0.0 {
        let mut x = vec![0.0; n];
        x[order[0]] = 1.0;
        let second = if multiplicity > 1 { d1 } else { d2.unwrap_or(f64::INFINITY) };
        return finish(x, d1, second, 0.0, None, grid);
    }

    let secular = |lambda: f64| 1.0 - compensated_sum(u.iter().zip(&d).map(|(u, d)| u * u / (d - lambda)));
    // g decreases from 1 at -infinity to -infinity at d1.
    let value = bisect_decreasing(&secular, d1 - u_norm_sq - 1.0, d1);
    let second = if multiplicity > 1 {
        d1
    } else {
        match d2 {
            Some(d2) => bisect_decreasing(&secular, d1, d2),
            None => f64::INFINITY,
        }
    };
    let x: Vec<f64> = u.iter().zip(&d).map(|(u, d)| u / (d - value)).collect();
    let ux = compensated_sum(u.iter().zip(&x).map(|(u, x)| u * x));
    let mx: Vec<f64> = d.iter().zip(&x).zip(&u).map(|((d, x), u)| d * x - u * ux).collect();
    let residual = residual_norm(&mx, &x, value);
    finish(x, value, second, residual, Some(phi), grid)
}

/// Root of a decreasing function on the open interval `(lo, hi)`, to full precision.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `<phi, K_T^{-1} phi> - 1` on the grid; zero exactly at the rank-one critical temperature.
pub fn rank_one_condition(temperature: f64, mu: f64, phi: &[f64], grid: &MomentumGrid) -> f64 {
    let d = kt_diagonal(temperature, mu, grid);
    compensated_sum(grid.weights().iter().zip(phi).zip(&d).map(|((w, p), d)| w * p * p / d)) - 1.0
}

/// Frozen equilibrium context of a run: `T_c`, the gap eigenfunction and the spectral gap.
#[derive(Debug, Clone)]
pub struct ReferenceData {
    pub t_c: f64,
    /// Real, unit-norm zero mode of `K_{T_c} + V`.
    pub alpha_star: Vec<f64>,
    /// Second eigenvalue of `K_{T_c} + V`.
    pub spectral_gap: f64,
    pub mu: f64,
    pub grid: Arc<MomentumGrid>,
    pub potential: Arc<Potential>,
    /// Lowest eigenvalue at the returned `T_c`.
    pub lowest_value: f64,
    pub eigen_residual: f64,
    /// `<phi, K_{T_c}^{-1} phi> - 1`, rank-one potentials only.
    pub scalar_residual: Option<f64>,
    /// `||eigenvector - normalized K_{T_c}^{-1} phi||`, rank-one potentials only.
    pub rank_one_consistency: Option<f64>,
}

impl ReferenceData {
    pub fn fermi_momentum(&self) -> f64 {
        self.mu.sqrt()
    }
}

/// Default temperature bracket for the critical-temperature search.
pub fn default_bracket(mu: f64) -> (f64, f64) {
    (1e-4, mu)
}

/// Solves "lowest eigenvalue of `K_T + V` is zero" for `T` inside `bracket`.
pub fn critical_temperature(
    mu: f64,
    potential: Arc<Potential>,
    grid: Arc<MomentumGrid>,
    bracket: (f64, f64),
) -> Result<ReferenceData> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(BdgError::Domain(format!("invalid temperature bracket ({lo}, {hi})")));
    }
    let eval = |t: f64| lowest_eigenpair(t, mu, &potential, &grid).map(|e| e.value);
    let mut f_lo = eval(lo)?;
    let mut f_hi = eval(hi)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(BdgError::TcOutsideBracket {
            lo,
            hi,
            value_lo: f_lo,
            value_hi: f_hi,
        });
    }
    while hi / lo - 1.0 > 1e-3 {
        let mid = (lo * hi).sqrt();
        let f = eval(mid)?;
        if f < 0.0 {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }

    let (mut t0, mut f0, mut t1, mut f1) = (lo, f_lo, hi, f_hi);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < 100 {
        iterations += 1;
        let mut t2 = t1 - f1 * (t1 - t0) / (f1 - f0);
        if !(t2 > lo && t2 < hi) {
            t2 = 0.5 * (lo + hi);
        }
        let f2 = eval(t2)?;
        if f2 < 0.0 {
            lo = t2;
        } else {
            hi = t2;
        }
        let step = (t2 - t1).abs();
        t0 = t1;
        f0 = f1;
        t1 = t2;
        f1 = f2;
        if f2 == 0.0 || (step <= 1e-10 * t2 && f2.abs() <= 1e-9) {
            converged = true;
            break;
        }
        if f0 == f1 {
            converged = f1.abs() <= 1e-9;
            break;
        }
    }
    if !converged {
        return Err(BdgError::NonConvergence {
            what: "critical temperature secant".into(),
            iterations,
            residual: f1,
        });
    }
    let t_c = t1;
    let pair = lowest_eigenpair(t_c, mu, &potential, &grid)?;
    if pair.value.abs() > 1e-9 {
        return Err(BdgError::NonConvergence {
            what: "critical temperature".into(),
            iterations,
            residual: pair.value,
        });
    }
    let gap = pair.second - pair.value;
    if !(gap > DEGENERACY_TOL) {
        return Err(BdgError::Degenerate(gap));
    }

    let (alpha_star, scalar_residual, rank_one_consistency) = match potential.rank_one_form() {
        Some(phi) => {
            let d = kt_diagonal(t_c, mu, &grid);
            let mut a: Vec<f64> = phi.iter().zip(&d).map(|(p, d)| p / d).collect();
            let norm = grid.norm(&a);
            a.iter_mut().for_each(|v| *v /= norm);
            let diff: Vec<f64> = a.iter().zip(&pair.vector).map(|(a, b)| a - b).collect();
            let consistency = grid.norm(&diff);
            (a, Some(rank_one_condition(t_c, mu, phi, &grid)), Some(consistency))
        }
        None => (pair.vector.clone(), None, None),
    };
    check_fermi_surface_support(&alpha_star, mu, &grid)?;

    Ok(ReferenceData {
        t_c,
        alpha_star,
        spectral_gap: pair.second,
        mu,
        grid,
        potential,
        lowest_value: pair.value,
        eigen_residual: pair.residual,
        scalar_residual,
        rank_one_consistency,
    })
}

fn check_fermi_surface_support(alpha_star: &[f64], mu: f64, grid: &MomentumGrid) -> Result<()> {
    let kf = mu.sqrt();
    let peak = alpha_star.iter().copied().fold(0.0f64, |m, a| m.max(a.abs()));
    let near = grid
        .nodes()
        .iter()
        .zip(alpha_star)
        .filter(|(k, _)| (k.abs() - kf).abs() <= 0.01 * kf)
        .map(|(_, a)| a.abs())
        .fold(0.0f64, f64::max);
    if !(near > 1e-8 * peak) {
        return Err(BdgError::invariant("gap eigenfunction vanishes on the Fermi sphere", near));
    }
    Ok(())
}
