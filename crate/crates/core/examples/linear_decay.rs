//! The linearized dynamics above `T_c` loses the pair amplitude at the rate `|Im lambda|`
//! of the resonance, in contrast to the nonlinear plateau.
//!
//! `cargo run --release --example linear_decay`

use num_complex::Complex64;
use std::sync::Arc;

use bdg::experiment::{fit_scaling, FitModel};
use bdg::linear::LinearModel;
use bdg::resonance::resonance_leading_order;
use bdg::spectral::{critical_temperature, default_bracket};
use bdg::{Dimension, MomentumGrid, Potential, RadialFunction};

fn main() -> bdg::Result<()> {
    let mu = 1.0;
    let h = 0.1;
    let phi = RadialFunction::gaussian(0.34, 1.0);
    let grid = Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, 1024, 6.0, 1.0)?);
    let potential = Arc::new(Potential::separable(&grid, phi.clone())?);
    let reference = critical_temperature(mu, potential.clone(), grid.clone(), default_bracket(mu))?;
    let t = reference.t_c + h * h;

    let model = LinearModel::new(t, mu, &potential, grid.clone())?;
    let res = resonance_leading_order(&phi, mu, t, reference.t_c, &grid)?;
    let rate = res.lambda.im.abs();
    let alpha0: Vec<Complex64> = reference.alpha_star.iter().map(|a| Complex64::new(h * a, 0.0)).collect();
    let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05 / rate).collect();
    let overlaps = model.overlap_series(&reference.alpha_star, &alpha0, &times);

    let points: Vec<(f64, f64)> = times.iter().zip(&overlaps).map(|(t, o)| (*t, o.norm() / h)).collect();
    for (t, o) in points.iter().step_by(10) {
        println!("t = {t:8.2}  |<alpha_*, alpha_t>| / h = {o:.6e}");
    }
    let fit = fit_scaling(&points, FitModel::Exponential)?;
    println!("lambda = {:.6e}", res.lambda);
    println!(
        "fitted rate {:.5e} vs |Im lambda| {:.5e} (ratio {:.3}, max log residual {:.2e})",
        -fit.slope,
        rate,
        -fit.slope / rate,
        fit.max_log_residual
    );
    Ok(())
}
