//! Critical temperature of a separable Gaussian pairing potential, checked against the
//! scalar rank-one condition and against a refined grid.
//!
//! `cargo run --release --example critical_temperature`

use std::sync::Arc;

use bdg::spectral::{critical_temperature, default_bracket, rank_one_condition};
use bdg::{Dimension, MomentumGrid, Potential};

fn main() -> bdg::Result<()> {
    let mu: f64 = 1.0;
    for n in [1024, 2048, 4096] {
        let grid = Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, n, 6.0, mu.sqrt())?);
        let potential = Arc::new(Potential::separable_gaussian(&grid, 0.34, 1.0)?);
        let r = critical_temperature(mu, potential.clone(), grid.clone(), default_bracket(mu))?;
        let phi = potential.rank_one_form().expect("separable");
        println!(
            "N = {n:5}  T_c = {:.12}  kappa = {:.6}  <phi, K^-1 phi> - 1 = {:+.2e}  eigen residual = {:.1e}",
            r.t_c,
            r.spectral_gap,
            rank_one_condition(r.t_c, mu, phi, &grid),
            r.eigen_residual
        );
    }
    Ok(())
}
