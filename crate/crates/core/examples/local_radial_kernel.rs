//! A local Gaussian potential: the pairing kernel is the angular average of `V_hat`, the
//! lowest eigenpair comes from a dense symmetric eigensolve.
//!
//! `cargo run --release --example local_radial_kernel`

use std::sync::Arc;

use bdg::spectral::{critical_temperature, default_bracket};
use bdg::{Dimension, MomentumGrid, Potential, RadialFunction};

fn main() -> bdg::Result<()> {
    let mu = 1.0;
    for n in [256, 512] {
        let grid = Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, n, 6.0, 1.0)?);
        let potential = Arc::new(Potential::local_radial(&grid, RadialFunction::gaussian(-1.5, 1.0), 64)?);
        let r = critical_temperature(mu, potential, grid, default_bracket(mu))?;
        println!(
            "N = {n:4}  T_c = {:.10}  kappa = {:.6}  eigen residual = {:.1e}",
            r.t_c, r.spectral_gap, r.eigen_residual
        );
    }
    Ok(())
}
