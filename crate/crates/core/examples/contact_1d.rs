//! One-dimensional contact interaction `-g delta(x)`: critical temperature as a function
//! of the coupling, converged in the grid size.
//!
//! `cargo run --release --example contact_1d`

use std::sync::Arc;

use bdg::spectral::{critical_temperature, default_bracket};
use bdg::{Dimension, MomentumGrid, Potential};

fn main() -> bdg::Result<()> {
    let mu = 1.0;
    for g in [0.5, 1.0, 1.5] {
        let mut line = format!("g = {g:3}");
        for n in [2048, 4096] {
            let grid = Arc::new(MomentumGrid::clustered(Dimension::OneD, n, 6.0, 1.0)?);
            let potential = Arc::new(Potential::contact_1d(&grid, g)?);
            match critical_temperature(mu, potential, grid, default_bracket(mu)) {
                Ok(r) => line.push_str(&format!("  N = {n}: T_c = {:.10}", r.t_c)),
                Err(e) => line.push_str(&format!("  N = {n}: {e}")),
            }
        }
        println!("{line}");
    }
    Ok(())
}
