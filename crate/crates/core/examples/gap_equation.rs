//! Self-consistent BCS equilibria below `T_c`: the gap grows like `(T_c - T)^{1/2}`.
//!
//! `cargo run --release --example gap_equation`

use std::sync::Arc;

use bdg::equilibrium::{gap_equation_solve, seed_delta};
use bdg::observables::psi_of;
use bdg::spectral::{critical_temperature, default_bracket};
use bdg::{pressure_difference, Dimension, MomentumGrid, Potential};

fn main() -> bdg::Result<()> {
    let mu = 1.0;
    let h = 0.1;
    let grid = Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, 1024, 6.0, 1.0)?);
    let potential = Arc::new(Potential::separable_gaussian(&grid, 0.34, 1.0)?);
    let reference = critical_temperature(mu, potential.clone(), grid.clone(), default_bracket(mu))?;
    println!("T_c = {:.10}", reference.t_c);

    let mut norms = Vec::new();
    for tau in [1.0, 0.25] {
        let t = reference.t_c - tau * h * h;
        let sol = gap_equation_solve(t, mu, &potential, &grid, &seed_delta(&reference, 0.1)?)?;
        let norm = sol.delta.norm(&grid);
        let psi = psi_of(&sol.state, &reference, h);
        let f = pressure_difference(&sol.state, t, mu, &potential, &grid)?;
        println!(
            "tau = {tau:4}  T = {t:.6}  ||Delta|| = {norm:.6e}  psi = {:.6}  F - F_n = {f:.4e}  ({} iterations)",
            psi.norm(),
            sol.iterations
        );
        norms.push(norm);
    }
    println!("||Delta(tau=1)|| / ||Delta(tau=1/4)|| = {:.4}  (square-root law: 2)", norms[0] / norms[1]);
    Ok(())
}
