//! Nonlinear BdG evolution of a weakly paired state just above `T_c`: `|psi_t|` stays
//! on a plateau instead of decaying, while every structural invariant is preserved.
//!
//! `cargo run --release --example plateau [h]`

use num_complex::Complex64;
use std::sync::Arc;

use bdg::dynamics::{evolve_nonlinear, EvolveConfig};
use bdg::equilibrium::{build_initial_state, InitialStateKind};
use bdg::observables::Monitor;
use bdg::spectral::{critical_temperature, default_bracket};
use bdg::{Dimension, MomentumGrid, Potential};

fn main() -> bdg::Result<()> {
    let h: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let mu = 1.0;
    let grid = Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, 1024, 6.0, 1.0)?);
    let potential = Arc::new(Potential::separable_gaussian(&grid, 0.34, 1.0)?);
    let reference = critical_temperature(mu, potential.clone(), grid.clone(), default_bracket(mu))?;
    let t = reference.t_c + h * h;
    let state0 = build_initial_state(InitialStateKind::PerturbedNormal, Complex64::new(1.0, 0.0), h, &reference, t)?;

    let t_end = 10.0 / (t - reference.t_c);
    let mut config = EvolveConfig::auto(&state0, &potential, mu, &grid, t_end, 0.5)?;
    config.observe_every = (config.steps() / 20).max(1);
    let mut monitor = Monitor::new(&reference, &state0, h, t);
    evolve_nonlinear(&state0, &potential, mu, &grid, &config, &mut [&mut monitor])?;

    println!("h = {h}, T - T_c = {:.4}, {} steps of dt = {:.4e}", t - reference.t_c, config.steps(), config.dt);
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "t", "|psi|^2", "s drift", "pressure", "margin");
    for r in &monitor.records {
        println!(
            "{:10.2} {:12.6} {:12.2e} {:12.2e} {:12.2e}",
            r.t, r.abs_psi_sq, r.s_drift, r.pressure_drift, r.admissibility_margin
        );
    }
    println!("invariants {}", if monitor.passed() { "held" } else { "violated" });
    for v in &monitor.violations {
        println!("  {v}");
    }
    Ok(())
}
