//! Resonance `lambda` from the leading-order formula and from complex dilation, along a
//! ladder of temperatures above `T_c`.
//!
//! `cargo run --release --example resonance`

use num_complex::Complex64;
use std::sync::Arc;

use bdg::resonance::{resonance_leading_order, resonance_rootfind_gaussian};
use bdg::spectral::{critical_temperature, default_bracket};
use bdg::{Dimension, MomentumGrid, Potential, RadialFunction};

fn main() -> bdg::Result<()> {
    let mu = 1.0;
    let (amplitude, width) = (0.34, 1.0);
    let grid = Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, 2048, 6.0, 1.0)?);
    let potential = Arc::new(Potential::separable_gaussian(&grid, amplitude, width)?);
    let t_c = critical_temperature(mu, potential, grid.clone(), default_bracket(mu))?.t_c;
    let phi = RadialFunction::gaussian(amplitude, width);

    for offset in [0.04, 0.02, 0.01, 0.005] {
        let t = t_c + offset;
        let lo = resonance_leading_order(&phi, mu, t, t_c, &grid)?;
        print!("T - T_c = {offset:6.3}  leading order {:.6e}", lo.lambda);
        for b in [0.15, 0.25] {
            match resonance_rootfind_gaussian(amplitude, width, mu, t, t_c, Complex64::new(0.0, -b), &grid) {
                Ok(r) => print!("  root(Im theta = -{b}) {:.6e}", r.lambda),
                Err(e) => print!("  root(Im theta = -{b}) failed: {e}"),
            }
        }
        println!();
    }
    Ok(())
}
