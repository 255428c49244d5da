mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use bdg::equilibrium::{build_initial_state, gap_equation_solve, seed_delta, InitialStateKind};
use bdg::resonance::{resonance_leading_order, resonance_rootfind_gaussian};
use bdg::spectral::{critical_temperature, default_bracket, ReferenceData};
use bdg::state::pressure_difference;
use bdg::{delta_from_alpha, Dimension, MomentumGrid, Potential, RadialFunction};
use num_complex::Complex64;

use common::*;

fn desk_reference(n: usize) -> ReferenceData {
    let grid = Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, n, 6.0, 1.0).unwrap());
    let pot = Arc::new(Potential::separable_gaussian(&grid, DESK_AMPLITUDE, DESK_WIDTH).unwrap());
    critical_temperature(1.0, pot, grid, default_bracket(1.0)).unwrap()
}

#[test]
fn separable_tc_matches_quadrature_oracle() {
    let oracle = tc_gaussian(DESK_AMPLITUDE, DESK_WIDTH, 1.0, 6.0);
    let r = desk_reference(512);
    let rel = (r.t_c - oracle).abs() / oracle;
    assert!(rel < 1e-6, "T_c {} vs oracle {oracle} (rel {rel:e})", r.t_c);
    assert!(r.lowest_value.abs() < 1e-9);
}

#[test]
fn contact_tc_matches_quadrature_oracle() {
    let oracle = tc_contact_1d(1.0, 1.0, 6.0);
    let grid = Arc::new(MomentumGrid::clustered(Dimension::OneD, 2048, 6.0, 1.0).unwrap());
    let pot = Arc::new(Potential::contact_1d(&grid, 1.0).unwrap());
    let r = critical_temperature(1.0, pot, grid, default_bracket(1.0)).unwrap();
    let rel = (r.t_c - oracle).abs() / oracle;
    assert!(rel < 1e-6, "T_c {} vs oracle {oracle} (rel {rel:e})", r.t_c);
}

#[test]
fn contact_tc_is_stable_under_grid_doubling() {
    let tc = |n| {
        let grid = Arc::new(MomentumGrid::clustered(Dimension::OneD, n, 6.0, 1.0).unwrap());
        let pot = Arc::new(Potential::contact_1d(&grid, 1.0).unwrap());
        critical_temperature(1.0, pot, grid, default_bracket(1.0)).unwrap().t_c
    };
    let (a, b) = (tc(1024), tc(2048));
    assert!((a - b).abs() / b < 1e-6, "{a} vs {b}");
}

#[test]
fn local_radial_gap_matches_gaussian_convolution() {
    let (amp, w, s) = (-1.5, 1.0, 0.7);
    let grid = MomentumGrid::clustered(Dimension::ThreeDRadial, 256, 6.0, 1.0).unwrap();
    let pot = Potential::local_radial(&grid, RadialFunction::gaussian(amp, w), 64).unwrap();
    let alpha: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|k| Complex64::new((-k * k / (2.0 * s * s)).exp(), 0.0))
        .collect();
    let delta = delta_from_alpha(&alpha, &pot, &grid).unwrap();
    let peak = gaussian_gap(0.0, amp, w, s).abs();
    for (k, d) in grid.nodes().iter().zip(&delta.values) {
        if *k > 4.0 {
            continue;
        }
        let expected = gaussian_gap(*k, amp, w, s);
        assert!(
            (d.re - expected).abs() <= 1e-5 * peak,
            "k = {k}: {} vs {expected}",
            d.re
        );
        assert_eq!(d.im, 0.0);
    }
}

#[test]
fn separable_gap_is_rank_one_projection() {
    let grid = MomentumGrid::clustered(Dimension::ThreeDRadial, 256, 6.0, 1.0).unwrap();
    let pot = Potential::separable_gaussian(&grid, DESK_AMPLITUDE, DESK_WIDTH).unwrap();
    let s2 = 0.3f64;
    let alpha: Vec<Complex64> = grid.nodes().iter().map(|k| Complex64::new(0.0, (-k * k / (2.0 * s2)).exp())).collect();
    let delta = delta_from_alpha(&alpha, &pot, &grid).unwrap();
    // <phi, alpha> = 4 pi A int k^2 exp(-k^2/2 - k^2/2 s2) dk
    let c = 1.0 / (1.0 + 1.0 / s2);
    let overlap = DESK_AMPLITUDE * (2.0 * PI * c).powf(1.5);
    for (k, d) in grid.nodes().iter().zip(&delta.values) {
        let phi = DESK_AMPLITUDE * (-k * k / 2.0).exp();
        let expected = -2.0 * overlap * phi;
        assert!((d.im - expected).abs() < 1e-12, "k = {k}: {} vs {expected}", d.im);
    }
}

#[test]
fn leading_order_resonance_matches_independent_quadrature() {
    let (mu, kf) = (1.0f64, 1.0f64);
    let t_c = tc_gaussian(DESK_AMPLITUDE, DESK_WIDTH, mu, 6.0);
    let t = t_c + 0.01;
    let phi = |k: f64| DESK_AMPLITUDE * (-k * k / 2.0).exp();
    let k_max = 6.0;
    // Principal value: symmetric excision of (kf - eta, kf + eta), where the odd part of
    // g(k) / (k - kf) integrates to 2 eta g'(kf).
    let g = |k: f64| 4.0 * PI * k * k * phi(k).powi(2) / (k_t(k * k - mu, t_c) * (k + kf));
    let eta = 1e-3;
    let outer = |k: f64| g(k) / (k - kf);
    let dg = (g(kf + 1e-5) - g(kf - 1e-5)) / 2e-5;
    let pv = simpson(&outer, 0.0, kf - eta, 1e-12) + simpson(&outer, kf + eta, k_max, 1e-12) + 2.0 * eta * dg;
    let sech = |k: f64| 4.0 * PI * k * k * phi(k).powi(2) / ((k * k - mu) / (2.0 * t)).cosh().powi(2);
    let i1 = simpson(&sech, 0.0, kf, 1e-13) + simpson(&sech, kf, k_max, 1e-13);
    let pre = (t_c - t) / (t_c * t_c) * i1;
    let q = PI * PI * kf * phi(kf).powi(2) / t_c;
    let expected = Complex64::new(pre, 0.0) / Complex64::new(pv, -q);

    let grid = MomentumGrid::clustered(Dimension::ThreeDRadial, 256, k_max, kf).unwrap();
    let r = resonance_leading_order(&RadialFunction::gaussian(DESK_AMPLITUDE, DESK_WIDTH), mu, t, t_c, &grid).unwrap();
    assert!((r.p_value - pv).abs() < 1e-7 * pv.abs(), "P {} vs {pv}", r.p_value);
    assert!((r.lambda - expected).norm() < 1e-7 * expected.norm(), "{} vs {expected}", r.lambda);
    assert!(r.lambda.im < 0.0);
}

#[test]
fn leading_order_decay_time_doubles_when_offset_halves() {
    let t_c = tc_gaussian(DESK_AMPLITUDE, DESK_WIDTH, 1.0, 6.0);
    let grid = MomentumGrid::clustered(Dimension::ThreeDRadial, 256, 6.0, 1.0).unwrap();
    let profile = RadialFunction::gaussian(DESK_AMPLITUDE, DESK_WIDTH);
    let lam = |d: f64| resonance_leading_order(&profile, 1.0, t_c + d, t_c, &grid).unwrap().lambda;
    for d in [0.02, 0.01, 0.005] {
        let ratio = lam(d).im / lam(d / 2.0).im;
        assert!((ratio - 2.0).abs() < 0.2, "offset {d}: ratio {ratio}");
    }
}

#[test]
fn leading_order_is_odd_in_offset_as_offset_vanishes() {
    let t_c = tc_gaussian(DESK_AMPLITUDE, DESK_WIDTH, 1.0, 6.0);
    let grid = MomentumGrid::clustered(Dimension::ThreeDRadial, 256, 6.0, 1.0).unwrap();
    let profile = RadialFunction::gaussian(DESK_AMPLITUDE, DESK_WIDTH);
    let lam = |d: f64| resonance_leading_order(&profile, 1.0, t_c + d, t_c, &grid).unwrap().lambda;
    let mut last = f64::INFINITY;
    for d in [0.02, 0.01, 0.005, 0.0025] {
        // lambda(-d) = -lambda(d) up to the temperature dependence of the cosh weight.
        let defect = ((lam(-d) + lam(d)).norm() / lam(d).norm()).abs();
        assert!(defect < last, "defect {defect} did not shrink at offset {d}");
        last = defect;
    }
    assert!(last < 0.05, "residual asymmetry {last}");
}

#[test]
fn dilation_root_is_theta_independent_and_approaches_leading_order() {
    let t_c = tc_gaussian(DESK_AMPLITUDE, DESK_WIDTH, 1.0, 6.0);
    let grid = MomentumGrid::clustered(Dimension::ThreeDRadial, 1024, 6.0, 1.0).unwrap();
    let profile = RadialFunction::gaussian(DESK_AMPLITUDE, DESK_WIDTH);
    let mut last = f64::INFINITY;
    for d in [0.04, 0.02, 0.01] {
        let t = t_c + d;
        let root = |im| {
            resonance_rootfind_gaussian(DESK_AMPLITUDE, DESK_WIDTH, 1.0, t, t_c, Complex64::new(0.0, im), &grid)
                .unwrap()
                .lambda
        };
        let (a, b) = (root(-0.1), root(-0.15));
        assert!((a - b).norm() < 1e-6 * a.norm(), "offset {d}: {a} vs {b}");
        let lo = resonance_leading_order(&profile, 1.0, t, t_c, &grid).unwrap().lambda;
        let gap = (a.im / lo.im - 1.0).abs();
        assert!(gap < last, "offset {d}: |ratio - 1| = {gap} did not shrink");
        last = gap;
    }
}

#[test]
fn gap_norm_scales_as_square_root_of_offset() {
    let r = desk_reference(512);
    let h = 0.1;
    let norm = |tau: f64| {
        let t = r.t_c - tau * h * h;
        let sol = gap_equation_solve(t, 1.0, &r.potential, &r.grid, &seed_delta(&r, 0.1).unwrap()).unwrap();
        sol.delta.norm(&r.grid)
    };
    let ratio = norm(1.0) / norm(0.25);
    assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn perturbed_normal_pressure_scales_as_h4() {
    let r = desk_reference(512);
    let p = |h: f64| {
        let t = r.t_c + h * h;
        let s = build_initial_state(InitialStateKind::PerturbedNormal, Complex64::new(1.0, 0.0), h, &r, t).unwrap();
        pressure_difference(&s, t, 1.0, &r.potential, &r.grid).unwrap()
    };
    let ratio = p(0.1) / p(0.05);
    assert!((ratio - 16.0).abs() < 16.0 * 0.25, "ratio {ratio}");
}
