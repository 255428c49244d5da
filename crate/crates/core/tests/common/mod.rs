//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use bdg::experiment::{parse_config, RunConfig};

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 24)
}

/// Root of a continuous `f` with a sign change on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut f_lo = f(lo);
    assert!(f_lo * f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `eps / tanh(eps / 2T)`, with the series near `eps = 0`.
pub fn k_t(eps: f64, t: f64) -> f64 {
    let x = eps / (2.0 * t);
    if x.abs() < 1e-6 {
        2.0 * t * (1.0 + x * x / 3.0)
    } else {
        eps / x.tanh()
    }
}

/// Integral over `[a, b]` split at `kf`, where `K_T` bends sharply at low temperature.
fn split_integral<F: Fn(f64) -> f64>(f: &F, a: f64, kf: f64, b: f64) -> f64 {
    let pts = [a, 0.5 * kf, 0.9 * kf, kf, 1.1 * kf, 1.5 * kf, 3.0 * kf, b];
    pts.windows(2)
        .filter(|w| w[1] > w[0] && w[0] >= a && w[1] <= b)
        .map(|w| simpson(f, w[0], w[1], 1e-13))
        .sum()
}

/// Critical temperature of the Gaussian rank-one model from
/// `int_{|k| < k_max} phi^2 / K_T d^3k = 1`.
pub fn tc_gaussian(amplitude: f64, width: f64, mu: f64, k_max: f64) -> f64 {
    let kf = mu.sqrt();
    let cond = |t: f64| {
        let f = |k: f64| 4.0 * PI * k * k * (amplitude * (-k * k / (2.0 * width * width)).exp()).powi(2) / k_t(k * k - mu, t);
        split_integral(&f, 0.0, kf, k_max) - 1.0
    };
    bisect(cond, 1e-3, mu, 1e-12)
}

/// Critical temperature of the 1D contact model from `(g / 2 pi) int_{-k_max}^{k_max} 1 / K_T dk = 1`.
pub fn tc_contact_1d(g: f64, mu: f64, k_max: f64) -> f64 {
    let kf = mu.sqrt();
    let cond = |t: f64| {
        let f = |k: f64| 1.0 / k_t(k * k - mu, t);
        g / (2.0 * PI) * 2.0 * split_integral(&f, 0.0, kf, k_max) - 1.0
    };
    bisect(cond, 1e-3, mu, 1e-12)
}

/// `2 (2 pi)^{-3/2} int v_hat(|k - q|) alpha(|q|) d^3q` for
/// `v_hat(p) = a exp(-p^2 / 2 w^2)` and `alpha(q) = exp(-q^2 / 2 s^2)`, in closed form.
pub fn gaussian_gap(k: f64, a: f64, w: f64, s: f64) -> f64 {
    let (w2, s2) = (w * w, s * s);
    2.0 * a * (w2 * s2 / (w2 + s2)).powf(1.5) * (-k * k / (2.0 * (w2 + s2))).exp()
}

/// Desk configuration: separable Gaussian, `mu = 1`, amplitude 0.34, width 1.
pub fn desk_toml(h: f64, n: usize, extra: &str) -> String {
    format!(
        r#"
dimension = "three-d-radial"
mu = 1.0
h = {h}
psi0 = [1.0, 0.0]

[potential]
kind = "separable-gaussian"
amplitude = 0.34
width = 1.0

[grid]
n = {n}
k_max = 6.0
{extra}
"#
    )
}

pub fn desk_config(h: f64, n: usize, extra: &str) -> RunConfig {
    parse_config(&desk_toml(h, n, extra)).expect("desk configuration parses")
}

pub const DESK_AMPLITUDE: f64 = 0.34;
pub const DESK_WIDTH: f64 = 1.0;
