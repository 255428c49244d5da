//! Acceptance criteria on the desk configuration (3D radial, separable Gaussian,
//! `mu = 1`, N = 2048). Prints one PASS/FAIL line per criterion and exits nonzero if
//! any criterion fails.

mod common;

use std::f64::consts::E;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use bdg::equilibrium::{build_initial_state, gap_equation_solve, seed_delta, InitialStateKind};
use bdg::experiment::output::read_csv;
use bdg::experiment::{fit_scaling, parse_config, run_experiment, Command, FitModel, RunConfig, RunPaths, RunSummary};
use bdg::observables::fermi_shell_mass;
use bdg::resonance::{resonance_leading_order, resonance_rootfind_gaussian};
use bdg::spectral::{critical_temperature, default_bracket, dense_lowest_eigenpair, rank_one_condition, ReferenceData};
use bdg::state::pressure_difference;
use bdg::{Dimension, MomentumGrid, Potential, RadialFunction};
use num_complex::Complex64;

use common::{bisect, desk_config, desk_toml, tc_gaussian, DESK_AMPLITUDE, DESK_WIDTH};

const N: usize = 2048;
const STEP_FACTOR: &str = "step_factor = 0.5";
const PLATEAU_HS: [f64; 3] = [0.2, 0.1, 0.05];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn desk_grid(n: usize) -> Arc<MomentumGrid> {
    Arc::new(MomentumGrid::clustered(Dimension::ThreeDRadial, n, 6.0, 1.0).unwrap())
}

fn desk_reference(n: usize) -> ReferenceData {
    let grid = desk_grid(n);
    let pot = Arc::new(Potential::separable_gaussian(&grid, DESK_AMPLITUDE, DESK_WIDTH).unwrap());
    critical_temperature(1.0, pot, grid, default_bracket(1.0)).unwrap()
}

fn run(config: &RunConfig, command: Command, dir: &Path) -> RunSummary {
    run_experiment(config, command, &RunPaths::new(".", dir)).unwrap_or_else(|e| panic!("{} failed: {e}", command.as_str()))
}

/// Plateau runs of criterion 5: `evolve` at h = 0.2 and 0.05, `compare-gl` at h = 0.1.
struct PlateauRuns {
    summaries: Vec<RunSummary>,
}

impl PlateauRuns {
    fn new(dir: &Path) -> Self {
        let evolve = format!("\n[evolve]\n{STEP_FACTOR}\nhorizon = 10.0\nobserve_every = 50\n");
        let summaries = PLATEAU_HS
            .iter()
            .map(|&h| {
                let config = desk_config(h, N, &evolve);
                let command = if h == 0.1 { Command::CompareGl } else { Command::Evolve };
                let sub = dir.join(format!("plateau_{h}"));
                let s = run(&config, command, &sub);
                eprintln!("  plateau h = {h}: deviation {:.6e} in {:.1} s", s.max_abs_psi_sq_deviation.unwrap(), s.wall_time_s);
                s
            })
            .collect();
        PlateauRuns { summaries }
    }

    fn at(&self, h: f64) -> &RunSummary {
        &self.summaries[PLATEAU_HS.iter().position(|x| *x == h).unwrap()]
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let r = desk_reference(N);
    let elapsed = start.elapsed().as_secs_f64();
    let phi = r.potential.rank_one_form().unwrap().to_vec();
    let scalar = bisect(|t| rank_one_condition(t, 1.0, &phi, &r.grid), 0.05, 0.5, 1e-14);
    let consistency = (r.t_c - scalar).abs() / scalar;
    let lo = dense_lowest_eigenpair(r.t_c * (1.0 - 1e-6), 1.0, &r.potential, &r.grid).unwrap().value;
    let hi = dense_lowest_eigenpair(r.t_c * (1.0 + 1e-6), 1.0, &r.potential, &r.grid).unwrap().value;
    let bracketed = lo < 0.0 && hi > 0.0;
    let oracle = tc_gaussian(DESK_AMPLITUDE, DESK_WIDTH, 1.0, 6.0);
    let vs_oracle = (r.t_c - oracle).abs() / oracle;
    let doubled = desk_reference(2 * N).t_c;
    let doubling = (r.t_c - doubled).abs() / doubled;
    let passed = consistency <= 1e-6 && bracketed && vs_oracle <= 1e-6 && doubling <= 1e-6 && elapsed < 10.0;
    outcome(
        passed,
        format!(
            "T_c = {:.12}; eigen vs scalar {consistency:.2e}; dense eigenvalue changes sign within 1e-6: {bracketed}; vs quadrature {vs_oracle:.2e}; N -> 2N {doubling:.2e}; {elapsed:.2} s",
            r.t_c
        ),
    )
}

fn criterion_2(plateau: &PlateauRuns, dir: &Path) -> Outcome {
    let mut s_max: f64 = 0.0;
    let mut eq10_max: f64 = 0.0;
    let mut margin: f64 = f64::INFINITY;
    for s in &plateau.summaries {
        s_max = s_max.max(s.s_drift.unwrap());
        eq10_max = eq10_max.max(s.eq10_residual.unwrap());
        margin = margin.min(s.min_admissibility_margin.unwrap());
    }
    let config = desk_config(0.2, N, &format!("\n[evolve]\n{STEP_FACTOR}\nt_end = 100.0\nobserve_every = 50\n"));
    let check = run(&config, Command::CheckInvariants, &dir.join("check_invariants"));
    let drift = check.extra("pressure_drift_dt").unwrap();
    let ratio = check.extra("pressure_drift_ratio");
    s_max = s_max.max(check.s_drift.unwrap());
    eq10_max = eq10_max.max(check.eq10_residual.unwrap());
    let reference = plateau.at(0.1);
    let per_step = reference.wall_time_s / reference.extra("steps").unwrap();
    let projected = per_step * 1e5;
    let passed = s_max <= 1e-10
        && eq10_max <= 1e-9
        && margin >= -1e-12
        && ratio.is_some_and(|r| r >= 3.6)
        && projected <= 600.0
        && check.invariants_passed;
    outcome(
        passed,
        format!(
            "max s drift {s_max:.2e}; max eq10 {eq10_max:.2e}; min margin {margin:.2e}; pressure drift {drift:.2e} shrinks {:.3}x at dt/2; 1e5 steps at N = {N} take {projected:.0} s",
            ratio.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_3(dir: &Path) -> Outcome {
    let text = desk_toml(
        0.1,
        N,
        &format!("\n[temperature]\ntau = -1.0\n\n[evolve]\n{STEP_FACTOR}\nhorizon = 10.0\nobserve_every = 100\n"),
    )
    .replace("psi0 = [1.0, 0.0]", "psi0 = [1.0, 0.0]\ninitial_state = \"scaled-equilibrium\"");
    let config = parse_config(&text).unwrap();
    let s = run(&config, Command::Evolve, &dir.join("stationarity"));
    let (_, rows) = read_csv(&dir.join("stationarity/series.csv")).unwrap();
    let psi0 = Complex64::new(rows[0][1], rows[0][2]);
    let dev = rows
        .iter()
        .map(|r| (Complex64::new(r[1], r[2]) - psi0).norm())
        .fold(0.0, f64::max);
    let t_end = rows.last().unwrap()[0];
    let horizon = 10.0 / (s.t_c.unwrap() - s.temperature.unwrap());
    outcome(
        dev <= 1e-6 && t_end >= horizon * (1.0 - 1e-12) && s.invariants_passed,
        format!("max |psi_t - psi_0| = {dev:.2e} up to t = {t_end:.1}"),
    )
}

fn criterion_4() -> Outcome {
    let r = desk_reference(N);
    let h = 0.1;
    let norm = |tau: f64| {
        let t = r.t_c - tau * h * h;
        gap_equation_solve(t, 1.0, &r.potential, &r.grid, &seed_delta(&r, 0.1).unwrap())
            .unwrap()
            .delta
            .norm(&r.grid)
    };
    let ratio = norm(1.0) / norm(0.25);
    outcome((ratio - 2.0).abs() <= 0.2, format!("||Delta(tau = 1)|| / ||Delta(tau = 1/4)|| = {ratio:.5}"))
}

fn criterion_5(plateau: &PlateauRuns) -> Outcome {
    let points: Vec<(f64, f64)> = PLATEAU_HS
        .iter()
        .map(|h| (*h, plateau.at(*h).max_abs_psi_sq_deviation.unwrap()))
        .collect();
    let decreasing = points.windows(2).all(|w| w[1].1 < w[0].1);
    let fit = fit_scaling(&points, FitModel::PowerLaw).unwrap();
    let at_01 = plateau.at(0.1).max_abs_psi_sq_deviation.unwrap();
    let passed = decreasing && fit.slope >= 0.3 && at_01 <= 0.25;
    let listed: Vec<String> = points.iter().map(|(h, d)| format!("h = {h}: {d:.4}")).collect();
    outcome(
        passed,
        format!(
            "sup deviation {}; decreasing: {decreasing}; exponent {:.3} (need >= 0.3); at h = 0.1 {at_01:.4} (need <= 0.25)",
            listed.join(", "),
            fit.slope
        ),
    )
}

fn criterion_6(dir: &Path) -> Outcome {
    let config = desk_config(0.1, N, "\n[evolve]\nhorizon = 10.0\nsamples = 400\n");
    let s = run(&config, Command::LinearEvolve, &dir.join("linear"));
    let decay = s.extra("overlap_decay_factor").unwrap();
    let im = s.lambda_im.unwrap();
    let rate = -s.fitted_decay_rate.unwrap().slope;
    let rate_ratio = rate / im.abs();
    let t_c = s.t_c.unwrap();
    let eps = s.temperature.unwrap() - t_c;
    let grid = desk_grid(N);
    let profile = RadialFunction::gaussian(DESK_AMPLITUDE, DESK_WIDTH);
    let lam = |d: f64| resonance_leading_order(&profile, 1.0, t_c + d, t_c, &grid).unwrap().lambda;
    let ladder = lam(eps).norm() / lam(eps / 2.0).norm();
    let passed = decay >= E * E && (rate_ratio - 1.0).abs() <= 0.2 && im < 0.0 && (ladder - 2.0).abs() <= 0.2;
    outcome(
        passed,
        format!(
            "|<alpha_*, alpha_t>| decays by {decay:.1}; fitted rate {rate:.5} vs |Im lambda| {:.5} (ratio {rate_ratio:.3}); |lambda(eps)| / |lambda(eps/2)| = {ladder:.4}",
            im.abs()
        ),
    )
}

fn criterion_7(plateau: &PlateauRuns) -> Outcome {
    let s = plateau.at(0.1);
    let tdgl = s.extra("tdgl_final_abs_psi").unwrap();
    let bound = s.extra("plateau_bound").unwrap();
    let dev = s.max_abs_psi_sq_deviation.unwrap();
    let asserted = s.extra("contrast_holds").unwrap() == 1.0;
    let passed = tdgl < 0.1 && dev <= bound && asserted && s.invariants_passed;
    outcome(
        passed,
        format!(
            "TDGL |psi| at horizon {tdgl:.2e} (need < 0.1); BdG deviation {dev:.4} vs plateau bound {bound:.4}; summary asserts contrast: {asserted}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let r = desk_reference(N);
    let points: Vec<(f64, f64)> = PLATEAU_HS
        .iter()
        .map(|&h| {
            let t = r.t_c + h * h;
            let s = build_initial_state(InitialStateKind::PerturbedNormal, Complex64::new(1.0, 0.0), h, &r, t).unwrap();
            (h, pressure_difference(&s, t, 1.0, &r.potential, &r.grid).unwrap())
        })
        .collect();
    let fit = fit_scaling(&points, FitModel::PowerLaw).unwrap();
    outcome(
        (fit.slope - 4.0).abs() <= 0.3,
        format!("pressure difference exponent {:.4} (max log residual {:.1e})", fit.slope, fit.max_log_residual),
    )
}

fn criterion_9() -> Outcome {
    let r = desk_reference(N);
    let a: Vec<Complex64> = r.alpha_star.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let ratios: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|d| fermi_shell_mass(&a, *d, 1.0, &r.grid).unwrap() / d)
        .collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        spread <= 2.0,
        format!("mass / delta = {:.4}, {:.4}, {:.4}; spread {spread:.4}", ratios[0], ratios[1], ratios[2]),
    )
}

fn criterion_10() -> Outcome {
    let r = desk_reference(N);
    let profile = RadialFunction::gaussian(DESK_AMPLITUDE, DESK_WIDTH);
    let offsets = [0.04, 0.02, 0.01, 0.005];
    let mut worst_theta: f64 = 0.0;
    let mut ratios = Vec::new();
    for d in offsets {
        let t = r.t_c + d;
        let root = |b: f64| {
            resonance_rootfind_gaussian(DESK_AMPLITUDE, DESK_WIDTH, 1.0, t, r.t_c, Complex64::new(0.0, -b), &r.grid)
                .unwrap()
                .lambda
        };
        let (a, b) = (root(0.1), root(0.2));
        worst_theta = worst_theta.max((a - b).norm() / a.norm());
        ratios.push(a / resonance_leading_order(&profile, 1.0, t, r.t_c, &r.grid).unwrap().lambda);
    }
    let gaps: Vec<f64> = ratios.iter().map(|q| (q - 1.0).norm()).collect();
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
    let n = ratios.len();
    let limit = 2.0 * ratios[n - 1] - ratios[n - 2];
    let limit_gap = (limit - 1.0).norm();
    let listed: Vec<String> = ratios.iter().map(|q| format!("{:.4}", q.norm())).collect();
    outcome(
        worst_theta <= 1e-6 && shrinking && limit_gap <= 1e-2,
        format!(
            "theta dependence {worst_theta:.1e}; |root / leading order| along T - T_c = 0.04..0.005: {}; extrapolated ratio {limit:.4} (|ratio - 1| = {limit_gap:.1e})",
            listed.join(", ")
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let total = Instant::now();
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut record = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        println!(
            "{} criterion {n}: {} [{:.1} s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        results.push((n, o));
    };

    record(1, &mut criterion_1);
    record(3, &mut || criterion_3(dir.path()));
    record(4, &mut criterion_4);
    let plateau = PlateauRuns::new(dir.path());
    record(2, &mut || criterion_2(&plateau, dir.path()));
    record(5, &mut || criterion_5(&plateau));
    record(6, &mut || criterion_6(dir.path()));
    record(7, &mut || criterion_7(&plateau));
    record(8, &mut criterion_8);
    record(9, &mut criterion_9);
    record(10, &mut criterion_10);

    let failed: Vec<usize> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s",
        results.len() - failed.len(),
        results.len(),
        total.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
