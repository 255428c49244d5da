//! Named experiments: each command builds the model from a [`RunConfig`], runs it and
//! writes its artifacts.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::dynamics::{evolve_nonlinear, hamiltonian_field, max_quasiparticle_energy, EvolveConfig, Observer};
use crate::equilibrium::{build_initial_state, gap_equation_solve, seed_delta};
use crate::error::{BdgError, Result};
use crate::grid::{Dimension, MomentumGrid};
use crate::linear::LinearModel;
use crate::model::{delta_from_alpha, Potential};
use crate::observables::{fermi_shell_mass, psi_of, Monitor, ObservablesRecord};
use crate::resonance::{
    predicted_decay_timescale, resonance_leading_order, resonance_rootfind_gaussian, ResonanceMethod, ResonanceResult,
};
use crate::spectral::{critical_temperature, ReferenceData};
use crate::state::{pressure_difference, BdGState};
use crate::tdgl::{tdgl_evolve, TdglParams};

use super::config::{PotentialKind, RunConfig, DEFAULT_THETA_IM};
use super::fit::{fit_scaling, FitModel};
use super::output::{write_csv, write_text, NamedFit, RunSummary, SnapshotWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Critical temperature, spectral gap and Fermi-shell mass of the gap eigenfunction.
    Tc,
    /// Tabulates the gap eigenfunction.
    Alphastar,
    /// Self-consistent equilibrium below `T_c`.
    Equilibrium,
    /// Nonlinear BdG evolution with invariant monitors.
    Evolve,
    /// Linearized evolution above `T_c`.
    LinearEvolve,
    /// Resonance of the linearized dynamics.
    Resonance,
    /// BdG plateau against rate-calibrated TDGL decay.
    CompareGl,
    /// Evolution at `dt` and `dt/2` plus a gauge-rotated copy.
    CheckInvariants,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Tc => "tc",
            Command::Alphastar => "alphastar",
            Command::Equilibrium => "equilibrium",
            Command::Evolve => "evolve",
            Command::LinearEvolve => "linear-evolve",
            Command::Resonance => "resonance",
            Command::CompareGl => "compare-gl",
            Command::CheckInvariants => "check-invariants",
        }
    }
}

/// Where a run reads relative inputs and writes artifacts.
#[derive(Debug, Clone)]
pub struct RunPaths {
    /// Directory against which relative table paths resolve.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl RunPaths {
    pub fn new(base_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunPaths {
            base_dir: base_dir.into(),
            out_dir: out_dir.into(),
        }
    }

    fn output(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }
}

/// Shell half-widths, relative to `sqrt(mu)`, reported by `tc` and `alphastar`.
pub const SHELL_LADDER: [f64; 3] = [0.02, 0.01, 0.005];
/// Window, in units of `1 / |Im lambda|`, of the exponential fit in `linear-evolve`.
pub const DECAY_FIT_WINDOW: f64 = 3.0;
/// Pressure drifts below this are round-off and excluded from the `dt`-halving ratio.
pub const PRESSURE_FLOOR: f64 = 1e-11;
/// Smallest accepted drift ratio when `dt` is halved (second order gives 4).
pub const PRESSURE_RATIO_MIN: f64 = 3.6;

/// Everything derived from the configuration that every command needs.
pub struct Setup {
    pub grid: Arc<MomentumGrid>,
    pub potential: Arc<Potential>,
    pub reference: ReferenceData,
    pub temperature: f64,
}

pub fn setup(config: &RunConfig, paths: &RunPaths) -> Result<Setup> {
    let grid = Arc::new(config.build_grid()?);
    let potential = Arc::new(config.build_potential(&grid, &paths.base_dir)?);
    let [lo, hi] = config.temperature.bracket.unwrap_or([1e-4, config.mu]);
    let reference = critical_temperature(config.mu, potential.clone(), grid.clone(), (lo, hi))?;
    let temperature = config.resolve_temperature(reference.t_c)?;
    Ok(Setup {
        grid,
        potential,
        reference,
        temperature,
    })
}

/// Result of one nonlinear evolution.
pub struct Evolution {
    pub records: Vec<ObservablesRecord>,
    pub violations: Vec<String>,
    pub final_state: BdGState,
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<PathBuf>,
}

impl Evolution {
    pub fn max_deviation(&self) -> f64 {
        let base = self.records.first().map_or(0.0, |r| r.abs_psi_sq);
        self.records.iter().map(|r| (r.abs_psi_sq - base).abs()).fold(0.0, f64::max)
    }

    pub fn max_pressure_drift(&self) -> f64 {
        self.records.iter().map(|r| r.pressure_drift.abs()).fold(0.0, f64::max)
    }

    fn fill(&self, s: &mut RunSummary) {
        s.max_abs_psi_sq_deviation = Some(self.max_deviation());
        s.pressure_drift = Some(self.max_pressure_drift());
        s.s_drift = Some(self.records.iter().map(|r| r.s_drift).fold(0.0, f64::max));
        s.eq10_residual = Some(self.records.iter().map(|r| r.eq10_residual).fold(0.0, f64::max));
        s.min_admissibility_margin = Some(
            self.records
                .iter()
                .map(|r| r.admissibility_margin)
                .fold(f64::INFINITY, f64::min),
        );
        s.violations.extend(self.violations.iter().cloned());
        s.push_extra("dt", self.dt);
        s.push_extra("steps", self.steps as f64);
    }
}

/// Step size and schedule of a nonlinear run starting from `state0`.
pub fn evolve_config(config: &RunConfig, setup: &Setup, state0: &BdGState) -> Result<EvolveConfig> {
    let t_end = config.resolve_t_end(setup.temperature, setup.reference.t_c)?;
    let dt = match config.evolve.dt {
        Some(dt) => dt,
        None => {
            let (eps, delta) = hamiltonian_field(state0, &setup.potential, config.mu, &setup.grid)?;
            config.evolve.step_factor.unwrap_or(crate::dynamics::AUTO_STEP_FACTOR)
                / max_quasiparticle_energy(&eps, &delta)
        }
    };
    Ok(EvolveConfig {
        dt,
        t_end,
        observe_every: config.evolve.observe_every.unwrap_or(100),
        midpoint_iters: config.evolve.midpoint_iters.unwrap_or(2),
    })
}

/// Builds the configured initial state (optionally phase-rotated) and evolves it.
pub fn run_evolution(
    config: &RunConfig,
    setup: &Setup,
    schedule: &EvolveConfig,
    psi0: Complex64,
    snapshots: Option<(&Path, &str)>,
) -> Result<Evolution> {
    let kind = config.initial_state.unwrap_or(crate::equilibrium::InitialStateKind::PerturbedNormal);
    let state0 = build_initial_state(kind, psi0, config.h, &setup.reference, setup.temperature)?;
    let mut monitor = Monitor::new(&setup.reference, &state0, config.h, setup.temperature);
    let times = config.output.snapshot_times.clone().unwrap_or_default();
    let (dir, hash) = snapshots.unwrap_or((Path::new("."), ""));
    let mut writer = SnapshotWriter::new(dir, hash, &setup.grid, &times);
    let final_state = {
        let mut observers: Vec<&mut dyn Observer> = vec![&mut monitor];
        if snapshots.is_some() && !times.is_empty() {
            observers.push(&mut writer);
        }
        evolve_nonlinear(&state0, &setup.potential, config.mu, &setup.grid, schedule, &mut observers)?
    };
    Ok(Evolution {
        records: monitor.records,
        violations: monitor.violations,
        final_state,
        dt: schedule.dt,
        steps: schedule.steps(),
        snapshots: writer.written,
    })
}

fn require_rank_one_3d(config: &RunConfig, command: Command) -> Result<()> {
    let rank_one = matches!(
        config.potential.kind,
        PotentialKind::SeparableGaussian | PotentialKind::SeparableTable
    );
    if !rank_one || config.dimension != Dimension::ThreeDRadial {
        return Err(BdgError::config(
            "potential.kind",
            format!(
                "`{}` needs a separable potential in dimension \"three-d-radial\"",
                command.as_str()
            ),
        ));
    }
    Ok(())
}

/// Resonance at the run temperature with the configured method.
pub fn compute_resonance(config: &RunConfig, setup: &Setup, paths: &RunPaths) -> Result<ResonanceResult> {
    require_rank_one_3d(config, Command::Resonance)?;
    let t_c = setup.reference.t_c;
    match config.resonance.method.unwrap_or(ResonanceMethod::LeadingOrder) {
        ResonanceMethod::LeadingOrder => {
            let phi = config.profile(&paths.base_dir)?.expect("separable profile");
            resonance_leading_order(&phi, config.mu, setup.temperature, t_c, &setup.grid)
        }
        ResonanceMethod::ComplexDilationRoot => {
            if config.potential.kind != PotentialKind::SeparableGaussian {
                return Err(BdgError::config(
                    "resonance.method",
                    "complex dilation needs potential.kind = \"separable-gaussian\"",
                ));
            }
            let theta = Complex64::new(0.0, config.resonance.theta_im.unwrap_or(DEFAULT_THETA_IM));
            resonance_rootfind_gaussian(
                config.potential.amplitude.unwrap_or(0.0),
                config.potential.width.unwrap_or(1.0),
                config.mu,
                setup.temperature,
                t_c,
                theta,
                &setup.grid,
            )
        }
    }
}

fn shell_ladder(reference: &ReferenceData, summary: &mut RunSummary) -> Result<Vec<(f64, f64)>> {
    let a: Vec<Complex64> = reference.alpha_star.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let kf = reference.fermi_momentum();
    let mut ladder = Vec::new();
    for rel in SHELL_LADDER {
        let delta = rel * kf;
        let mass = fermi_shell_mass(&a, delta, reference.mu, &reference.grid)?;
        summary.push_extra(&format!("shell_mass_over_delta[{rel}]"), mass / delta);
        ladder.push((delta, mass));
    }
    Ok(ladder)
}

/// Runs `command`, writes its artifacts below `paths.out_dir` and returns the summary.
///
/// A returned summary with `invariants_passed == false` means a monitor or an asserted
/// ordering failed; numerical and configuration failures come back as errors.
pub fn run_experiment(config: &RunConfig, command: Command, paths: &RunPaths) -> Result<RunSummary> {
    let start = Instant::now();
    std::fs::create_dir_all(&paths.out_dir)
        .map_err(|e| BdgError::config("--out", format!("{}: {e}", paths.out_dir.display())))?;
    let setup = setup(config, paths)?;
    let t_c = setup.reference.t_c;
    let hash = config.hash();
    let mut s = RunSummary {
        command: command.as_str().to_string(),
        config_hash: hash.clone(),
        t_c: Some(t_c),
        temperature: Some(setup.temperature),
        h: config.h,
        invariants_passed: true,
        ..RunSummary::default()
    };
    let csv_path = paths.output(config.output.csv.as_deref().unwrap_or(Path::new("series.csv")));
    let grid = &setup.grid;

    match command {
        Command::Tc => {
            let r = &setup.reference;
            s.push_extra("kappa", r.spectral_gap);
            s.push_extra("lowest_eigenvalue", r.lowest_value);
            s.push_extra("eigen_residual", r.eigen_residual);
            if let Some(v) = r.scalar_residual {
                s.push_extra("scalar_residual", v);
            }
            if let Some(v) = r.rank_one_consistency {
                s.push_extra("rank_one_consistency", v);
            }
            let delta = config.h;
            let a: Vec<Complex64> = r.alpha_star.iter().map(|v| Complex64::new(*v, 0.0)).collect();
            s.push_extra("shell_delta", delta);
            s.push_extra("shell_mass", fermi_shell_mass(&a, delta, config.mu, grid)?);
            shell_ladder(r, &mut s)?;
        }
        Command::Alphastar => {
            let ladder = shell_ladder(&setup.reference, &mut s)?;
            let ratios: Vec<f64> = ladder.iter().map(|(d, m)| m / d).collect();
            let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            s.push_extra("shell_ratio_spread", spread);
            s.scaling_exponents.push(NamedFit {
                name: "shell_mass_vs_delta".into(),
                fit: fit_scaling(&ladder, FitModel::PowerLaw)?,
            });
            let rows: Vec<[f64; 3]> = grid
                .nodes()
                .iter()
                .zip(grid.weights())
                .zip(&setup.reference.alpha_star)
                .map(|((k, w), a)| [*k, *w, *a])
                .collect();
            write_csv(&csv_path, &["k", "weight", "alpha_star"], &rows)?;
            s.artifacts.push(csv_path.clone());
        }
        Command::Equilibrium => {
            if setup.temperature >= t_c {
                return Err(BdgError::config(
                    "temperature",
                    format!("equilibrium needs T < T_c (T = {}, T_c = {t_c})", setup.temperature),
                ));
            }
            let seed = seed_delta(&setup.reference, 0.1)?;
            let sol = gap_equation_solve(setup.temperature, config.mu, &setup.potential, grid, &seed)?;
            let psi = psi_of(&sol.state, &setup.reference, config.h);
            s.push_extra("delta_norm", sol.delta.norm(grid));
            s.push_extra("psi_re", psi.re);
            s.push_extra("psi_im", psi.im);
            s.push_extra("iterations", sol.iterations as f64);
            s.push_extra("gap_residual", sol.residual);
            s.push_extra(
                "pressure_difference",
                pressure_difference(&sol.state, setup.temperature, config.mu, &setup.potential, grid)?,
            );
            let rows: Vec<[f64; 6]> = (0..grid.len())
                .map(|i| {
                    let a = sol.state.alpha[i];
                    let d = sol.delta.values[i];
                    [grid.nodes()[i], sol.state.gamma[i], a.re, a.im, d.re, d.im]
                })
                .collect();
            write_csv(
                &csv_path,
                &["k", "gamma", "alpha_re", "alpha_im", "delta_re", "delta_im"],
                &rows,
            )?;
            s.artifacts.push(csv_path.clone());
        }
        Command::Evolve => {
            let kind = config.initial_state.unwrap_or(crate::equilibrium::InitialStateKind::PerturbedNormal);
            let state0 = build_initial_state(kind, config.psi0(), config.h, &setup.reference, setup.temperature)?;
            let schedule = evolve_config(config, &setup, &state0)?;
            let ev = run_evolution(config, &setup, &schedule, config.psi0(), Some((&paths.out_dir, &hash)))?;
            ev.fill(&mut s);
            s.push_extra(
                "initial_pressure_difference",
                pressure_difference(&state0, setup.temperature, config.mu, &setup.potential, grid)?,
            );
            write_records(&csv_path, &ev.records)?;
            s.artifacts.push(csv_path.clone());
            s.artifacts.extend(ev.snapshots.iter().cloned());
        }
        Command::LinearEvolve => {
            if setup.temperature <= t_c {
                return Err(BdgError::config(
                    "temperature",
                    format!("linear-evolve needs T > T_c (T = {}, T_c = {t_c})", setup.temperature),
                ));
            }
            let model = LinearModel::new(setup.temperature, config.mu, &setup.potential, grid.clone())?;
            let t_end = config.resolve_t_end(setup.temperature, t_c)?;
            let samples = config.evolve.samples.unwrap_or(400);
            let times: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();
            let h = config.h;
            let alpha0: Vec<Complex64> = setup.reference.alpha_star.iter().map(|a| h * config.psi0() * *a).collect();
            let series = model.evolve_series(&alpha0, &times)?;
            let rows: Vec<[f64; 6]> = times
                .par_iter()
                .zip(&series)
                .map(|(t, a)| {
                    let psi = grid.inner_real_complex(&setup.reference.alpha_star, a) / h;
                    let xi: Vec<Complex64> = a
                        .iter()
                        .zip(&setup.reference.alpha_star)
                        .map(|(a, s)| a - h * psi * *s)
                        .collect();
                    let delta = delta_from_alpha(a, &setup.potential, grid)
                        .map(|d| d.norm(grid))
                        .unwrap_or(f64::NAN);
                    [*t, psi.re, psi.im, psi.norm_sqr(), grid.norm_complex(&xi), delta]
                })
                .collect();
            write_csv(
                &csv_path,
                &["t", "psi_re", "psi_im", "abs_psi_sq", "xi_norm", "delta_norm"],
                &rows,
            )?;
            s.artifacts.push(csv_path.clone());
            let base = rows[0][3];
            s.max_abs_psi_sq_deviation = Some(rows.iter().map(|r| (r[3] - base).abs()).fold(0.0, f64::max));
            let first = rows[0][3].sqrt();
            let last = rows[rows.len() - 1][3].sqrt();
            s.push_extra("overlap_decay_factor", first / last);
            let separable = matches!(
                config.potential.kind,
                PotentialKind::SeparableGaussian | PotentialKind::SeparableTable
            );
            if separable && config.dimension == Dimension::ThreeDRadial {
                let phi = config.profile(&paths.base_dir)?.expect("separable profile");
                let res = resonance_leading_order(&phi, config.mu, setup.temperature, t_c, grid)?;
                s.lambda_re = Some(res.lambda.re);
                s.lambda_im = Some(res.lambda.im);
            }
            let window = match s.lambda_im {
                Some(im) if im < 0.0 => DECAY_FIT_WINDOW / im.abs(),
                _ => t_end,
            };
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r[0] <= window && r[3] > 0.0)
                .map(|r| (r[0], r[3].sqrt()))
                .collect();
            if points.len() >= 3 {
                let fit = fit_scaling(&points, FitModel::Exponential)?;
                s.fitted_decay_rate = Some(fit);
                if let Some(im) = s.lambda_im {
                    s.push_extra("rate_ratio", -fit.slope / im.abs());
                }
            } else if config.psi0().norm() > 0.0 {
                s.notes.push("too few samples inside the fit window".into());
            }
        }
        Command::Resonance => {
            let res = compute_resonance(config, &setup, paths)?;
            s.lambda_re = Some(res.lambda.re);
            s.lambda_im = Some(res.lambda.im);
            let timescale = predicted_decay_timescale(&res).ok();
            let record = serde_json::json!({
                "lambda_re": res.lambda.re,
                "lambda_im": res.lambda.im,
                "P": res.p_value,
                "Q": res.q_weight,
                "prefactor": res.prefactor,
                "method": res.method,
                "timescale": timescale,
            });
            let path = paths.out_dir.join("resonance.json");
            write_text(&path, &serde_json::to_string_pretty(&record).expect("json"))?;
            s.artifacts.push(path);
            s.push_extra("P", res.p_value);
            s.push_extra("Q", res.q_weight);
            s.push_extra("prefactor", res.prefactor);
            if let Some(ts) = timescale {
                s.push_extra("timescale", ts);
            }
            s.push_extra("iterations", res.iterations as f64);
        }
        Command::CompareGl => {
            if setup.temperature <= t_c {
                return Err(BdgError::config("temperature", "compare-gl needs T > T_c (tau > 0)"));
            }
            let res = compute_resonance(config, &setup, paths)?;
            let rate = res.lambda.im.abs();
            s.lambda_re = Some(res.lambda.re);
            s.lambda_im = Some(res.lambda.im);
            let kind = config.initial_state.unwrap_or(crate::equilibrium::InitialStateKind::PerturbedNormal);
            let state0 = build_initial_state(kind, config.psi0(), config.h, &setup.reference, setup.temperature)?;
            let schedule = evolve_config(config, &setup, &state0)?;
            let ev = run_evolution(config, &setup, &schedule, config.psi0(), Some((&paths.out_dir, &hash)))?;
            ev.fill(&mut s);
            write_records(&csv_path, &ev.records)?;
            s.artifacts.push(csv_path.clone());

            let c_gl = config.tdgl.c_gl.unwrap_or(1.0);
            let params = TdglParams::calibrated(c_gl, setup.temperature, t_c, rate)?;
            let times: Vec<f64> = ev.records.iter().map(|r| r.t).collect();
            let tdgl = tdgl_evolve(config.psi0(), &params, &times)?;
            let tdgl_rows: Vec<[f64; 5]> = tdgl
                .iter()
                .map(|x| [x.t, x.psi.re, x.psi.im, x.psi.norm_sqr(), x.gl_energy])
                .collect();
            let tdgl_path = csv_path.with_file_name("tdgl.csv");
            write_csv(&tdgl_path, &["t", "psi_re", "psi_im", "abs_psi_sq", "gl_energy"], &tdgl_rows)?;
            s.artifacts.push(tdgl_path);

            let psi0_abs = config.psi0().norm();
            let tdgl_final = tdgl.last().map_or(psi0_abs, |x| x.psi.norm());
            let bound = config.tdgl.plateau_constant.unwrap_or_else(super::config::default_plateau_constant)
                * config.h.sqrt();
            let bdg_dev = ev.max_deviation();
            let tdgl_decayed = tdgl_final < 0.1 * psi0_abs;
            let bdg_within = bdg_dev <= bound;
            s.push_extra("tdgl_rate", rate);
            s.push_extra("tdgl_final_abs_psi", tdgl_final);
            s.push_extra("plateau_bound", bound);
            s.push_extra("bdg_final_abs_psi", ev.records.last().map_or(0.0, |r| r.psi().norm()));
            s.push_extra("contrast_holds", f64::from(u8::from(tdgl_decayed && bdg_within)));
            if !tdgl_decayed {
                s.violations.push(format!(
                    "contrast: TDGL |psi| = {tdgl_final:e} has not decayed below 0.1 |psi0| = {:e}",
                    0.1 * psi0_abs
                ));
            }
            if !bdg_within {
                s.violations.push(format!(
                    "contrast: BdG deviation {bdg_dev:e} exceeds the plateau bound {bound:e}"
                ));
            }
        }
        Command::CheckInvariants => {
            let kind = config.initial_state.unwrap_or(crate::equilibrium::InitialStateKind::PerturbedNormal);
            let psi0 = config.psi0();
            let state0 = build_initial_state(kind, psi0, config.h, &setup.reference, setup.temperature)?;
            let coarse = evolve_config(config, &setup, &state0)?;
            let fine = EvolveConfig {
                dt: coarse.dt / 2.0,
                observe_every: coarse.observe_every * 2,
                ..coarse
            };
            let a = run_evolution(config, &setup, &coarse, psi0, None)?;
            let b = run_evolution(config, &setup, &fine, psi0, None)?;
            let rotation = 0.7;
            let c = run_evolution(config, &setup, &coarse, psi0 * Complex64::from_polar(1.0, rotation), None)?;
            a.fill(&mut s);
            s.violations.extend(b.violations.iter().map(|v| format!("dt/2 run: {v}")));
            s.violations.extend(c.violations.iter().map(|v| format!("rotated run: {v}")));
            write_records(&csv_path, &a.records)?;
            s.artifacts.push(csv_path.clone());

            let (pa, pb) = (a.max_pressure_drift(), b.max_pressure_drift());
            s.push_extra("pressure_drift_dt", pa);
            s.push_extra("pressure_drift_half_dt", pb);
            if pa > PRESSURE_FLOOR {
                let ratio = pa / pb.max(f64::MIN_POSITIVE);
                s.push_extra("pressure_drift_ratio", ratio);
                if ratio < PRESSURE_RATIO_MIN {
                    s.violations.push(format!(
                        "pressure drift shrinks only {ratio:.3}x when dt is halved (need {PRESSURE_RATIO_MIN})"
                    ));
                }
            } else {
                s.notes.push(format!("pressure drift {pa:e} is at round-off; dt-halving ratio not meaningful"));
            }
            let gauge = a
                .records
                .iter()
                .zip(&c.records)
                .map(|(x, y)| {
                    let expected = x.psi() * Complex64::from_polar(1.0, rotation);
                    (y.psi() - expected).norm()
                })
                .fold(0.0, f64::max);
            s.push_extra("gauge_defect", gauge);
            if !(gauge <= 1e-10 * (1.0 + psi0.norm())) {
                s.violations.push(format!("gauge covariance defect {gauge:e}"));
            }
        }
    }

    s.invariants_passed = s.violations.is_empty();
    s.wall_time_s = start.elapsed().as_secs_f64();
    let summary_path = paths.output(config.output.summary.as_deref().unwrap_or(Path::new("summary.json")));
    s.artifacts.push(summary_path.clone());
    write_text(&summary_path, &s.to_json())?;
    Ok(s)
}

pub fn write_records(path: &Path, records: &[ObservablesRecord]) -> Result<()> {
    let rows: Vec<[f64; 11]> = records.iter().map(ObservablesRecord::values).collect();
    write_csv(path, &ObservablesRecord::COLUMNS, &rows)
}

/// Plateau scaling over `h`: runs `evolve` per `h` and fits the deviation as a power law.
pub fn plateau_scaling(config: &RunConfig, hs: &[f64], paths: &RunPaths) -> Result<(Vec<(f64, f64)>, NamedFit)> {
    let mut points = Vec::new();
    for &h in hs {
        let mut c = config.clone();
        c.h = h;
        let setup = setup(&c, paths)?;
        let kind = c.initial_state.unwrap_or(crate::equilibrium::InitialStateKind::PerturbedNormal);
        let state0 = build_initial_state(kind, c.psi0(), h, &setup.reference, setup.temperature)?;
        let schedule = evolve_config(&c, &setup, &state0)?;
        let ev = run_evolution(&c, &setup, &schedule, c.psi0(), None)?;
        points.push((h, ev.max_deviation()));
    }
    let fit = fit_scaling(&points, FitModel::PowerLaw)?;
    Ok((
        points,
        NamedFit {
            name: "plateau_deviation_vs_h".into(),
            fit,
        },
    ))
}
