//! Run configuration: TOML text with sections, defaults applied at parse time.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::equilibrium::InitialStateKind;
use crate::error::{BdgError, Result};
use crate::grid::{Dimension, MomentumGrid};
use crate::model::{Potential, RadialFunction, Table};
use crate::resonance::ResonanceMethod;

pub const DEFAULT_N_3D: usize = 2048;
pub const DEFAULT_N_1D: usize = 4096;
pub const DEFAULT_HORIZON: f64 = 10.0;
pub const DEFAULT_ANGULAR_NODES: usize = 64;
pub const DEFAULT_THETA_IM: f64 = -0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: Dimension,
    pub mu: f64,
    pub h: f64,
    #[serde(default)]
    pub psi0: Option<[f64; 2]>,
    #[serde(default)]
    pub initial_state: Option<InitialStateKind>,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub temperature: TemperatureSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub evolve: EvolveSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub resonance: ResonanceSpec,
    #[serde(default)]
    pub tdgl: TdglSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `-|phi><phi|` with Gaussian `phi(k) = amplitude exp(-k^2 / 2 width^2)`.
    SeparableGaussian,
    /// `-|phi><phi|` with `phi` read from a two-column file.
    SeparableTable,
    /// `-g delta(x)` in one dimension.
    Contact,
    /// Local potential with Gaussian `V_hat(k) = amplitude exp(-k^2 / 2 width^2)`.
    LocalRadialGaussian,
    /// Local potential with `V_hat` read from a two-column file.
    LocalRadialTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureSpec {
    /// Absolute temperature; exclusive with `tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute: Option<f64>,
    /// `T = T_c + tau h^2` with `|tau| <= 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSpec {
    /// Explicit time step; exclusive with `step_factor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// `dt = step_factor / max_k E(k)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_factor: Option<f64>,
    /// Explicit end time; exclusive with `horizon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// `t_end = horizon / |T - T_c|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observe_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub midpoint_iters: Option<usize>,
    /// Number of sample times for `linear-evolve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<ResonanceMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_im: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdglSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gl: Option<f64>,
    /// Plateau constant `C` in the bound `||psi_t|^2 - |psi_0|^2| <= C h^{1/2}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_constant: Option<f64>,
}

/// `C` such that `C h^{1/2} = 0.25` at `h = 0.1`.
pub fn default_plateau_constant() -> f64 {
    0.25 / 0.1f64.sqrt()
}

fn finite_positive(key: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(BdgError::config(key, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Parses and validates configuration text, filling every default.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let key = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "<document>".to_string());
        BdgError::config(key, msg)
    })?;
    cfg.apply_defaults();
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BdgError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        parse_config(&text)
    }

    fn apply_defaults(&mut self) {
        self.psi0.get_or_insert([1.0, 0.0]);
        self.initial_state.get_or_insert(InitialStateKind::PerturbedNormal);
        if self.temperature.absolute.is_none() && self.temperature.tau.is_none() {
            self.temperature.tau = Some(1.0);
        }
        let mu = self.mu;
        self.temperature
            .bracket
            .get_or_insert([1e-4, if mu > 0.0 { mu } else { 1.0 }]);
        self.grid.n.get_or_insert(match self.dimension {
            Dimension::ThreeDRadial => DEFAULT_N_3D,
            Dimension::OneD => DEFAULT_N_1D,
        });
        self.grid.k_max.get_or_insert(6.0 * mu.max(0.0).sqrt());
        if self.evolve.dt.is_none() && self.evolve.step_factor.is_none() {
            self.evolve.step_factor = Some(crate::dynamics::AUTO_STEP_FACTOR);
        }
        if self.evolve.t_end.is_none() && self.evolve.horizon.is_none() {
            self.evolve.horizon = Some(DEFAULT_HORIZON);
        }
        self.evolve.observe_every.get_or_insert(100);
        self.evolve.midpoint_iters.get_or_insert(2);
        self.evolve.samples.get_or_insert(400);
        self.output.csv.get_or_insert_with(|| PathBuf::from("series.csv"));
        self.output.summary.get_or_insert_with(|| PathBuf::from("summary.json"));
        self.output.snapshot_times.get_or_insert_with(Vec::new);
        self.resonance.method.get_or_insert(ResonanceMethod::LeadingOrder);
        self.resonance.theta_im.get_or_insert(DEFAULT_THETA_IM);
        self.tdgl.c_gl.get_or_insert(1.0);
        self.tdgl.plateau_constant.get_or_insert_with(default_plateau_constant);
    }

    fn validate(&self) -> Result<()> {
        finite_positive("mu", self.mu)?;
        finite_positive("h", self.h)?;
        let psi0 = self.psi0.unwrap_or_default();
        if psi0.iter().any(|v| !v.is_finite()) {
            return Err(BdgError::config("psi0", "components must be finite"));
        }
        self.validate_potential()?;
        match (self.temperature.absolute, self.temperature.tau) {
            (Some(_), Some(_)) => {
                return Err(BdgError::config("temperature", "give either `absolute` or `tau`, not both"));
            }
            (Some(t), None) => finite_positive("temperature.absolute", t)?,
            (None, Some(tau)) => {
                if !(tau.abs() <= 1.0) {
                    return Err(BdgError::config(
                        "temperature.tau",
                        format!("|tau| = {} exceeds 1: theorem runs require |T - T_c| <= h^2", tau.abs()),
                    ));
                }
            }
            (None, None) => unreachable!("defaults fill tau"),
        }
        if let Some([lo, hi]) = self.temperature.bracket {
            if !(lo > 0.0 && hi > lo) {
                return Err(BdgError::config("temperature.bracket", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
            }
        }
        let n = self.grid.n.unwrap_or_default();
        let k_max = self.grid.k_max.unwrap_or_default();
        finite_positive("grid.k_max", k_max)?;
        if k_max <= self.mu.sqrt() {
            return Err(BdgError::config("grid.k_max", "must exceed sqrt(mu)"));
        }
        if MomentumGrid::clustered(self.dimension, n, k_max, self.mu.sqrt()).is_err() {
            return Err(BdgError::config(
                "grid.n",
                format!("{n} is not a valid size (multiple of 16 per half-line, at least 32)"),
            ));
        }
        match (self.evolve.dt, self.evolve.step_factor) {
            (Some(_), Some(_)) => return Err(BdgError::config("evolve", "give either `dt` or `step_factor`, not both")),
            (Some(dt), None) => finite_positive("evolve.dt", dt)?,
            (None, Some(f)) => {
                finite_positive("evolve.step_factor", f)?;
                if f > crate::dynamics::RESOLUTION_GUARD {
                    return Err(BdgError::config(
                        "evolve.step_factor",
                        format!("must not exceed {}", crate::dynamics::RESOLUTION_GUARD),
                    ));
                }
            }
            (None, None) => unreachable!("defaults fill step_factor"),
        }
        match (self.evolve.t_end, self.evolve.horizon) {
            (Some(_), Some(_)) => return Err(BdgError::config("evolve", "give either `t_end` or `horizon`, not both")),
            (Some(t), None) => finite_positive("evolve.t_end", t)?,
            (None, Some(c)) => finite_positive("evolve.horizon", c)?,
            (None, None) => unreachable!("defaults fill horizon"),
        }
        if self.evolve.observe_every == Some(0) {
            return Err(BdgError::config("evolve.observe_every", "must be at least 1"));
        }
        if self.evolve.samples.unwrap_or(0) < 3 {
            return Err(BdgError::config("evolve.samples", "must be at least 3"));
        }
        if let Some(times) = &self.output.snapshot_times {
            if times.iter().any(|t| !(*t >= 0.0)) {
                return Err(BdgError::config("output.snapshot_times", "times must be non-negative"));
            }
        }
        if let Some(th) = self.resonance.theta_im {
            if !(th < 0.0) {
                return Err(BdgError::config("resonance.theta_im", "must be negative"));
            }
        }
        finite_positive("tdgl.c_gl", self.tdgl.c_gl.unwrap_or(1.0))?;
        finite_positive("tdgl.plateau_constant", self.tdgl.plateau_constant.unwrap_or(1.0))?;
        Ok(())
    }

    fn validate_potential(&self) -> Result<()> {
        let p = &self.potential;
        let (required, allowed): (&[&str], &[&str]) = match p.kind {
            PotentialKind::SeparableGaussian => (&["amplitude"], &["amplitude", "width"]),
            PotentialKind::SeparableTable => (&["file"], &["file"]),
            PotentialKind::Contact => (&["coupling"], &["coupling"]),
            PotentialKind::LocalRadialGaussian => (&["amplitude"], &["amplitude", "width", "angular_nodes"]),
            PotentialKind::LocalRadialTable => (&["file"], &["file", "angular_nodes"]),
        };
        let present = [
            ("amplitude", p.amplitude.is_some()),
            ("width", p.width.is_some()),
            ("coupling", p.coupling.is_some()),
            ("file", p.file.is_some()),
            ("angular_nodes", p.angular_nodes.is_some()),
        ];
        for (key, is_set) in present {
            if is_set && !allowed.contains(&key) {
                return Err(BdgError::config(format!("potential.{key}"), "not used by this potential kind"));
            }
            if !is_set && required.contains(&key) {
                return Err(BdgError::config(format!("potential.{key}"), "required by this potential kind"));
            }
        }
        if let Some(w) = p.width {
            finite_positive("potential.width", w)?;
        }
        if let Some(g) = p.coupling {
            finite_positive("potential.coupling", g)?;
        }
        if let Some(a) = p.amplitude {
            if !a.is_finite() {
                return Err(BdgError::config("potential.amplitude", "must be finite"));
            }
        }
        let one_d_only = p.kind == PotentialKind::Contact;
        match (self.dimension, one_d_only) {
            (Dimension::OneD, false) if p.kind != PotentialKind::SeparableGaussian && p.kind != PotentialKind::SeparableTable => {
                Err(BdgError::config("potential.kind", "local radial potentials need dimension = \"three-d-radial\""))
            }
            (Dimension::ThreeDRadial, true) => {
                Err(BdgError::config("potential.kind", "contact potential needs dimension = \"one-d\""))
            }
            _ => Ok(()),
        }
    }

    /// Canonical TOML text; parsing it gives back an equal configuration.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn psi0(&self) -> num_complex::Complex64 {
        let [re, im] = self.psi0.unwrap_or([1.0, 0.0]);
        num_complex::Complex64::new(re, im)
    }

    pub fn build_grid(&self) -> Result<MomentumGrid> {
        MomentumGrid::clustered(
            self.dimension,
            self.grid.n.unwrap_or(DEFAULT_N_3D),
            self.grid.k_max.unwrap_or(6.0 * self.mu.sqrt()),
            self.mu.sqrt(),
        )
    }

    /// Radial profile of the form factor or potential; table paths resolve against `base`.
    pub fn profile(&self, base: &Path) -> Result<Option<RadialFunction>> {
        let p = &self.potential;
        Ok(match p.kind {
            PotentialKind::SeparableGaussian | PotentialKind::LocalRadialGaussian => Some(RadialFunction::gaussian(
                p.amplitude.unwrap_or(0.0),
                p.width.unwrap_or(1.0),
            )),
            PotentialKind::SeparableTable | PotentialKind::LocalRadialTable => {
                let file = p.file.as_ref().expect("validated");
                let path = if file.is_absolute() { file.clone() } else { base.join(file) };
                let table = Table::read(&path).map_err(|e| match e {
                    BdgError::Io(io) => BdgError::config("potential.file", format!("{}: {io}", path.display())),
                    BdgError::Parse(m) => BdgError::config("potential.file", m),
                    other => other,
                })?;
                Some(RadialFunction::Table(table))
            }
            PotentialKind::Contact => None,
        })
    }

    pub fn build_potential(&self, grid: &MomentumGrid, base: &Path) -> Result<Potential> {
        let p = &self.potential;
        match p.kind {
            PotentialKind::Contact => Potential::contact_1d(grid, p.coupling.unwrap_or(0.0)),
            PotentialKind::SeparableGaussian | PotentialKind::SeparableTable => {
                Potential::separable(grid, self.profile(base)?.expect("separable profile"))
            }
            PotentialKind::LocalRadialGaussian | PotentialKind::LocalRadialTable => Potential::local_radial(
                grid,
                self.profile(base)?.expect("local profile"),
                p.angular_nodes.unwrap_or(DEFAULT_ANGULAR_NODES),
            ),
        }
    }

    /// Temperature of the run given the critical temperature.
    pub fn resolve_temperature(&self, t_c: f64) -> Result<f64> {
        let t = match (self.temperature.absolute, self.temperature.tau) {
            (Some(t), _) => t,
            (None, Some(tau)) => t_c + tau * self.h * self.h,
            (None, None) => t_c + self.h * self.h,
        };
        if !(t > 0.0) {
            return Err(BdgError::config("temperature", format!("resolved temperature {t} is not positive")));
        }
        Ok(t)
    }

    /// End time of an evolution at temperature `t` relative to `t_c`.
    pub fn resolve_t_end(&self, temperature: f64, t_c: f64) -> Result<f64> {
        match (self.evolve.t_end, self.evolve.horizon) {
            (Some(t), _) => Ok(t),
            (None, c) => {
                let off = (temperature - t_c).abs();
                if off == 0.0 {
                    return Err(BdgError::config("evolve.horizon", "T = T_c: give an explicit t_end"));
                }
                Ok(c.unwrap_or(DEFAULT_HORIZON) / off)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dimension = "three-d-radial"
mu = 1.0
h = 0.1

[potential]
kind = "separable-gaussian"
amplitude = 0.34
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid.n, Some(2048));
        assert_eq!(c.temperature.tau, Some(1.0));
        assert_eq!(c.evolve.step_factor, Some(0.1));
        assert_eq!(c.evolve.dt, None);
        assert_eq!(c.grid.k_max, Some(6.0));
        assert_eq!(c.initial_state, Some(InitialStateKind::PerturbedNormal));
    }

    #[test]
    fn tau_above_one_is_rejected() {
        let text = format!("{MINIMAL}\n[temperature]\ntau = 2.0\n");
        match parse_config(&text) {
            Err(BdgError::Config { key, message }) => {
                assert_eq!(key, "temperature.tau");
                assert!(message.contains("|T - T_c| <= h^2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = MINIMAL.replace("h = 0.1", "h = 0.1\nbogus = 3");
        match parse_config(&text) {
            Err(BdgError::Config { key, .. }) => assert_eq!(key, "bogus"),
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{MINIMAL}\n[grid]\nnodes = 12\n");
        assert!(matches!(parse_config(&text), Err(BdgError::Config { key, .. }) if key == "nodes"));
    }

    #[test]
    fn type_mismatch_is_reported() {
        let text = MINIMAL.replace("mu = 1.0", "mu = \"one\"");
        assert!(matches!(parse_config(&text), Err(BdgError::Config { .. })));
    }

    #[test]
    fn canonical_round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        let text = c.to_canonical();
        let again = parse_config(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn potential_keys_follow_kind() {
        let text = MINIMAL.replace("amplitude = 0.34", "amplitude = 0.34\ncoupling = 1.0");
        assert!(matches!(parse_config(&text), Err(BdgError::Config { key, .. }) if key == "potential.coupling"));
        let text = MINIMAL.replace("kind = \"separable-gaussian\"", "kind = \"contact\"");
        assert!(parse_config(&text).is_err());
    }
}
