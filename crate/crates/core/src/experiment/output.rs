//! CSV time series, JSON summaries and state snapshots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::dynamics::Observer;
use crate::error::{BdgError, Result};
use crate::grid::{Dimension, MomentumGrid};
use crate::model::DeltaField;
use crate::state::BdGState;

use super::fit::FitResult;

/// 17 significant digits, '.' decimal separator, independent of locale.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a header row and data rows.
pub fn csv_text<R: AsRef<[f64]>>(columns: &[&str], rows: &[R]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| format_value(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<R: AsRef<[f64]>>(path: &Path, columns: &[&str], rows: &[R]) -> Result<()> {
    write_text(path, &csv_text(columns, rows))
}

/// Parses a CSV written by [`write_csv`] into its header and rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| BdgError::Parse(format!("{}: empty CSV", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let rows = lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|e| BdgError::Parse(format!("{} line {}: {e}", path.display(), i + 2)))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// JSON record of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub command: String,
    pub config_hash: String,
    pub t_c: Option<f64>,
    pub temperature: Option<f64>,
    pub h: f64,
    pub lambda_re: Option<f64>,
    pub lambda_im: Option<f64>,
    /// `sup_t ||psi_t|^2 - |psi_0|^2|` over the observations.
    pub max_abs_psi_sq_deviation: Option<f64>,
    pub fitted_decay_rate: Option<FitResult>,
    pub scaling_exponents: Vec<NamedFit>,
    /// Largest `|pressure_drift|` over the observations.
    pub pressure_drift: Option<f64>,
    pub s_drift: Option<f64>,
    pub eq10_residual: Option<f64>,
    pub min_admissibility_margin: Option<f64>,
    pub invariants_passed: bool,
    pub violations: Vec<String>,
    pub wall_time_s: f64,
    /// Command-specific scalars, in insertion order.
    pub extra: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: FitResult,
}

impl RunSummary {
    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn push_extra(&mut self, key: &str, value: f64) {
        self.extra.push((key.to_string(), value));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

pub const SNAPSHOT_MAGIC: &str = "# bdg-snapshot v1";

/// Decoded snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub config_hash: String,
    pub t: f64,
    pub grid: MomentumGrid,
    pub state: BdGState,
}

/// Text container: magic line, `[provenance]`, `[grid]` with one `k weight` pair per
/// line, `[state]` with one `gamma re_alpha im_alpha` triple per line.
pub fn snapshot_text(config_hash: &str, t: f64, grid: &MomentumGrid, state: &BdGState) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{SNAPSHOT_MAGIC}");
    let _ = writeln!(s, "[provenance]");
    let _ = writeln!(s, "config_sha256 = {config_hash}");
    let _ = writeln!(s, "t = {}", format_value(t));
    let _ = writeln!(s, "[grid]");
    let _ = writeln!(s, "dimension = {}", grid.dimension().as_str());
    let _ = writeln!(s, "k_max = {}", format_value(grid.k_max()));
    let _ = writeln!(s, "n = {}", grid.len());
    for (k, w) in grid.nodes().iter().zip(grid.weights()) {
        let _ = writeln!(s, "{} {}", format_value(*k), format_value(*w));
    }
    let _ = writeln!(s, "[state]");
    for (g, a) in state.gamma.iter().zip(&state.alpha) {
        let _ = writeln!(s, "{} {} {}", format_value(*g), format_value(a.re), format_value(a.im));
    }
    s
}

pub fn write_snapshot(path: &Path, config_hash: &str, t: f64, grid: &MomentumGrid, state: &BdGState) -> Result<()> {
    write_text(path, &snapshot_text(config_hash, t, grid, state))
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let bad = |m: &str| BdgError::Parse(format!("snapshot: {m}"));
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(SNAPSHOT_MAGIC) {
        return Err(bad("missing version line"));
    }
    let mut section = "";
    let (mut hash, mut t, mut dim, mut k_max, mut n) = (None, None, None, None, None);
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    let (mut gamma, mut alpha) = (Vec::new(), Vec::new());
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(&format!("{s}: {e}")));
    for line in lines {
        if line.starts_with('[') {
            section = line;
            continue;
        }
        if let Some((key, value)) = line.split_once(" = ") {
            match (section, key) {
                ("[provenance]", "config_sha256") => hash = Some(value.to_string()),
                ("[provenance]", "t") => t = Some(num(value)?),
                ("[grid]", "dimension") => dim = Dimension::parse(value),
                ("[grid]", "k_max") => k_max = Some(num(value)?),
                ("[grid]", "n") => n = Some(value.parse::<usize>().map_err(|e| bad(&e.to_string()))?),
                _ => return Err(bad(&format!("unexpected key {key} in {section}"))),
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        match (section, cols.len()) {
            ("[grid]", 2) => {
                nodes.push(num(cols[0])?);
                weights.push(num(cols[1])?);
            }
            ("[state]", 3) => {
                gamma.push(num(cols[0])?);
                alpha.push(Complex64::new(num(cols[1])?, num(cols[2])?));
            }
            _ => return Err(bad(&format!("malformed line in {section}: {line}"))),
        }
    }
    let n = n.ok_or_else(|| bad("missing n"))?;
    if nodes.len() != n || gamma.len() != n {
        return Err(bad(&format!("expected {n} rows, found {} grid and {} state", nodes.len(), gamma.len())));
    }
    let grid = MomentumGrid::from_parts(
        dim.ok_or_else(|| bad("missing dimension"))?,
        nodes,
        weights,
        k_max.ok_or_else(|| bad("missing k_max"))?,
    )?;
    Ok(Snapshot {
        config_hash: hash.ok_or_else(|| bad("missing config hash"))?,
        t: t.ok_or_else(|| bad("missing t"))?,
        grid,
        state: BdGState::new(gamma, alpha)?,
    })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    parse_snapshot(&std::fs::read_to_string(path)?)
}

/// Observer writing a snapshot at the first observation at or after each requested time.
pub struct SnapshotWriter<'a> {
    dir: PathBuf,
    config_hash: String,
    grid: &'a MomentumGrid,
    pending: Vec<f64>,
    pub written: Vec<PathBuf>,
}

impl<'a> SnapshotWriter<'a> {
    pub fn new(dir: &Path, config_hash: &str, grid: &'a MomentumGrid, times: &[f64]) -> Self {
        let mut pending = times.to_vec();
        pending.sort_by(|a, b| b.total_cmp(a));
        SnapshotWriter {
            dir: dir.to_path_buf(),
            config_hash: config_hash.to_string(),
            grid,
            pending,
            written: Vec::new(),
        }
    }
}

impl Observer for SnapshotWriter<'_> {
    fn observe(&mut self, t: f64, state: &BdGState, _delta: &DeltaField) -> Result<()> {
        let mut due = false;
        while self.pending.last().is_some_and(|next| *next <= t) {
            self.pending.pop();
            due = true;
        }
        if due {
            let path = self.dir.join(format!("snapshot_{:04}.txt", self.written.len()));
            write_snapshot(&path, &self.config_hash, t, self.grid, state)?;
            self.written.push(path);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::normal_state;

    #[test]
    fn values_have_seventeen_significant_digits() {
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(-2.5), "-2.5000000000000000e0");
        for v in [0.1, 1.0 / 3.0, -7.123456789e-300, 6.02e23] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let g = MomentumGrid::clustered(Dimension::ThreeDRadial, 64, 6.0, 1.0).unwrap();
        let mut s = normal_state(0.2, 1.0, &g).unwrap();
        s.alpha[3] = Complex64::new(0.01, -0.02);
        let text = snapshot_text("abc123", 2.5, &g, &s);
        let back = parse_snapshot(&text).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.state, s);
        assert_eq!(back.t, 2.5);
        assert_eq!(back.config_hash, "abc123");
        assert!(parse_snapshot(&text.replace("v1", "v9")).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.csv");
        write_csv(&p, &["x", "y"], &[[1.0, 0.1], [2.0, -1e-300]]).unwrap();
        let (h, rows) = read_csv(&p).unwrap();
        assert_eq!(h, vec!["x", "y"]);
        assert_eq!(rows[1], vec![2.0, -1e-300]);
    }
}
