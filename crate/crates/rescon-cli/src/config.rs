//! Scenario configuration: one JSON document drives a whole run. Physical
//! quantities carry their units in the field names (eV / fs).

use serde::{Deserialize, Serialize};

use rescon::pulse::T_OVER_FACTOR;
use rescon::system::GeneratorParams;

use crate::error::{CliError, CliResult};

/// Where the material system comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SystemSource {
    Generator(GeneratorParams),
    ArchivePath(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min_fs: f64,
    pub t_max_fs: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn values(&self) -> Vec<f64> {
        let dt = (self.t_max_fs - self.t_min_fs) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.t_min_fs + i as f64 * dt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Uncontrolled,
    Optimize,
    Diagnose,
    Simplify,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemSource,
    /// Excitation window (E_L, E_H) in eV.
    pub window_ev: (f64, f64),
    pub n_a: usize,
    pub t1_fs: f64,
    pub t2_fs: f64,
    /// Width of every basis pulse.
    pub alpha_a_fs: f64,
    #[serde(default = "default_eps")]
    pub eps_a: f64,
    /// Center energy (eV) of the single drive pulse in uncontrolled runs.
    #[serde(default)]
    pub pulse_center_ev: Option<f64>,
    pub time_grid_fs: TimeGrid,
    pub mode: Mode,
    /// Applied to the max-ratio population trace for joint plotting.
    #[serde(default)]
    pub scaling_factor: Option<f64>,
    /// Super-bin count for the averaging/smoothing simplification.
    #[serde(default)]
    pub n_s: Option<usize>,
    /// Retained-amplitude counts for the truncation sweep.
    #[serde(default)]
    pub n_r_values: Option<Vec<usize>>,
    /// Windows for the diagnose report; defaults to `window_ev` alone.
    #[serde(default)]
    pub windows_ev: Option<Vec<(f64, f64)>>,
}

fn default_eps() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn t_over_fs(&self) -> f64 {
        T_OVER_FACTOR * self.alpha_a_fs
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if !(self.window_ev.1 > self.window_ev.0) {
            return bad(format!(
                "window_ev: upper edge {} must exceed lower edge {}",
                self.window_ev.1, self.window_ev.0
            ));
        }
        if self.n_a == 0 {
            return bad("n_a: must be at least 1".into());
        }
        if !(self.t2_fs > self.t1_fs) || !(self.t1_fs > 0.0) {
            return bad(format!(
                "t1_fs/t2_fs: need 0 < T1 < T2, got {} and {}",
                self.t1_fs, self.t2_fs
            ));
        }
        if !(self.alpha_a_fs > 0.0) || !self.alpha_a_fs.is_finite() {
            return bad(format!("alpha_a_fs: must be positive, got {}", self.alpha_a_fs));
        }
        if !(self.eps_a >= 0.0) || !self.eps_a.is_finite() {
            return bad(format!("eps_a: must be a finite nonnegative amplitude, got {}", self.eps_a));
        }
        let grid = &self.time_grid_fs;
        if grid.steps < 2 {
            return bad(format!("time_grid_fs.steps: need at least 2, got {}", grid.steps));
        }
        if grid.t_min_fs > -self.t_over_fs() || grid.t_max_fs < self.t2_fs {
            return bad(format!(
                "time_grid_fs: grid [{}, {}] must cover [-t_over, T2] = [{}, {}]",
                grid.t_min_fs,
                grid.t_max_fs,
                -self.t_over_fs(),
                self.t2_fs
            ));
        }
        if self.mode == Mode::Optimize || self.mode == Mode::Simplify {
            if self.n_a < 2 {
                return bad("n_a: optimization needs at least 2 bins (no phase degrees of freedom otherwise)".into());
            }
        }
        if self.mode == Mode::Uncontrolled && self.pulse_center_ev.is_none() {
            return bad("pulse_center_ev: required in uncontrolled mode".into());
        }
        if let Some(n_s) = self.n_s {
            if n_s == 0 || self.n_a % n_s != 0 {
                return bad(format!("n_s: {n_s} must divide n_a = {}", self.n_a));
            }
        }
        if let Some(values) = &self.n_r_values {
            for &n_r in values {
                if n_r == 0 || n_r > self.n_a {
                    return bad(format!("n_r_values: {n_r} outside 1..={}", self.n_a));
                }
            }
        }
        Ok(())
    }
}

pub fn load_config(path: &std::path::Path) -> CliResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}
