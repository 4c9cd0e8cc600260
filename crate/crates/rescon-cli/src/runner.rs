//! Scenario execution: loads or generates a system, runs the requested
//! pipeline and persists CSV outputs plus a reproducibility manifest.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;

use rescon::control::{ControlSolution, relative_control};
use rescon::diagnostics::correlation_report;
use rescon::dynamics::{excited_norm, population};
use rescon::pulse::{GaussianBasis, GaussianPulse, ShapedField, solve_d};
use rescon::simplify::{local_average, retention_sweep, smooth_expand};
use rescon::system::{
    BinnedSystem, GeneratorParams, ResonanceSystem, bin_system, generate_from_params,
    load_archive, save_archive,
};

use crate::config::{Mode, ScenarioConfig, SystemSource};
use crate::error::{CliError, CliResult};

pub struct Run {
    pub cfg: ScenarioConfig,
    pub out: PathBuf,
    pub subcommand: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    package: &'a str,
    version: &'a str,
    subcommand: &'a str,
    effective_seed: Option<u64>,
    config: &'a ScenarioConfig,
}

impl Run {
    pub fn execute(&self) -> CliResult<()> {
        self.cfg.validate()?;
        fs::create_dir_all(&self.out)?;
        match self.cfg.mode {
            Mode::Uncontrolled => self.run_uncontrolled(),
            Mode::Optimize => self.run_optimize().map(|_| ()),
            Mode::Diagnose => self.run_diagnose(),
            Mode::Simplify => self.run_simplify(),
        }?;
        self.write_manifest()
    }

    pub fn run_generate(&self) -> CliResult<()> {
        self.cfg.validate()?;
        fs::create_dir_all(&self.out)?;
        let (sys, params) = self.load_system()?;
        fs::write(self.out.join("system.json"), save_archive(&sys, params.as_ref()))?;
        self.write_manifest()
    }

    fn load_system(&self) -> CliResult<(ResonanceSystem, Option<GeneratorParams>)> {
        match &self.cfg.system {
            SystemSource::Generator(p) => Ok((generate_from_params(p)?, Some(p.clone()))),
            SystemSource::ArchivePath(path) => {
                let bytes = fs::read(path).map_err(|e| {
                    CliError::Validation(format!("cannot read archive {path}: {e}"))
                })?;
                Ok(load_archive(&bytes)?)
            }
        }
    }

    fn binned(&self) -> CliResult<BinnedSystem> {
        let (sys, _) = self.load_system()?;
        Ok(bin_system(&sys, self.cfg.window_ev, self.cfg.n_a)?)
    }

    fn effective_seed(&self) -> Option<u64> {
        match &self.cfg.system {
            SystemSource::Generator(p) => Some(p.seed),
            SystemSource::ArchivePath(_) => None,
        }
    }

    fn write_manifest(&self) -> CliResult<()> {
        let manifest = Manifest {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: &self.subcommand,
            effective_seed: self.effective_seed(),
            config: &self.cfg,
        };
        let mut text = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::Validation(format!("manifest serialization: {e}")))?;
        text.push(b'\n');
        fs::write(self.out.join("manifest.json"), text)?;
        Ok(())
    }

    fn write_csv(&self, name: &str, header: &str, rows: &[Vec<f64>]) -> CliResult<()> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        fs::write(self.out.join(name), text)?;
        Ok(())
    }

    /// Single-Gaussian drive: P_S2(t), the S1 remainder and the pulse
    /// envelope over the configured time grid.
    fn run_uncontrolled(&self) -> CliResult<()> {
        let binned = self.binned()?;
        let grid = binned.omega_grid();
        let center_ev = self.cfg.pulse_center_ev.expect("validated");
        let omega_p = (center_ev - binned.parent.e_g) / binned.parent.hbar;
        // unit-amplitude pulse with the configured amplitude in the
        // coefficient, so a zero-amplitude drive is representable
        let pulse = GaussianPulse::new(1.0, self.cfg.alpha_a_fs, omega_p)?;
        let field = ShapedField {
            basis: GaussianBasis::new(vec![pulse])?,
            d: DVector::from_element(1, C64::new(self.cfg.eps_a, 0.0)),
            omega_grid: grid,
        };
        let mut rows = Vec::new();
        for t in self.cfg.time_grid_fs.values() {
            let p2 = population(&field, &binned, t)?;
            let total = excited_norm(&field, &binned, t)?;
            rows.push(vec![t, p2, total - p2, field.time_value(t).norm()]);
        }
        self.write_csv("population.csv", "t_fs,p_s2,p_s1_remainder,field_abs", &rows)
    }

    fn realize(&self, binned: &BinnedSystem, sol: &ControlSolution) -> CliResult<ShapedField> {
        let grid = binned.omega_grid();
        let basis = GaussianBasis::covering(&grid, self.cfg.eps_a, self.cfg.alpha_a_fs)?;
        Ok(solve_d(&basis, &grid, &sol.field_vector)?)
    }

    fn ratio(&self, field: &ShapedField, binned: &BinnedSystem) -> CliResult<f64> {
        let p1 = population(field, binned, self.cfg.t1_fs)?;
        if p1 <= 0.0 {
            return Err(CliError::Numerical(
                "field leaves no population at T1; ratio undefined".into(),
            ));
        }
        Ok(population(field, binned, self.cfg.t2_fs)? / p1)
    }

    /// Full optimization pipeline; verifies each realized field reproduces
    /// its eigenvalue before anything is written.
    fn run_optimize(&self) -> CliResult<(BinnedSystem, Vec<ControlSolution>, ShapedField, ShapedField)> {
        let binned = self.binned()?;
        let sols = relative_control(&binned, self.cfg.t1_fs, self.cfg.t2_fs)?;
        let mut fields = Vec::with_capacity(sols.len());
        for sol in &sols {
            let field = self.realize(&binned, sol)?;
            let achieved = self.ratio(&field, &binned)?;
            let rel = (achieved - sol.lambda).abs() / sol.lambda.abs().max(f64::MIN_POSITIVE);
            if rel > 1e-6 {
                return Err(CliError::Numerical(format!(
                    "realized field achieves ratio {achieved} but the eigenvalue is {} \
                     (relative error {rel:.3e})",
                    sol.lambda
                )));
            }
            fields.push((field, achieved));
        }

        let sol_rows: Vec<Vec<f64>> = sols
            .iter()
            .zip(&fields)
            .enumerate()
            .map(|(i, (s, (_, achieved)))| vec![i as f64, s.lambda, *achieved, s.cond_k_t1])
            .collect();
        self.write_csv(
            "solutions.csv",
            "index,lambda,achieved_ratio,cond_k_t1",
            &sol_rows,
        )?;

        let (f_min, _) = fields.first().expect("at least one solution").clone();
        let (f_max, _) = fields.last().expect("at least one solution").clone();
        let v_min = &sols.first().unwrap().field_vector;
        let v_max = &sols.last().unwrap().field_vector;
        let field_rows: Vec<Vec<f64>> = (0..binned.n_bins())
            .map(|a| {
                vec![
                    a as f64,
                    binned.e_a[a],
                    v_min[a].norm(),
                    v_min[a].arg(),
                    v_max[a].norm(),
                    v_max[a].arg(),
                ]
            })
            .collect();
        self.write_csv(
            "fields.csv",
            "bin,e_a_ev,min_amplitude,min_phase,max_amplitude,max_phase",
            &field_rows,
        )?;

        let scale = self.cfg.scaling_factor.unwrap_or(1.0);
        let mut pop_rows = Vec::new();
        for t in self.cfg.time_grid_fs.values() {
            let p_min = population(&f_min, &binned, t)?;
            let p_max = population(&f_max, &binned, t)?;
            pop_rows.push(vec![t, p_min, scale * p_max]);
        }
        self.write_csv("population.csv", "t_fs,p_s2_min,p_s2_max_scaled", &pop_rows)?;
        Ok((binned, sols, f_min, f_max))
    }

    /// Overlap/kernel measures and control extents per window.
    fn run_diagnose(&self) -> CliResult<()> {
        let (sys, _) = self.load_system()?;
        let windows = self
            .cfg
            .windows_ev
            .clone()
            .unwrap_or_else(|| vec![self.cfg.window_ev]);
        let reports = correlation_report(
            &sys,
            &windows,
            self.cfg.t1_fs,
            self.cfg.t2_fs,
            self.cfg.n_a,
            Default::default(),
        )?;
        let rows: Vec<Vec<f64>> = reports
            .iter()
            .map(|r| {
                vec![
                    r.window.0,
                    r.window.1,
                    r.h_omega,
                    r.h_k_t1,
                    r.h_k_t2,
                    r.h_r_r,
                    r.abs_h_c_r,
                    r.lambda_min,
                    r.lambda_max,
                ]
            })
            .collect();
        self.write_csv(
            "report.csv",
            "window_lo_ev,window_hi_ev,h_omega,h_k_t1,h_k_t2,h_r_r,abs_h_c_r,lambda_min,lambda_max",
            &rows,
        )
    }

    /// Optimize, then measure what the simplified fields retain.
    fn run_simplify(&self) -> CliResult<()> {
        let (binned, sols, f_min, f_max) = self.run_optimize()?;
        let n_a = binned.n_bins();
        let n_s = self.cfg.n_s.unwrap_or_else(|| (n_a / 2).max(1));

        let avg_min = local_average(&f_min, n_s)?;
        let avg_max = local_average(&f_max, n_s)?;
        let smooth_min = smooth_expand(&avg_min, n_s)?;
        let smooth_max = smooth_expand(&avg_max, n_s)?;

        let span = sols.last().unwrap().lambda / sols.first().unwrap().lambda;
        let span_avg = self.ratio(&avg_max, &binned)? / self.ratio(&avg_min, &binned)?;
        let span_smooth = self.ratio(&smooth_max, &binned)? / self.ratio(&smooth_min, &binned)?;
        self.write_csv(
            "spans.csv",
            "n_s,span_optimized,span_averaged,span_smoothed",
            &[vec![n_s as f64, span, span_avg, span_smooth]],
        )?;

        let n_r_values = self
            .cfg
            .n_r_values
            .clone()
            .unwrap_or_else(|| (2..=n_a).rev().collect());
        let rows = retention_sweep(
            &binned,
            &f_min,
            &f_max,
            &n_r_values,
            self.cfg.t1_fs,
            self.cfg.t2_fs,
        )?;
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.n_r as f64,
                    r.achieved_min,
                    r.achieved_max,
                    r.fresh_min,
                    r.fresh_max,
                ]
            })
            .collect();
        self.write_csv(
            "retention.csv",
            "n_r,achieved_min_ratio,achieved_max_ratio,fresh_solve_min,fresh_solve_max",
            &table,
        )
    }
}

/// Applies command-line overrides to a loaded config document.
pub fn apply_overrides(cfg: &mut ScenarioConfig, mode: Option<Mode>, seed: Option<u64>) {
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    if let Some(seed) = seed {
        if let SystemSource::Generator(p) = &mut cfg.system {
            p.seed = seed;
        }
    }
}

/// Convenience used by `main`: run a subcommand against a config file.
pub fn run_subcommand(
    subcommand: &str,
    config_path: &Path,
    out: PathBuf,
    seed: Option<u64>,
) -> CliResult<()> {
    let mut cfg = crate::config::load_config(config_path)?;
    let mode = match subcommand {
        "generate" => None,
        "propagate" => Some(Mode::Uncontrolled),
        "optimize" => Some(Mode::Optimize),
        "diagnose" => Some(Mode::Diagnose),
        "simplify" => Some(Mode::Simplify),
        other => {
            return Err(CliError::Validation(format!("unknown subcommand {other}")));
        }
    };
    apply_overrides(&mut cfg, mode, seed);
    let run = Run {
        cfg,
        out,
        subcommand: subcommand.to_string(),
    };
    if subcommand == "generate" {
        run.run_generate()
    } else {
        run.execute()
    }
}
