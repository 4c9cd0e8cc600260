//! Python bindings for the resonance-control library.
//!
//! Exposes the main types and operations — synthetic system generation,
//! archives, binning, pulse realization, propagation, the control
//! eigenproblems, overlap diagnostics and field simplification — as the
//! `rescon_py` extension module.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rescon::control::{self, ControlKind, ControlSolution};
use rescon::diagnostics;
use rescon::dynamics::{self, build_me};
use rescon::pulse::{GaussianBasis, ShapedField, TimeHorizon, solve_d};
use rescon::simplify;
use rescon::system::{self, GeneratorParams, ResonanceSystem};

fn err(e: rescon::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// A coarse-grained resonance system: state energies/widths, the
/// state-resonance overlap matrix and the doorway dipoles.
#[pyclass(name = "System")]
struct PySystem {
    inner: ResonanceSystem,
    generator: Option<GeneratorParams>,
}

#[pymethods]
impl PySystem {
    /// Builds a synthetic system with Lorentzian line profiles and
    /// seed-deterministic overlap phases.
    #[staticmethod]
    #[pyo3(signature = (n_alpha, energy_window, widths, centers, dipole_magnitudes, seed))]
    fn generate(
        n_alpha: usize,
        energy_window: (f64, f64),
        widths: Vec<f64>,
        centers: Vec<f64>,
        dipole_magnitudes: Vec<f64>,
        seed: u64,
    ) -> PyResult<Self> {
        let params = GeneratorParams {
            n_alpha,
            energy_window,
            widths,
            centers,
            dipole_magnitudes,
            seed,
        };
        let inner = system::generate_from_params(&params).map_err(err)?;
        Ok(PySystem { inner, generator: Some(params) })
    }

    /// Loads a system archive (JSON) from disk.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| PyValueError::new_err(format!("cannot read {path}: {e}")))?;
        let (inner, generator) = system::load_archive(&bytes).map_err(err)?;
        Ok(PySystem { inner, generator })
    }

    /// Writes the system (plus generator parameters, if known) as a JSON
    /// archive.
    fn save(&self, path: &str) -> PyResult<()> {
        let bytes = system::save_archive(&self.inner, self.generator.as_ref());
        std::fs::write(path, bytes)
            .map_err(|e| PyRuntimeError::new_err(format!("cannot write {path}: {e}")))
    }

    #[getter]
    fn n_states(&self) -> usize {
        self.inner.n_states()
    }

    #[getter]
    fn n_resonances(&self) -> usize {
        self.inner.n_resonances()
    }

    /// Energy span [min, max] of the state grid (eV).
    #[getter]
    fn span(&self) -> (f64, f64) {
        self.inner.span()
    }

    #[getter]
    fn e_alpha(&self) -> Vec<f64> {
        self.inner.e_alpha.clone()
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar
    }

    /// Groups the states inside `window` into `n_a` contiguous energy bins.
    fn bin(&self, window: (f64, f64), n_a: usize) -> PyResult<PyBinned> {
        let inner = system::bin_system(&self.inner, window, n_a).map_err(err)?;
        Ok(PyBinned { inner })
    }

    /// Resonance overlap matrix Ω restricted to `window`, as nested lists.
    fn overlap_matrix(&self, window: (f64, f64)) -> PyResult<Vec<Vec<f64>>> {
        let om = diagnostics::overlap_matrix(&self.inner, window).map_err(err)?;
        Ok((0..om.nrows())
            .map(|i| (0..om.ncols()).map(|j| om[(i, j)]).collect())
            .collect())
    }

    /// Per-window overlap/kernel measures and relative-control extents.
    fn correlation_report(
        &self,
        windows: Vec<(f64, f64)>,
        t1: f64,
        t2: f64,
        n_a: usize,
    ) -> PyResult<Vec<PyMeasureReport>> {
        let rows =
            diagnostics::correlation_report(&self.inner, &windows, t1, t2, n_a, Default::default())
                .map_err(err)?;
        Ok(rows.into_iter().map(|r| PyMeasureReport { inner: r }).collect())
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.inner.span();
        format!(
            "System(n_states={}, n_resonances={}, span=({lo}, {hi}))",
            self.inner.n_states(),
            self.inner.n_resonances()
        )
    }
}

/// A system reduced to N_A energy bins over a window; the arena for pulse
/// propagation and the control eigenproblems.
#[pyclass(name = "BinnedSystem")]
struct PyBinned {
    inner: system::BinnedSystem,
}

#[pymethods]
impl PyBinned {
    #[getter]
    fn n_bins(&self) -> usize {
        self.inner.n_bins()
    }

    #[getter]
    fn n_resonances(&self) -> usize {
        self.inner.n_resonances()
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        self.inner.window()
    }

    /// Bin-center energies (eV).
    #[getter]
    fn e_a(&self) -> Vec<f64> {
        self.inner.e_a.clone()
    }

    /// Bin-center angular frequencies relative to the ground state (rad/fs).
    #[getter]
    fn omega_grid(&self) -> Vec<f64> {
        self.inner.omega_grid()
    }

    /// Eigen-solutions of K(t2)x = λK(t1)x: every λ is an achievable
    /// population ratio P(t2)/P(t1), returned ascending.
    fn relative_control(&self, t1: f64, t2: f64) -> PyResult<Vec<PySolution>> {
        let sols = control::relative_control(&self.inner, t1, t2).map_err(err)?;
        Ok(sols.into_iter().map(|inner| PySolution { inner }).collect())
    }

    /// Spectrum of K(t) under the pulse-energy constraint E0: the extreme
    /// eigenvectors minimize/maximize the surviving population at t.
    fn absolute_control(&self, t: f64, e0: f64) -> PyResult<Vec<PySolution>> {
        let kern = build_me(&self.inner, t);
        let sols = control::absolute_control(&kern, e0).map_err(err)?;
        Ok(sols.into_iter().map(|inner| PySolution { inner }).collect())
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.inner.window();
        format!(
            "BinnedSystem(n_bins={}, n_resonances={}, window=({lo}, {hi}))",
            self.inner.n_bins(),
            self.inner.n_resonances()
        )
    }
}

/// One solution of a control eigenproblem: the eigenvalue and the unit-norm
/// spectral field vector over the bins that attains it.
#[pyclass(name = "ControlSolution")]
struct PySolution {
    inner: ControlSolution,
}

#[pymethods]
impl PySolution {
    /// The eigenvalue: a population ratio P(t2)/P(t1) for relative
    /// solutions, a population (up to the energy constant) for absolute ones.
    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    /// Unit-norm spectral amplitudes over the bins, phase-fixed.
    #[getter]
    fn field_vector(&self) -> Vec<C64> {
        self.inner.field_vector.iter().copied().collect()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            ControlKind::Absolute => "absolute",
            ControlKind::Relative => "relative",
        }
    }

    #[getter]
    fn t1(&self) -> f64 {
        self.inner.t1
    }

    #[getter]
    fn t2(&self) -> f64 {
        self.inner.t2
    }

    /// Condition estimate of (the retained spectrum of) K(t1).
    #[getter]
    fn cond_k_t1(&self) -> f64 {
        self.inner.cond_k_t1
    }

    /// Pulse-energy constant E0 (absolute scheme only).
    #[getter]
    fn e0(&self) -> Option<f64> {
        self.inner.e0
    }

    /// Field vector scaled to the energy constraint, √(2πE0)·ε̂.
    fn energy_scaled_field(&self) -> Vec<C64> {
        self.inner.energy_scaled_field().iter().copied().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "ControlSolution(kind={:?}, lam={:.6e}, t1={}, t2={})",
            self.kind(),
            self.inner.lambda,
            self.inner.t1,
            self.inner.t2
        )
    }
}

/// A target spectrum realized over a Gaussian pulse basis; the spectral
/// values at the bin frequencies equal the target exactly.
#[pyclass(name = "Field")]
struct PyField {
    inner: ShapedField,
}

#[pymethods]
impl PyField {
    /// Number of Gaussian pulses in the basis.
    #[getter]
    fn n_pulses(&self) -> usize {
        self.inner.basis.len()
    }

    /// Time (fs) after which every basis pulse has effectively ended.
    #[getter]
    fn t_over(&self) -> f64 {
        self.inner.t_over()
    }

    /// Complex basis coefficients d_a.
    #[getter]
    fn coefficients(&self) -> Vec<C64> {
        self.inner.d.iter().copied().collect()
    }

    /// Spectral amplitudes at the grid frequencies; the fully developed
    /// spectrum when `t` is omitted, the accumulated spectrum up to `t`
    /// otherwise.
    #[pyo3(signature = (t=None))]
    fn spectral_values(&self, t: Option<f64>) -> Vec<C64> {
        let horizon = match t {
            Some(t) => TimeHorizon::Finite(t),
            None => TimeHorizon::Infinite,
        };
        self.inner.spectral_values(horizon).iter().copied().collect()
    }

    /// Time-domain pulse value ε_p(t).
    fn time_value(&self, t: f64) -> C64 {
        self.inner.time_value(t)
    }

    /// Surviving upper-state population P(t) under this field.
    fn population(&self, binned: &PyBinned, t: f64) -> PyResult<f64> {
        dynamics::population(&self.inner, &binned.inner, t).map_err(err)
    }

    /// Replaces groups of bin amplitudes with their per-group averages
    /// (arithmetic amplitude, circular phase) over `n_s` super-bins.
    fn local_average(&self, n_s: usize) -> PyResult<PyField> {
        Ok(PyField { inner: simplify::local_average(&self.inner, n_s).map_err(err)? })
    }

    /// Re-expands a locally averaged field over `n_s` broad pulses, one per
    /// super-bin.
    fn smooth_expand(&self, n_s: usize) -> PyResult<PyField> {
        Ok(PyField { inner: simplify::smooth_expand(&self.inner, n_s).map_err(err)? })
    }

    /// Keeps only the `n_r` largest spectral amplitudes, zeroing the rest.
    fn truncate_amplitudes(&self, n_r: usize) -> PyResult<PyField> {
        Ok(PyField { inner: simplify::truncate_amplitudes(&self.inner, n_r).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(n_pulses={}, n_grid={}, t_over={:.3})",
            self.inner.basis.len(),
            self.inner.omega_grid.len(),
            self.inner.t_over()
        )
    }
}

/// Overlap/kernel measures and the control extent for one window.
#[pyclass(name = "MeasureReport")]
struct PyMeasureReport {
    inner: diagnostics::MeasureReport,
}

#[pymethods]
impl PyMeasureReport {
    #[getter]
    fn window(&self) -> (f64, f64) {
        self.inner.window
    }
    #[getter]
    fn h_omega(&self) -> f64 {
        self.inner.h_omega
    }
    #[getter]
    fn h_k_t1(&self) -> f64 {
        self.inner.h_k_t1
    }
    #[getter]
    fn h_k_t2(&self) -> f64 {
        self.inner.h_k_t2
    }
    #[getter]
    fn h_r_r(&self) -> f64 {
        self.inner.h_r_r
    }
    #[getter]
    fn abs_h_c_r(&self) -> f64 {
        self.inner.abs_h_c_r
    }
    #[getter]
    fn lambda_min(&self) -> f64 {
        self.inner.lambda_min
    }
    #[getter]
    fn lambda_max(&self) -> f64 {
        self.inner.lambda_max
    }
    #[getter]
    fn n_a(&self) -> usize {
        self.inner.n_a
    }

    fn __repr__(&self) -> String {
        format!(
            "MeasureReport(window={:?}, h_omega={:.4}, lambda_min={:.4e}, lambda_max={:.4e})",
            self.inner.window, self.inner.h_omega, self.inner.lambda_min, self.inner.lambda_max
        )
    }
}

/// One row of an amplitude-retention sweep.
#[pyclass(name = "RetentionRow")]
struct PyRetentionRow {
    inner: simplify::RetentionRow,
}

#[pymethods]
impl PyRetentionRow {
    #[getter]
    fn n_r(&self) -> usize {
        self.inner.n_r
    }
    #[getter]
    fn achieved_min(&self) -> f64 {
        self.inner.achieved_min
    }
    #[getter]
    fn achieved_max(&self) -> f64 {
        self.inner.achieved_max
    }
    #[getter]
    fn fresh_min(&self) -> f64 {
        self.inner.fresh_min
    }
    #[getter]
    fn fresh_max(&self) -> f64 {
        self.inner.fresh_max
    }

    fn __repr__(&self) -> String {
        format!(
            "RetentionRow(n_r={}, achieved=({:.4e}, {:.4e}), fresh=({:.4e}, {:.4e}))",
            self.inner.n_r,
            self.inner.achieved_min,
            self.inner.achieved_max,
            self.inner.fresh_min,
            self.inner.fresh_max
        )
    }
}

/// Realizes a target spectrum (one complex amplitude per bin) as a shaped
/// pulse over a covering Gaussian basis of per-pulse width `alpha_a` (fs).
#[pyfunction]
#[pyo3(signature = (binned, target, alpha_a, eps_a=1.0))]
fn realize(binned: &PyBinned, target: Vec<C64>, alpha_a: f64, eps_a: f64) -> PyResult<PyField> {
    let grid = binned.inner.omega_grid();
    if target.len() != grid.len() {
        return Err(PyValueError::new_err(format!(
            "target has {} amplitudes for {} bins",
            target.len(),
            grid.len()
        )));
    }
    let basis = GaussianBasis::covering(&grid, eps_a, alpha_a).map_err(err)?;
    let field = solve_d(&basis, &grid, &DVector::from_vec(target)).map_err(err)?;
    Ok(PyField { inner: field })
}

/// Truncates the two extremal fields to each retained-amplitude count in
/// `n_r_values` and compares the surviving ratios against fresh solves at
/// the reduced resolution.
#[pyfunction]
fn retention_sweep(
    binned: &PyBinned,
    field_min: &PyField,
    field_max: &PyField,
    n_r_values: Vec<usize>,
    t1: f64,
    t2: f64,
) -> PyResult<Vec<PyRetentionRow>> {
    let rows = simplify::retention_sweep(
        &binned.inner,
        &field_min.inner,
        &field_max.inner,
        &n_r_values,
        t1,
        t2,
    )
    .map_err(err)?;
    Ok(rows.into_iter().map(|inner| PyRetentionRow { inner }).collect())
}

#[pymodule]
fn rescon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HBAR_EV_FS", rescon::HBAR_EV_FS)?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyBinned>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyMeasureReport>()?;
    m.add_class::<PyRetentionRow>()?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(retention_sweep, m)?)?;
    Ok(())
}
