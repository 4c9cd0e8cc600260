//! Field-simplification experiments: local averaging of spectral amplitudes,
//! Gaussian re-smoothing on a coarse basis, and largest-amplitude truncation,
//! each paired with a measurement of how much control the simplified field
//! retains.

use nalgebra::DVector;

use crate::control::relative_control;
use crate::dynamics::population;
use crate::error::{Error, Result};
use crate::pulse::{GaussianBasis, GaussianPulse, ShapedField, TimeHorizon, solve_d};
use crate::system::{BinnedSystem, bin_system};
use crate::{C64, CVector};

/// Per-super-bin amplitude and phase summaries of the field's spectral
/// values: arithmetic mean of amplitudes, circular mean of phases (arg of
/// the mean unit phasor, immune to the ±π seam).
fn super_bin_values(values: &CVector, n_s: usize) -> Vec<C64> {
    let g = values.len() / n_s;
    (0..n_s)
        .map(|s| {
            let members = values.as_slice()[s * g..(s + 1) * g].iter();
            let mut amp = 0.0;
            let mut phasor = C64::new(0.0, 0.0);
            for v in members {
                amp += v.norm();
                if v.norm() > 0.0 {
                    phasor += v / v.norm();
                }
            }
            amp /= g as f64;
            let phase = if phasor.norm() > 0.0 { phasor.arg() } else { 0.0 };
            C64::from_polar(amp, phase)
        })
        .collect()
}

fn check_divisor(n_a: usize, n_s: usize) -> Result<usize> {
    if n_s == 0 || n_a % n_s != 0 {
        return Err(Error::invalid(format!(
            "super-bin count {n_s} must divide the bin count {n_a}"
        )));
    }
    Ok(n_a / n_s)
}

/// Replaces the field's spectral values by step-wise constants over n_s
/// super-bins (amplitudes and phases averaged separately), then re-solves the
/// original basis so the step profile holds at the grid points.
pub fn local_average(field: &ShapedField, n_s: usize) -> Result<ShapedField> {
    let n_a = field.omega_grid.len();
    let g = check_divisor(n_a, n_s)?;
    let values = field.spectral_values(TimeHorizon::Infinite);
    let steps = super_bin_values(&values, n_s);
    let target = DVector::from_fn(n_a, |j, _| steps[j / g]);
    solve_d(&field.basis, &field.omega_grid, &target)
}

/// Re-expands an averaged, step-like field over a coarse basis of n_s
/// Gaussians centered on the super-bins, with widths stretched by the group
/// size so the coarse pulses cover their wider bins. The result keeps the
/// original frequency grid so it can be propagated unchanged.
pub fn smooth_expand(field_avg: &ShapedField, n_s: usize) -> Result<ShapedField> {
    let n_a = field_avg.omega_grid.len();
    let g = check_divisor(n_a, n_s)?;
    let values = field_avg.spectral_values(TimeHorizon::Infinite);
    let steps = super_bin_values(&values, n_s);
    let coarse_grid: Vec<f64> = (0..n_s)
        .map(|s| {
            field_avg.omega_grid[s * g..(s + 1) * g].iter().sum::<f64>() / g as f64
        })
        .collect();
    let pulses = coarse_grid
        .iter()
        .zip(&field_avg.basis.pulses)
        .map(|(&w, fine)| GaussianPulse::new(fine.eps_a, fine.alpha_a / g as f64, w))
        .collect::<Result<Vec<_>>>()?;
    let coarse = GaussianBasis::new(pulses)?;
    let target = DVector::from_vec(steps);
    let solved = solve_d(&coarse, &coarse_grid, &target)?;
    Ok(ShapedField {
        basis: solved.basis,
        d: solved.d,
        omega_grid: field_avg.omega_grid.clone(),
    })
}

/// Keeps the n_r largest spectral amplitudes, zeroing the rest while leaving
/// the surviving phases untouched, and re-solves the original basis. Ties at
/// the cut break toward the lower bin index.
pub fn truncate_amplitudes(field: &ShapedField, n_r: usize) -> Result<ShapedField> {
    let n_a = field.omega_grid.len();
    if n_r == 0 || n_r > n_a {
        return Err(Error::invalid(format!(
            "retained count {n_r} must lie in 1..={n_a}"
        )));
    }
    let values = field.spectral_values(TimeHorizon::Infinite);
    let mut target = DVector::from_element(n_a, C64::new(0.0, 0.0));
    for i in retained_indices(&values, n_r) {
        target[i] = values[i];
    }
    solve_d(&field.basis, &field.omega_grid, &target)
}

/// Indices of the n_r largest amplitudes, ties resolved toward lower index.
fn retained_indices(values: &CVector, n_r: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .norm()
            .partial_cmp(&values[i].norm())
            .unwrap()
            .then(i.cmp(&j))
    });
    order.truncate(n_r);
    order
}

/// One row of the amplitude-retention table.
#[derive(Debug, Clone, PartialEq)]
pub struct RetentionRow {
    pub n_r: usize,
    pub achieved_min: f64,
    pub achieved_max: f64,
    pub fresh_min: f64,
    pub fresh_max: f64,
}

/// For each retained-amplitude count, truncates the two extremal optimized
/// fields and records the population ratios P(T2)/P(T1) they still achieve,
/// next to the extents a fresh optimization with only n_r bins would reach.
pub fn retention_sweep(
    binned: &BinnedSystem,
    field_min: &ShapedField,
    field_max: &ShapedField,
    n_r_values: &[usize],
    t1: f64,
    t2: f64,
) -> Result<Vec<RetentionRow>> {
    let ratio = |field: &ShapedField| -> Result<f64> {
        let p1 = population(field, binned, t1)?;
        if p1 <= 0.0 {
            return Err(Error::invalid(
                "truncated field leaves no population at T1; ratio undefined",
            ));
        }
        Ok(population(field, binned, t2)? / p1)
    };
    let mut rows = Vec::with_capacity(n_r_values.len());
    for &n_r in n_r_values {
        let achieved_min = ratio(&truncate_amplitudes(field_min, n_r)?)?;
        let achieved_max = ratio(&truncate_amplitudes(field_max, n_r)?)?;
        let fresh = bin_system(&binned.parent, binned.window(), n_r)?;
        let sols = relative_control(&fresh, t1, t2)?;
        rows.push(RetentionRow {
            n_r,
            achieved_min,
            achieved_max,
            fresh_min: sols.first().map(|s| s.lambda).unwrap_or(f64::NAN),
            fresh_max: sols.last().map(|s| s.lambda).unwrap_or(f64::NAN),
        });
    }
    Ok(rows)
}
