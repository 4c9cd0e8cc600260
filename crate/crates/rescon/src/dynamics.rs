//! Coarse-grained time-evolution kernels and population evaluation.
//!
//! Two excitation pathways share the same K = M†M structure:
//!
//! - already-excited ("c-controlled"): M^c(t) = R†·diag(τ(t))·R over the
//!   resonances, P_S2 = c†·K^c(t)·c;
//! - laser-driven over the binned system: M(t) = R_A†·diag(τ^A(t))·diag(μ^A),
//!   P_S2(t) = d†B†(t)·K(t)·B(t)·d.
//!
//! τ_α(t) = exp(−iE_αt/ħ)·sinc(Δ_αt/2ħ) is the coarse-grained propagator
//! weight; it is trustworthy only while |t| stays well below 2ħ/Δ_α.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pulse::{ShapedField, TimeHorizon};
use crate::system::{BinnedSystem, ResonanceSystem};
use crate::{C64, CMatrix, CVector};

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// τ factors at one time, either per state or per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct TauFactors {
    pub values: Vec<C64>,
    pub t: f64,
    /// False when |t| exceeds half the coarse-graining horizon 2ħ/Δ_α for
    /// any state entering the computation.
    pub coarse_grain_ok: bool,
}

/// Per-state τ_α(t) = exp(−iE_αt/ħ)·sinc(Δ_αt/2ħ).
pub fn tau_states(sys: &ResonanceSystem, t: f64) -> TauFactors {
    let mut ok = true;
    let values = sys
        .e_alpha
        .iter()
        .zip(&sys.delta_alpha)
        .map(|(&e, &d)| {
            if t.abs() > sys.hbar / d {
                ok = false;
            }
            C64::from_polar(sinc(d * t / (2.0 * sys.hbar)), -e * t / sys.hbar)
        })
        .collect();
    if !ok {
        log::warn!(
            "tau at t = {t} fs exceeds half the coarse-graining horizon of the narrowest bin"
        );
    }
    TauFactors { values, t, coarse_grain_ok: ok }
}

/// Per-bin τ^A_A(t): arithmetic mean of the member τ_α(t).
pub fn tau_bins(binned: &BinnedSystem, t: f64) -> TauFactors {
    let fine = tau_states(&binned.parent, t);
    let values = binned
        .members
        .iter()
        .map(|group| {
            group.iter().map(|&a| fine.values[a]).sum::<C64>() / C64::new(group.len() as f64, 0.0)
        })
        .collect();
    TauFactors { values, t, coarse_grain_ok: fine.coarse_grain_ok }
}

/// An M(t) propagation matrix together with its kernel K(t) = M†(t)·M(t).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrices {
    pub m: CMatrix,
    pub k: CMatrix,
    pub t: f64,
}

/// Already-excited pathway: M^c_{κκ′}(t) = Σ_α ⟨κ|ᾱ⟩τ_α(t)⟨ᾱ|κ′⟩, N_Q × N_Q.
pub fn build_mc(sys: &ResonanceSystem, t: f64) -> KernelMatrices {
    let tau = tau_states(sys, t);
    let n = sys.n_states();
    let scaled = DMatrix::from_fn(n, sys.n_resonances(), |a, k| tau.values[a] * sys.r[(a, k)]);
    let m = sys.r.adjoint() * scaled;
    let k = m.adjoint() * &m;
    KernelMatrices { m, k, t }
}

/// Laser-driven pathway on the binned system:
/// M_{κ,A}(t) = ⟨κ|Ā⟩·τ^A_A(t)·μ^A_A, N_Q × N_A; K(t) is N_A × N_A.
pub fn build_me(binned: &BinnedSystem, t: f64) -> KernelMatrices {
    let tau = tau_bins(binned, t);
    let n_a = binned.n_bins();
    let n_q = binned.n_resonances();
    let m = DMatrix::from_fn(n_q, n_a, |k, a| {
        binned.r_a[(a, k)].conj() * tau.values[a] * binned.mu_a[a]
    });
    let k = m.adjoint() * &m;
    KernelMatrices { m, k, t }
}

fn check_grid(field: &ShapedField, binned: &BinnedSystem) -> Result<()> {
    let grid = binned.omega_grid();
    if field.omega_grid.len() != grid.len()
        || field
            .omega_grid
            .iter()
            .zip(&grid)
            .any(|(a, b)| (a - b).abs() > 1e-9 * b.abs().max(1.0))
    {
        return Err(Error::invalid(
            "field frequency grid does not match the binned system",
        ));
    }
    Ok(())
}

/// Spectral amplitudes of the field at the bin frequencies: accumulated up to
/// t while the pulse is still on, fully developed afterwards.
fn field_spectrum_at(field: &ShapedField, t: f64) -> CVector {
    if t < field.t_over() {
        field.spectral_values(TimeHorizon::Finite(t))
    } else {
        field.spectral_values(TimeHorizon::Infinite)
    }
}

/// Laser-driven S2 population P_S2(t) = ‖M(t)·ε(t)‖² with ε(t) = B(t)·d.
pub fn population(field: &ShapedField, binned: &BinnedSystem, t: f64) -> Result<f64> {
    check_grid(field, binned)?;
    let eps = field_spectrum_at(field, t);
    let kern = build_me(binned, t);
    Ok((&kern.m * eps).norm_squared())
}

/// Total excited-manifold norm Σ_A |ε_A(t)|²·|μ^A_A|²; the S1 share is the
/// remainder after subtracting P_S2.
pub fn excited_norm(field: &ShapedField, binned: &BinnedSystem, t: f64) -> Result<f64> {
    check_grid(field, binned)?;
    let eps = field_spectrum_at(field, t);
    Ok(eps
        .iter()
        .zip(&binned.mu_a)
        .map(|(e, mu)| e.norm_sqr() * mu.norm_sqr())
        .sum())
}

/// Already-excited S2 population P_S2(t) = ‖M^c(t)·c‖² for initial resonance
/// amplitudes c.
pub fn population_c(c: &CVector, sys: &ResonanceSystem, t: f64) -> Result<f64> {
    if c.len() != sys.n_resonances() {
        return Err(Error::invalid(format!(
            "amplitude vector length {} does not match {} resonances",
            c.len(),
            sys.n_resonances()
        )));
    }
    let kern = build_mc(sys, t);
    Ok((&kern.m * c).norm_squared())
}
