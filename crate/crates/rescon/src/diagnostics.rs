//! Non-diagonality and overlap measures, and the correlation report linking
//! them to control extents.
//!
//! H(K) = det(K)/det(diag K) ∈ (0,1] measures how far a Hermitian
//! positive-definite kernel is from diagonal; 1 iff diagonal. The two-time
//! ratio matrix R = K(T1)⁻¹K(T2) has the related measures H_R (real) and H_C
//! (complex). Determinants are evaluated in the log domain throughout: the
//! magnitudes involved underflow f64 long before the matrices become
//! numerically singular.

use nalgebra::DMatrix;

use crate::control::{RelativeOpts, relative_control_with};
use crate::dynamics::build_me;
use crate::error::{Error, Result};
use crate::system::{ResonanceSystem, bin_system};
use crate::{C64, CMatrix};

fn check_hermitian(k: &CMatrix) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(Error::invalid("measure input must be square"));
    }
    let herm = (k - k.adjoint()).norm();
    if herm > 1e-12 * k.norm().max(1e-300) {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (residual {herm:.3e})"
        )));
    }
    Ok(())
}

fn diag_logs(k: &CMatrix) -> Result<Vec<f64>> {
    (0..k.nrows())
        .map(|i| {
            let d = k[(i, i)].re;
            if d <= 0.0 {
                Err(Error::invalid(format!("diagonal entry {i} is {d}, must be positive")))
            } else {
                Ok(d.ln())
            }
        })
        .collect()
}

fn sorted_eigen(k: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = k.clone().symmetric_eigen();
    let n = k.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    (
        idx.iter().map(|&i| eig.eigenvalues[i]).collect(),
        DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]),
    )
}

/// ln H(K) = ln det(K) − ln det(diag K), or −∞ when K is singular.
pub fn log_hadamard(k: &CMatrix) -> Result<f64> {
    check_hermitian(k)?;
    let diag_sum: f64 = diag_logs(k)?.iter().sum();
    let (ev, _) = sorted_eigen(k);
    if ev.iter().any(|&v| v <= 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ev.iter().map(|v| v.ln()).sum::<f64>() - diag_sum)
}

/// Hadamard measure det(K)/det(diag K) ∈ (0, 1]; 0 at the singular edge.
pub fn hadamard(k: &CMatrix) -> Result<f64> {
    let lh = log_hadamard(k)?;
    // guard round-off past the upper bound for exactly diagonal input
    Ok(lh.exp().min(1.0))
}

/// The two-time ratio measures in plain and log form. H_R is real positive;
/// H_C is complex with |H_C| paired to its log magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardRatio {
    pub h_r: f64,
    pub h_c: C64,
    pub log_h_r: f64,
    /// ln|H_C| and arg(H_C).
    pub log_h_c: (f64, f64),
}

/// Measures of the ratio matrix R = K(T1)⁻¹·K(T2) without forming R
/// unstably: det(R) = det(K2)/det(K1) and the denominators come from the
/// diagonals of K1⁻¹ (spectral form), K2 and R.
pub fn hadamard_r(k1: &CMatrix, k2: &CMatrix) -> Result<HadamardRatio> {
    check_hermitian(k1)?;
    check_hermitian(k2)?;
    let n = k1.nrows();
    if k2.nrows() != n {
        return Err(Error::invalid("kernel pair sizes differ"));
    }
    let (ev1, u1) = sorted_eigen(k1);
    if ev1[n - 1] <= 0.0 {
        return Err(Error::invalid(format!(
            "K(T1) is singular (min eigenvalue {:.3e})",
            ev1[n - 1]
        )));
    }
    let (ev2, _) = sorted_eigen(k2);
    if ev2[n - 1] <= 0.0 {
        return Err(Error::invalid(format!(
            "K(T2) is singular (min eigenvalue {:.3e})",
            ev2[n - 1]
        )));
    }
    let log_det_r: f64 =
        ev2.iter().map(|v| v.ln()).sum::<f64>() - ev1.iter().map(|v| v.ln()).sum::<f64>();

    // diag(K1⁻¹)_ii = Σ_j |U_ij|²/λ_j, positive for HPD K1
    let log_diag_k1inv: f64 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| u1[(i, j)].norm_sqr() / ev1[j])
                .sum::<f64>()
                .ln()
        })
        .sum();
    let log_diag_k2: f64 = diag_logs(k2)?.iter().sum();
    let log_h_r = log_det_r - log_diag_k1inv - log_diag_k2;

    // diag(R) via the explicit (small, well-scaled) inverse of K1
    let inv_diag = DMatrix::from_diagonal(
        &nalgebra::DVector::from_iterator(n, ev1.iter().map(|&v| C64::new(1.0 / v, 0.0))),
    );
    let k1_inv = &u1 * inv_diag * u1.adjoint();
    let r = &k1_inv * k2;
    let mut log_diag_r = 0.0;
    let mut arg_diag_r = 0.0;
    for i in 0..n {
        let d = r[(i, i)];
        if d.norm() == 0.0 {
            return Err(Error::invalid(format!(
                "ratio matrix has vanishing diagonal entry {i}"
            )));
        }
        log_diag_r += d.norm().ln();
        arg_diag_r += d.arg();
    }
    let log_h_c = (log_det_r - log_diag_r, -arg_diag_r);

    Ok(HadamardRatio {
        h_r: log_h_r.exp(),
        h_c: C64::from_polar(log_h_c.0.exp(), log_h_c.1),
        log_h_r,
        log_h_c,
    })
}

/// Ω[κ,κ′] = Σ_{α: E_α ∈ window} |⟨κ|ᾱ⟩|·|⟨ᾱ|κ′⟩|: symmetric, nonnegative
/// resonance-overlap strengths restricted to the excitation window.
pub fn overlap_matrix(sys: &ResonanceSystem, window: (f64, f64)) -> Result<DMatrix<f64>> {
    let (e_l, e_h) = window;
    if !(e_h > e_l) {
        return Err(Error::invalid(format!("degenerate window [{e_l}, {e_h}]")));
    }
    let members: Vec<usize> = (0..sys.n_states())
        .filter(|&a| sys.e_alpha[a] >= e_l && sys.e_alpha[a] <= e_h)
        .collect();
    if members.is_empty() {
        return Err(Error::invalid(format!(
            "no states inside window [{e_l}, {e_h}]"
        )));
    }
    let n_q = sys.n_resonances();
    Ok(DMatrix::from_fn(n_q, n_q, |k, kp| {
        members
            .iter()
            .map(|&a| sys.r[(a, k)].norm() * sys.r[(a, kp)].norm())
            .sum()
    }))
}

/// One row of the Table-style correlation report. All H measures are the
/// (1/N_A)-th power of the underlying determinant ratio, evaluated from the
/// log form so sub-underflow magnitudes survive.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub window: (f64, f64),
    pub h_omega: f64,
    pub h_k_t1: f64,
    pub h_k_t2: f64,
    pub h_r_r: f64,
    pub abs_h_c_r: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n_a: usize,
}

/// Per-window overlap and kernel measures plus the relative-control extent.
///
/// Resonances without support in a window are dropped from Ω before H(Ω) is
/// taken (they are not excited there and would only degenerate the measure).
/// Kernel-based measures need nonsingular K, i.e. n_a at most the number of
/// in-window resonances.
pub fn correlation_report(
    sys: &ResonanceSystem,
    windows: &[(f64, f64)],
    t1: f64,
    t2: f64,
    n_a: usize,
    opts: RelativeOpts,
) -> Result<Vec<MeasureReport>> {
    let mut out = Vec::with_capacity(windows.len());
    for &window in windows {
        let omega_full = overlap_matrix(sys, window)?;
        let max_diag = (0..omega_full.nrows())
            .map(|i| omega_full[(i, i)])
            .fold(0.0, f64::max);
        let active: Vec<usize> = (0..omega_full.nrows())
            .filter(|&i| omega_full[(i, i)] > 1e-12 * max_diag)
            .collect();
        let omega = DMatrix::from_fn(active.len(), active.len(), |r, c| {
            C64::new(omega_full[(active[r], active[c])], 0.0)
        });
        let inv_p = 1.0 / n_a as f64;
        let h_omega = (log_hadamard(&omega)? * inv_p).exp();

        let binned = bin_system(sys, window, n_a)?;
        let k1 = build_me(&binned, t1).k;
        let k2 = build_me(&binned, t2).k;
        let h_k_t1 = (log_hadamard(&k1)? * inv_p).exp();
        let h_k_t2 = (log_hadamard(&k2)? * inv_p).exp();
        let ratio = hadamard_r(&k1, &k2)?;
        let h_r_r = (ratio.log_h_r * inv_p).exp();
        let abs_h_c_r = (ratio.log_h_c.0 * inv_p).exp();

        let sols = relative_control_with(&binned, t1, t2, opts)?;
        let lambda_min = sols.first().map(|s| s.lambda).unwrap_or(f64::NAN);
        let lambda_max = sols.last().map(|s| s.lambda).unwrap_or(f64::NAN);

        out.push(MeasureReport {
            window,
            h_omega,
            h_k_t1,
            h_k_t2,
            h_r_r,
            abs_h_c_r,
            lambda_min,
            lambda_max,
            n_a,
        });
    }
    Ok(out)
}
