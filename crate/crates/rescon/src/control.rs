//! Absolute and relative control solvers.
//!
//! Absolute control maximizes P_S2 at a single time under a pulse-energy
//! constraint; for a single resonance the kernel is rank-1 and the spectrum
//! is analytic: N−1 null directions and one eigenvalue equal to trace(K).
//!
//! Relative control maximizes (or minimizes) the ratio P_S2(T2)/P_S2(T1).
//! It is the Hermitian-definite generalized pair (K(T2), K(T1)) restricted to
//! the range of K(T1): K = M†M with M of size N_Q × N_A has rank at most
//! min(N_Q, N_A), so when the bin count exceeds the resonance count K(T1) is
//! structurally singular and only the top min(N_Q, N_A) eigendirections carry
//! population. The solver whitens that subspace instead of inverting K(T1),
//! which keeps the spectrum while avoiding the instability of an explicit
//! inverse.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{KernelMatrices, build_me};
use crate::error::{Error, Result};
use crate::system::BinnedSystem;
use crate::{C64, CMatrix, CVector};

/// Default condition-number cap on the retained spectrum of K(T1).
pub const DEFAULT_KERNEL_COND_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    Absolute,
    Relative,
}

/// One eigenpair of a control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolution {
    /// P_S2(T) (absolute, up to the energy constant) or the ratio
    /// P_S2(T2)/P_S2(T1) (relative).
    pub lambda: f64,
    /// Unit-norm spectral field over the bins, phase-fixed so the first
    /// nonvanishing component is real positive.
    pub field_vector: CVector,
    pub kind: ControlKind,
    pub t1: f64,
    pub t2: f64,
    /// Condition estimate of (the retained spectrum of) K(T1).
    pub cond_k_t1: f64,
    /// Pulse-energy constraint constant E0 (absolute scheme only).
    pub e0: Option<f64>,
}

impl ControlSolution {
    /// Field vector scaled to the energy constraint, √(2πE0)·ε̂.
    pub fn energy_scaled_field(&self) -> CVector {
        match self.e0 {
            Some(e0) => {
                let s = C64::new((2.0 * std::f64::consts::PI * e0).sqrt(), 0.0);
                self.field_vector.map(|c| c * s)
            }
            None => self.field_vector.clone(),
        }
    }
}

/// Multiplies the first nonvanishing component's phase away.
fn phase_fix(v: &mut CVector) {
    let norm = v.norm();
    if norm == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|c| c.norm() > 1e-12 * norm) {
        let rot = C64::from_polar(1.0, -lead.arg());
        for c in v.iter_mut() {
            *c *= rot;
        }
    }
}

/// Deterministic ordering: by eigenvalue, then lexicographically by the
/// phase-fixed eigenvector components.
fn order_solutions(pairs: &mut [(f64, CVector)]) {
    pairs.sort_by(|(la, va), (lb, vb)| {
        la.partial_cmp(lb).unwrap().then_with(|| {
            for (a, b) in va.iter().zip(vb.iter()) {
                let ord = a
                    .re
                    .partial_cmp(&b.re)
                    .unwrap()
                    .then(a.im.partial_cmp(&b.im).unwrap());
                if ord != std::cmp::Ordering::Equal {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
}

/// Eigenvalues (descending) and matching eigenvectors of a Hermitian matrix.
fn hermitian_eigen_desc(k: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = k.clone().symmetric_eigen();
    let n = k.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// Analytic spectrum of a rank-1 kernel under the energy constraint E0.
///
/// Returns N−1 solutions with λ = 0 (fields that annihilate P_S2 at T) and
/// one with λ = trace(K); fields are unit-norm with the √(2πE0) scale
/// available via [`ControlSolution::energy_scaled_field`]. A kernel whose
/// second eigenvalue exceeds 1e−8·trace is rejected — overlapping resonances
/// need the relative scheme.
pub fn absolute_control(kern: &KernelMatrices, e0: f64) -> Result<Vec<ControlSolution>> {
    if !(e0 > 0.0) {
        return Err(Error::invalid(format!(
            "energy constraint must be positive, got {e0}"
        )));
    }
    let k = &kern.k;
    let n = k.nrows();
    let trace: f64 = (0..n).map(|i| k[(i, i)].re).sum();
    if !(trace > 0.0) {
        return Err(Error::invalid("kernel has nonpositive trace"));
    }
    let (ev, vecs) = hermitian_eigen_desc(k);
    if n > 1 && ev[1].abs() > 1e-8 * trace {
        return Err(Error::invalid(format!(
            "kernel is not rank-1 (second eigenvalue {:.3e} vs trace {:.3e}); \
             use relative control for overlapping resonances",
            ev[1], trace
        )));
    }

    // principal direction: the M row when available, else the top eigenvector
    let mut principal: CVector = if kern.m.nrows() == 1 {
        kern.m.row(0).adjoint()
    } else {
        vecs.column(0).into_owned()
    };
    principal /= C64::new(principal.norm(), 0.0);

    // Householder reflection carrying `principal` to e_0: its remaining
    // columns are an orthonormal basis of the null space
    let lead_phase = if principal[0].norm() > 0.0 {
        C64::from_polar(1.0, principal[0].arg())
    } else {
        C64::new(1.0, 0.0)
    };
    let mut w = principal.clone();
    w[0] -= lead_phase;
    let wn2 = w.norm_squared();

    let mut pairs: Vec<(f64, CVector)> = Vec::with_capacity(n);
    for j in 1..n {
        let mut col = DVector::from_element(n, C64::default());
        col[j] = C64::new(1.0, 0.0);
        if wn2 > 1e-30 {
            let coef = C64::new(2.0 / wn2, 0.0) * w[j].conj();
            col -= w.map(|c| c * coef);
        }
        let mut v = col;
        phase_fix(&mut v);
        pairs.push((0.0, v));
    }
    let mut top = principal;
    phase_fix(&mut top);
    pairs.push((trace, top));
    order_solutions(&mut pairs);

    let cond = if ev[n - 1] > 0.0 { ev[0] / ev[n - 1] } else { f64::INFINITY };
    Ok(pairs
        .into_iter()
        .map(|(lambda, field_vector)| ControlSolution {
            lambda,
            field_vector,
            kind: ControlKind::Absolute,
            t1: kern.t,
            t2: kern.t,
            cond_k_t1: cond,
            e0: Some(e0),
        })
        .collect())
}

/// Solves the generalized pair (k2, k1) on the top-`rank` eigenspace of k1.
///
/// Returns (λ ascending, unit-norm phase-fixed eigenvectors, condition
/// estimate of the retained k1 spectrum). Every returned x satisfies
/// x†k2x = λ·x†k1x exactly in the retained subspace.
pub fn solve_relative(
    k1: &CMatrix,
    k2: &CMatrix,
    rank: usize,
    cond_cap: f64,
) -> Result<(Vec<f64>, Vec<CVector>, f64)> {
    let n = k1.nrows();
    if k2.nrows() != n || k1.ncols() != n || k2.ncols() != n {
        return Err(Error::invalid("kernel pair must be square and same size"));
    }
    let r = rank.min(n);
    if r == 0 {
        return Err(Error::invalid("rank must be positive"));
    }
    let (ev, vecs) = hermitian_eigen_desc(k1);
    let cond = if ev[r - 1] > 0.0 { ev[0] / ev[r - 1] } else { f64::INFINITY };
    if !cond.is_finite() || cond > cond_cap {
        return Err(Error::IllConditioned { cond, threshold: cond_cap });
    }

    // whitening map S = U_r·Λ_r^{−1/2}: S†·k1·S = I_r
    let s = DMatrix::from_fn(n, r, |row, col| {
        vecs[(row, col)] / C64::new(ev[col].sqrt(), 0.0)
    });
    let mut a = s.adjoint() * k2 * &s;
    // enforce Hermiticity against round-off before the symmetric solve
    a = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let (mut lam, avecs) = hermitian_eigen_desc(&a);
    lam.reverse();

    let mut pairs: Vec<(f64, CVector)> = (0..r)
        .map(|j| {
            let w = avecs.column(r - 1 - j).into_owned();
            let mut x = &s * w;
            x /= C64::new(x.norm(), 0.0);
            phase_fix(&mut x);
            (lam[j], x)
        })
        .collect();
    order_solutions(&mut pairs);
    let (lambdas, vectors) = pairs.into_iter().unzip();
    Ok((lambdas, vectors, cond))
}

/// Options for [`relative_control_with`].
#[derive(Debug, Clone, Copy)]
pub struct RelativeOpts {
    pub cond_cap: f64,
}

impl Default for RelativeOpts {
    fn default() -> Self {
        RelativeOpts { cond_cap: DEFAULT_KERNEL_COND_CAP }
    }
}

/// Relative-control eigenproblem on the binned kernels at T1 and T2.
///
/// Eigenvalues are the achievable population ratios P_S2(T2)/P_S2(T1); the
/// extreme pair brackets every ratio reachable by a weak field. Errors with
/// the condition estimate when K(T1) is too ill-conditioned on its
/// structurally nonzero spectrum.
pub fn relative_control_with(
    binned: &BinnedSystem,
    t1: f64,
    t2: f64,
    opts: RelativeOpts,
) -> Result<Vec<ControlSolution>> {
    if !(t2 > t1) || !(t1 > 0.0) {
        return Err(Error::invalid(format!(
            "need 0 < T1 < T2, got T1 = {t1}, T2 = {t2}"
        )));
    }
    let k1 = build_me(binned, t1).k;
    let k2 = build_me(binned, t2).k;
    let rank = binned.n_resonances().min(binned.n_bins());
    let (lambdas, vectors, cond) = solve_relative(&k1, &k2, rank, opts.cond_cap)?;
    Ok(lambdas
        .into_iter()
        .zip(vectors)
        .map(|(lambda, field_vector)| ControlSolution {
            lambda,
            field_vector,
            kind: ControlKind::Relative,
            t1,
            t2,
            cond_k_t1: cond,
            e0: None,
        })
        .collect())
}

/// [`relative_control_with`] at the default condition cap.
pub fn relative_control(binned: &BinnedSystem, t1: f64, t2: f64) -> Result<Vec<ControlSolution>> {
    relative_control_with(binned, t1, t2, RelativeOpts::default())
}

/// Rescales a solution's field; the eigenvalue (a ratio of quadratic forms)
/// is unchanged while populations scale by |factor|².
pub fn scale_solution(sol: &ControlSolution, factor: C64) -> Result<ControlSolution> {
    if factor.norm() == 0.0 {
        return Err(Error::invalid("scale factor must be nonzero"));
    }
    let mut out = sol.clone();
    out.field_vector = sol.field_vector.map(|c| c * factor);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{bin_system, generate_synthetic};
    use nalgebra::DMatrix;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rank1_kernel(row: &[C64]) -> KernelMatrices {
        let m = DMatrix::from_fn(1, row.len(), |_, j| row[j]);
        let k = m.adjoint() * &m;
        KernelMatrices { m, k, t: 100.0 }
    }

    fn random_hermitian_psd(n: usize, seed: u64, shift: f64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let mut k = x.adjoint() * &x;
        for i in 0..n {
            k[(i, i)] += C64::new(shift, 0.0);
        }
        k
    }

    #[test]
    fn rank1_analytic_spectrum() {
        let kern = rank1_kernel(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let sols = absolute_control(&kern, 1.0).unwrap();
        assert_eq!(sols.len(), 2);
        assert!(sols[0].lambda.abs() < 1e-14);
        assert!((sols[1].lambda - 2.0).abs() < 1e-12);
        // null direction ∝ (1, i)/√2: M·(1, i)ᵀ = 1 + i² = 0
        let null = &sols[0].field_vector;
        let expect = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)])
            / C64::new(2.0f64.sqrt(), 0.0);
        let overlap = (null.adjoint() * &expect)[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        assert!((&kern.k * null).norm() < 1e-14);
        // phase fix: first nonvanishing component real positive
        for s in &sols {
            let lead = s.field_vector.iter().find(|c| c.norm() > 1e-9).unwrap();
            assert!(lead.im.abs() < 1e-12 && lead.re > 0.0);
        }
    }

    #[test]
    fn rank1_top_eigenvalue_is_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let n = 3 + (rng.random::<f64>() * 8.0) as usize;
            let row: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let kern = rank1_kernel(&row);
            let trace: f64 = (0..n).map(|i| kern.k[(i, i)].re).sum();
            let sols = absolute_control(&kern, 2.5).unwrap();
            assert_eq!(sols.len(), n);
            let top = sols.last().unwrap();
            assert!((top.lambda - trace).abs() <= 1e-12 * trace);
            for s in &sols[..n - 1] {
                assert!(s.lambda.abs() <= 1e-10 * trace);
                let p = (&kern.m * s.energy_scaled_field()).norm_squared();
                assert!(p <= 1e-12 * trace * 2.0 * std::f64::consts::PI * 2.5);
            }
        }
    }

    #[test]
    fn full_rank_kernel_is_rejected_with_redirect() {
        let k = random_hermitian_psd(3, 5, 0.1);
        let m = k.clone(); // not M†M of a row, just any full-rank stand-in
        let kern = KernelMatrices { m, k, t: 50.0 };
        let err = absolute_control(&kern, 1.0).unwrap_err();
        assert!(err.to_string().contains("relative control"), "{err}");
    }

    #[test]
    fn identity_and_scalar_pairs() {
        let k1 = random_hermitian_psd(6, 7, 0.5);
        let (l1, _, _) = solve_relative(&k1, &k1, 6, 1e12).unwrap();
        assert!(l1.iter().all(|l| (l - 1.0).abs() < 1e-10));
        let k2 = &k1 * C64::new(2.0, 0.0);
        let (l2, _, _) = solve_relative(&k1, &k2, 6, 1e12).unwrap();
        assert!(l2.iter().all(|l| (l - 2.0).abs() < 1e-10));
    }

    #[test]
    fn eigenpairs_satisfy_rayleigh_ratio() {
        let k1 = random_hermitian_psd(8, 11, 0.3);
        let k2 = random_hermitian_psd(8, 13, 0.0);
        let (lam, vecs, _) = solve_relative(&k1, &k2, 8, 1e12).unwrap();
        assert!(lam.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        for (l, x) in lam.iter().zip(&vecs) {
            assert!((x.norm() - 1.0).abs() < 1e-12);
            let num = (x.adjoint() * &k2 * x)[(0, 0)].re;
            let den = (x.adjoint() * &k1 * x)[(0, 0)].re;
            assert!((num / den - l).abs() < 1e-9 * l.abs().max(1.0));
        }
    }

    #[test]
    fn spectrum_invariant_under_diagonal_phase_congruence() {
        let k1 = random_hermitian_psd(6, 17, 0.4);
        let k2 = random_hermitian_psd(6, 19, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = DMatrix::from_diagonal(&DVector::from_fn(6, |_, _| {
            C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
        }));
        let k1p = d.adjoint() * &k1 * &d;
        let k2p = d.adjoint() * &k2 * &d;
        let (la, _, _) = solve_relative(&k1, &k2, 6, 1e12).unwrap();
        let (lb, _, _) = solve_relative(&k1p, &k2p, 6, 1e12).unwrap();
        for (a, b) in la.iter().zip(&lb) {
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn rank_truncated_solve_keeps_exact_ratios() {
        // structurally rank-2 kernels on 8 bins, as produced by two resonances
        let sys = generate_synthetic(
            96,
            2,
            (4.0, 6.0),
            &[0.3, 0.4],
            &[4.8, 5.1],
            &[1.0, 0.8],
            12,
        )
        .unwrap();
        let (lo, hi) = sys.span();
        let binned = bin_system(&sys, (lo, hi), 8).unwrap();
        let t1 = 90.0;
        let t2 = 150.0;
        let sols = relative_control(&binned, t1, t2).unwrap();
        assert_eq!(sols.len(), 2);
        let k1 = build_me(&binned, t1).k;
        let k2 = build_me(&binned, t2).k;
        for s in &sols {
            assert!(s.lambda > 0.0);
            let x = &s.field_vector;
            let num = (x.adjoint() * &k2 * x)[(0, 0)].re;
            let den = (x.adjoint() * &k1 * x)[(0, 0)].re;
            assert!(
                (num / den - s.lambda).abs() < 1e-8 * s.lambda,
                "{} vs {}",
                num / den,
                s.lambda
            );
        }
    }

    #[test]
    fn ill_conditioned_kernel_is_refused() {
        let mut k1 = random_hermitian_psd(4, 29, 0.0);
        // flatten to a numerically rank-1 matrix: retained rank-2 spectrum
        // then has a huge condition number
        let (ev, vecs) = hermitian_eigen_desc(&k1);
        let top = vecs.column(0).into_owned();
        k1 = &top * top.adjoint() * C64::new(ev[0], 0.0);
        let k2 = random_hermitian_psd(4, 31, 0.0);
        let err = solve_relative(&k1, &k2, 2, 1e12).unwrap_err();
        match err {
            Error::IllConditioned { cond, threshold } => {
                assert!(cond > threshold || cond.is_infinite());
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn scaling_preserves_lambda_and_squares_population() {
        let kern = rank1_kernel(&[C64::new(0.6, 0.1), C64::new(-0.2, 0.8), C64::new(0.3, 0.0)]);
        let sols = absolute_control(&kern, 1.0).unwrap();
        let top = sols.last().unwrap();
        let p1 = (&kern.m * &top.field_vector).norm_squared();
        let doubled = scale_solution(top, C64::new(2.0, 0.0)).unwrap();
        assert_eq!(doubled.lambda, top.lambda);
        let p2 = (&kern.m * &doubled.field_vector).norm_squared();
        assert!((p2 - 4.0 * p1).abs() < 1e-12 * p1);
        let phased = scale_solution(top, C64::from_polar(1.0, 1.234)).unwrap();
        let p3 = (&kern.m * &phased.field_vector).norm_squared();
        assert!((p3 - p1).abs() < 1e-12 * p1);
        assert!(scale_solution(top, C64::default()).is_err());
    }
}
