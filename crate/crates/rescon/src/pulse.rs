//! Gaussian pulse basis, the Faddeeva function, analytic finite-time Fourier
//! transforms, and expansion of target spectra into d-coefficients.
//!
//! A pulse is the complex analytic signal
//! ε_a(t) = ε_a/(2√π·α_a)·exp(−(t/2α_a)² − iω_a t); its finite-time Fourier
//! transform ∫_{−∞}^{t} ε_a(t′)e^{iωt′}dt′ has a closed form in terms of
//! W(z) = exp(−z²)·erfc(−iz).

use errorfunctions::ComplexErrorFunctions;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{C64, CMatrix, CVector};

/// Default condition-number cap for the spectral basis matrix.
pub const DEFAULT_BASIS_COND_CAP: f64 = 1e12;

/// Pulse overhead time in units of α_a: t_over = 4·√(2 ln 2)·α_a.
pub const T_OVER_FACTOR: f64 = 4.0 * 1.1774100225154747;

/// The Faddeeva function W(z) = exp(−z²)·erfc(−iz).
///
/// Accurate to better than 1e−12 relative in the strip |Im z| ≤ 30 exercised
/// by the transforms below.
pub fn faddeeva(z: C64) -> C64 {
    z.w()
}

/// One Gaussian pulse of the shaping basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPulse {
    /// Spectral peak amplitude ε_a (field units · fs).
    pub eps_a: f64,
    /// Temporal width parameter α_a (fs).
    pub alpha_a: f64,
    /// Center angular frequency ω_a (rad/fs).
    pub omega_a: f64,
}

impl GaussianPulse {
    pub fn new(eps_a: f64, alpha_a: f64, omega_a: f64) -> Result<Self> {
        if !(eps_a > 0.0) || !eps_a.is_finite() {
            return Err(Error::invalid(format!("pulse amplitude must be positive, got {eps_a}")));
        }
        if !(alpha_a > 0.0) || !alpha_a.is_finite() {
            return Err(Error::invalid(format!("pulse width must be positive, got {alpha_a}")));
        }
        Ok(GaussianPulse { eps_a, alpha_a, omega_a })
    }

    /// Time after which the pulse is effectively over, 4√(2 ln 2)·α_a.
    pub fn t_over(&self) -> f64 {
        T_OVER_FACTOR * self.alpha_a
    }

    /// Complex analytic signal ε_a(t).
    pub fn time_value(&self, t: f64) -> C64 {
        let u = t / (2.0 * self.alpha_a);
        let env = self.eps_a / (2.0 * std::f64::consts::PI.sqrt() * self.alpha_a) * (-u * u).exp();
        C64::from_polar(env, -self.omega_a * t)
    }

    /// Infinite-time spectrum ε_a(ω) = ε_a·exp(−α_a²(ω−ω_a)²).
    pub fn spectrum(&self, omega: f64) -> f64 {
        let a = self.alpha_a * (omega - self.omega_a);
        self.eps_a * (-a * a).exp()
    }
}

/// Finite-time Fourier transform of a Gaussian pulse,
/// ∫_{−∞}^{t} ε_a(t′)·e^{iωt′} dt′, evaluated analytically.
///
/// With a = α_a(ω−ω_a) and b = t/(2α_a) the closed form
/// (ε_a/2)·e^{−a²}·{2 − e^{(a+ib)²}·W(a+ib)} is rearranged so that W is only
/// evaluated in the closed upper half-plane (where |W| ≤ 1) and every
/// exponential has non-positive real part; the expression stays finite for
/// arbitrarily large |t|.
pub fn ftft_gaussian(p: &GaussianPulse, omega: f64, t: f64) -> C64 {
    let a = p.alpha_a * (omega - p.omega_a);
    let b = t / (2.0 * p.alpha_a);
    let half = 0.5 * p.eps_a;
    // e^{−b²}·e^{2iab}, the combined prefactor of both branches
    let pre = C64::from_polar((-b * b).exp(), 2.0 * a * b);
    if b >= 0.0 {
        let w = faddeeva(C64::new(a, b));
        C64::new(2.0 * half * (-a * a).exp(), 0.0) - half * pre * w
    } else {
        // reflect W(a+ib) = 2e^{−(a+ib)²} − W(−a−ib) to stay in Im ≥ 0
        let w = faddeeva(C64::new(-a, -b));
        half * pre * w
    }
}

/// An ordered set of Gaussian pulses used as a spectral basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBasis {
    pub pulses: Vec<GaussianPulse>,
}

impl GaussianBasis {
    pub fn new(pulses: Vec<GaussianPulse>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::invalid("basis needs at least one pulse"));
        }
        Ok(GaussianBasis { pulses })
    }

    /// One pulse per grid frequency, identical amplitude and width.
    pub fn covering(omega_grid: &[f64], eps_a: f64, alpha_a: f64) -> Result<Self> {
        let pulses = omega_grid
            .iter()
            .map(|&w| GaussianPulse::new(eps_a, alpha_a, w))
            .collect::<Result<Vec<_>>>()?;
        GaussianBasis::new(pulses)
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Conservative envelope: max t_over over all member pulses.
    pub fn t_over(&self) -> f64 {
        self.pulses.iter().map(|p| p.t_over()).fold(0.0, f64::max)
    }
}

/// Evaluation horizon for spectral amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeHorizon {
    /// Accumulated spectrum up to time t (fs).
    Finite(f64),
    /// The fully developed (t → ∞) spectrum.
    Infinite,
}

/// B[A,a] = ε_a(ω_A, t): spectral amplitude of pulse a at grid frequency A.
pub fn basis_matrix(basis: &GaussianBasis, omega_grid: &[f64], horizon: TimeHorizon) -> CMatrix {
    DMatrix::from_fn(omega_grid.len(), basis.len(), |row, col| {
        let p = &basis.pulses[col];
        match horizon {
            TimeHorizon::Finite(t) => ftft_gaussian(p, omega_grid[row], t),
            TimeHorizon::Infinite => C64::new(p.spectrum(omega_grid[row]), 0.0),
        }
    })
}

/// A target spectrum realized over a Gaussian basis: ε_p(ω_A) = Σ_a d_a ε_a(ω_A)
/// holds exactly at the grid points by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedField {
    pub basis: GaussianBasis,
    pub d: CVector,
    pub omega_grid: Vec<f64>,
}

impl ShapedField {
    /// Spectral amplitudes B(t)·d at the grid points.
    pub fn spectral_values(&self, horizon: TimeHorizon) -> CVector {
        &basis_matrix(&self.basis, &self.omega_grid, horizon) * &self.d
    }

    /// Time-domain pulse ε_p(t) = Σ_a d_a ε_a(t).
    pub fn time_value(&self, t: f64) -> C64 {
        self.basis
            .pulses
            .iter()
            .zip(self.d.iter())
            .map(|(p, d)| d * p.time_value(t))
            .sum()
    }

    pub fn t_over(&self) -> f64 {
        self.basis.t_over()
    }
}

/// Estimates the 2-norm condition number of B from the spectrum of B†B.
fn condition_estimate(b: &CMatrix) -> f64 {
    let gram = b.adjoint() * b;
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 { f64::INFINITY } else { (max / min).sqrt() }
}

/// Solves B·d = target on the infinite-time basis matrix.
///
/// Fails with a structured error (carrying the condition estimate) when B is
/// singular or its condition number exceeds `cond_cap`. The returned field
/// reproduces the target at the grid points to 1e−10·‖target‖∞.
pub fn solve_d_with(
    basis: &GaussianBasis,
    omega_grid: &[f64],
    target: &CVector,
    cond_cap: f64,
) -> Result<ShapedField> {
    let n = basis.len();
    if omega_grid.len() != n || target.len() != n {
        return Err(Error::invalid(format!(
            "basis ({n}), grid ({}) and target ({}) sizes must agree",
            omega_grid.len(),
            target.len()
        )));
    }
    let b = basis_matrix(basis, omega_grid, TimeHorizon::Infinite);
    let cond = condition_estimate(&b);
    if !cond.is_finite() || cond > cond_cap {
        return Err(Error::SingularBasis { cond });
    }
    let lu = b.clone().lu();
    let mut d = lu
        .solve(target)
        .ok_or(Error::SingularBasis { cond })?;
    // one step of iterative refinement, then verify the residual contract
    let target_scale = target.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for _ in 0..2 {
        let resid = target - &b * &d;
        let rnorm = resid.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if rnorm <= 1e-10 * target_scale {
            return Ok(ShapedField {
                basis: basis.clone(),
                d,
                omega_grid: omega_grid.to_vec(),
            });
        }
        if let Some(corr) = lu.solve(&resid) {
            d += corr;
        }
    }
    let resid = target - &b * &d;
    let rnorm = resid.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if rnorm <= 1e-10 * target_scale {
        Ok(ShapedField {
            basis: basis.clone(),
            d,
            omega_grid: omega_grid.to_vec(),
        })
    } else {
        Err(Error::SingularBasis { cond })
    }
}

/// [`solve_d_with`] at the default condition cap.
pub fn solve_d(basis: &GaussianBasis, omega_grid: &[f64], target: &CVector) -> Result<ShapedField> {
    solve_d_with(basis, omega_grid, target, DEFAULT_BASIS_COND_CAP)
}

/// Samples ε_p(t) on a time grid.
pub fn field_time_profile(field: &ShapedField, t_grid: &[f64]) -> Vec<C64> {
    t_grid.iter().map(|&t| field.time_value(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    const TAU: f64 = std::f64::consts::TAU;

    /// Simpson quadrature of the FTFT integral with interval doubling until
    /// the result is stable; integrand support starts well below −12α.
    fn ftft_quadrature(p: &GaussianPulse, omega: f64, t: f64) -> C64 {
        let lo = -14.0 * p.alpha_a;
        if t <= lo {
            return C64::default();
        }
        let f = |x: f64| p.time_value(x) * C64::from_polar(1.0, omega * x);
        let simpson = |n: usize| {
            let h = (t - lo) / n as f64;
            let mut acc = f(lo) + f(t);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += C64::new(w, 0.0) * f(lo + i as f64 * h);
            }
            acc * C64::new(h / 3.0, 0.0)
        };
        let mut n = 1 << 10;
        let mut prev = simpson(n);
        loop {
            n *= 2;
            let cur = simpson(n);
            if (cur - prev).norm() < 1e-12 || n > (1 << 20) {
                return cur;
            }
            prev = cur;
        }
    }

    #[test]
    fn faddeeva_special_values() {
        assert!((faddeeva(C64::default()) - C64::new(1.0, 0.0)).norm() < 1e-14);
        // W(2i) = e⁴·erfc(2), purely real
        let w2i = faddeeva(C64::new(0.0, 2.0));
        let expect = 4.0f64.exp() * 0.004677734981047266; // erfc(2) to 16 digits
        assert!((w2i.re - expect).abs() < 1e-12 * expect);
        assert!(w2i.im.abs() < 1e-14);
        // W(1) = e^{−1} + 2i·F(1)/√π with Dawson F(1) = 0.5380795069127684
        let w1 = faddeeva(C64::new(1.0, 0.0));
        assert!((w1.re - (-1.0f64).exp()).abs() < 1e-13);
        assert!((w1.im - 0.6071577058413937).abs() < 1e-12);
    }

    #[test]
    fn ftft_half_peak_at_center() {
        let p = GaussianPulse::new(1.0, 2.0, 7.0).unwrap();
        let v = ftft_gaussian(&p, 7.0, 0.0);
        assert!((v - C64::new(0.5, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn ftft_converges_to_asymptote() {
        // weak amplitude: at t_over the remaining tail mass is ~4.4e−4·ε_a,
        // so the 1e−8 absolute window needs ε_a ≲ 2e−5
        let p = GaussianPulse::new(1e-5, 2.0, 7.0).unwrap();
        for omega in [6.0, 6.8, 7.0, 7.3] {
            let asym = C64::new(p.spectrum(omega), 0.0);
            for t in [p.t_over(), 1.2 * p.t_over(), 3.0 * p.t_over()] {
                assert!((ftft_gaussian(&p, omega, t) - asym).norm() < 1e-8);
            }
        }
        // with order-one amplitude the same holds from 2·t_over on
        let p = GaussianPulse::new(1.0, 2.0, 7.0).unwrap();
        for omega in [6.5, 7.0, 7.5] {
            let asym = C64::new(p.spectrum(omega), 0.0);
            assert!((ftft_gaussian(&p, omega, 2.0 * p.t_over()) - asym).norm() < 1e-8);
        }
    }

    #[test]
    fn ftft_tail_bounded_by_erfc_mass() {
        use errorfunctions::RealErrorFunctions;
        let p = GaussianPulse::new(1.0, 3.0, 7.0).unwrap();
        for omega in [6.7, 7.0, 7.2] {
            let asym = C64::new(p.spectrum(omega), 0.0);
            let mut last = f64::INFINITY;
            for i in 0..40 {
                let t = -20.0 + 2.5 * i as f64;
                let diff = (ftft_gaussian(&p, omega, t) - asym).norm();
                let tail = 0.5 * p.eps_a * RealErrorFunctions::erfc(t / (2.0 * p.alpha_a));
                assert!(diff <= tail + 1e-12, "t={t} diff={diff:e} tail={tail:e}");
                // the bound itself shrinks monotonically
                assert!(tail <= last + 1e-15);
                last = tail;
            }
        }
    }

    #[test]
    fn ftft_matches_quadrature() {
        let p = GaussianPulse::new(1.0, 2.0, 7.0).unwrap();
        for (i, j) in [(0, 0), (3, 1), (5, 9), (9, 4), (2, 7)] {
            let omega = 5.5 + 0.35 * i as f64;
            let t = -12.0 + 3.0 * j as f64;
            let exact = ftft_gaussian(&p, omega, t);
            let quad = ftft_quadrature(&p, omega, t);
            assert!(
                (exact - quad).norm() < 1e-8,
                "omega={omega} t={t}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn ftft_is_causal() {
        let p = GaussianPulse::new(1.0, 2.0, 7.0).unwrap();
        // at exactly −t_over the accumulated amplitude is still the leading
        // tail mass (~4.4e−4·ε_a); it drops below 1e−12 from ~−2.3·t_over on
        for omega in [6.0, 7.0, 8.5] {
            assert!(ftft_gaussian(&p, omega, -p.t_over()).norm() < 1e-3 * p.eps_a);
            assert!(ftft_gaussian(&p, omega, -2.5 * p.t_over()).norm() < 1e-12 * p.eps_a);
            assert!(ftft_gaussian(&p, omega, -10.0 * p.t_over()).norm() < 1e-12 * p.eps_a);
        }
    }

    #[test]
    fn ftft_is_linear_in_combination() {
        let p1 = GaussianPulse::new(0.7, 2.0, 6.8).unwrap();
        let p2 = GaussianPulse::new(1.3, 2.5, 7.2).unwrap();
        let basis = GaussianBasis::new(vec![p1.clone(), p2.clone()]).unwrap();
        let grid = [6.9, 7.1];
        let d = DVector::from_vec(vec![C64::new(0.3, -0.4), C64::new(-1.1, 0.2)]);
        for t in [-3.0, 0.0, 5.0, 40.0] {
            let b = basis_matrix(&basis, &grid, TimeHorizon::Finite(t));
            let combined = &b * &d;
            for (row, &omega) in grid.iter().enumerate() {
                let direct =
                    d[0] * ftft_gaussian(&p1, omega, t) + d[1] * ftft_gaussian(&p2, omega, t);
                assert!((combined[row] - direct).norm() < 1e-12 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn basis_matrix_single_pulse_is_amplitude() {
        let p = GaussianPulse::new(0.8, 2.0, 7.0).unwrap();
        let basis = GaussianBasis::new(vec![p]).unwrap();
        let b = basis_matrix(&basis, &[7.0], TimeHorizon::Infinite);
        assert!((b[(0, 0)] - C64::new(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn basis_matrix_distinct_centers_is_nonsingular() {
        let grid: Vec<f64> = (0..8).map(|i| 6.5 + 0.15 * i as f64).collect();
        let basis = GaussianBasis::covering(&grid, 1.0, 6.0).unwrap();
        let b = basis_matrix(&basis, &grid, TimeHorizon::Infinite);
        assert!(b.determinant().norm() > 0.0);
    }

    #[test]
    fn basis_matrix_vanishes_before_onset() {
        let grid: Vec<f64> = (0..4).map(|i| 6.5 + 0.3 * i as f64).collect();
        let basis = GaussianBasis::covering(&grid, 1.0, 2.0).unwrap();
        let b = basis_matrix(&basis, &grid, TimeHorizon::Finite(-10.0 * basis.t_over()));
        assert!(b.iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn solve_d_single_pulse_identity() {
        let p = GaussianPulse::new(0.8, 2.0, 7.0).unwrap();
        let basis = GaussianBasis::new(vec![p]).unwrap();
        let target = DVector::from_vec(vec![C64::new(0.8, 0.0)]);
        let field = solve_d(&basis, &[7.0], &target).unwrap();
        assert!((field.d[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn solve_d_well_conditioned_residual() {
        let grid: Vec<f64> = (0..8).map(|i| 6.5 + 0.15 * i as f64).collect();
        let basis = GaussianBasis::covering(&grid, 1.0, 6.0).unwrap();
        let target = DVector::from_fn(8, |i, _| {
            C64::from_polar(0.2 + 0.1 * i as f64, TAU * i as f64 / 8.0)
        });
        let field = solve_d(&basis, &grid, &target).unwrap();
        let achieved = field.spectral_values(TimeHorizon::Infinite);
        let resid = (&achieved - &target).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(resid <= 1e-10, "residual {resid:e}");
    }

    #[test]
    fn solve_d_duplicate_pulses_is_singular() {
        let p = GaussianPulse::new(1.0, 2.0, 7.0).unwrap();
        let basis = GaussianBasis::new(vec![p.clone(), p]).unwrap();
        let target = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0)]);
        let err = solve_d(&basis, &[6.9, 7.1], &target).unwrap_err();
        assert!(matches!(err, Error::SingularBasis { .. }));
    }

    #[test]
    fn time_profile_peak_and_zero() {
        let p = GaussianPulse::new(1.0, 2.0, 7.0).unwrap();
        let basis = GaussianBasis::new(vec![p.clone()]).unwrap();
        let one = ShapedField {
            basis: basis.clone(),
            d: DVector::from_vec(vec![C64::new(1.0, 0.0)]),
            omega_grid: vec![7.0],
        };
        let peak = 1.0 / (2.0 * std::f64::consts::PI.sqrt() * 2.0);
        assert!((one.time_value(0.0).norm() - peak).abs() < 1e-14);
        let zero = ShapedField {
            basis,
            d: DVector::from_vec(vec![C64::default()]),
            omega_grid: vec![7.0],
        };
        for t in [-5.0, 0.0, 3.0] {
            assert_eq!(zero.time_value(t), C64::default());
        }
    }

    #[test]
    fn time_profile_transforms_back_to_spectrum() {
        let grid: Vec<f64> = (0..4).map(|i| 6.7 + 0.2 * i as f64).collect();
        let basis = GaussianBasis::covering(&grid, 1.0, 4.0).unwrap();
        let target = DVector::from_fn(4, |i, _| C64::from_polar(0.5 + 0.2 * i as f64, 0.9 * i as f64));
        let field = solve_d(&basis, &grid, &target).unwrap();
        // quadrature of ∫ ε_p(t)·e^{iωt} dt against the target spectrum
        let lo = -16.0 * 4.0;
        let hi = 16.0 * 4.0;
        let n = 1 << 16;
        let h = (hi - lo) / n as f64;
        for (row, &omega) in grid.iter().enumerate() {
            let f = |x: f64| field.time_value(x) * C64::from_polar(1.0, omega * x);
            let mut acc = f(lo) + f(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += C64::new(w, 0.0) * f(lo + i as f64 * h);
            }
            let integral = acc * C64::new(h / 3.0, 0.0);
            assert!(
                (integral - target[row]).norm() < 1e-6,
                "omega={omega}: {integral} vs {}",
                target[row]
            );
        }
    }
}
