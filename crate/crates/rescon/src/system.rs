//! Resonance-system data model, synthetic generator, binning and archive I/O.
//!
//! A [`ResonanceSystem`] holds the coarse-grained states |ᾱ⟩ (energies and
//! underlying bin widths), the complex overlap matrix R[α,κ] = ⟨ᾱ|κ⟩ and the
//! resonance dipoles ⟨κ|μ|g⟩. A [`BinnedSystem`] aggregates the ᾱ states into
//! N_A contiguous energy bins |Ā⟩, the representation used by the relative
//! control solver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{C64, CMatrix, HBAR_EV_FS};

/// Lorentzian profiles are truncated to zero beyond this many widths Γ_κ from
/// the resonance center. Keeps far-detuned resonances exactly disjoint while
/// capturing all but ~1e-2/25π of the line mass.
pub const SUPPORT_HALF_WIDTH_FACTOR: f64 = 25.0;

/// Coarse-grained material system: states |ᾱ⟩, overlaps with the resonances
/// |κ⟩ and the ground-to-resonance dipoles.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSystem {
    /// State energies E_α (eV), strictly increasing.
    pub e_alpha: Vec<f64>,
    /// Widths Δ_α (eV) of the underlying fine-grained bins, all positive.
    pub delta_alpha: Vec<f64>,
    /// Overlap matrix, N_α × N_Q; R[α,κ] = ⟨ᾱ|κ⟩.
    pub r: CMatrix,
    /// Dipole matrix elements ⟨κ|μ|g⟩, length N_Q.
    pub mu_kappa: Vec<C64>,
    /// Ground-state energy (eV).
    pub e_g: f64,
    /// Reduced Planck constant (eV·fs).
    pub hbar: f64,
}

impl ResonanceSystem {
    pub fn n_states(&self) -> usize {
        self.e_alpha.len()
    }

    pub fn n_resonances(&self) -> usize {
        self.r.ncols()
    }

    /// Checks the structural invariants; returns a message describing the
    /// first violation.
    pub fn validate(&self) -> Result<()> {
        let n = self.e_alpha.len();
        if n == 0 {
            return Err(Error::invalid("system has no states"));
        }
        if self.delta_alpha.len() != n || self.r.nrows() != n {
            return Err(Error::invalid(format!(
                "inconsistent state counts: {} energies, {} widths, {} overlap rows",
                n,
                self.delta_alpha.len(),
                self.r.nrows()
            )));
        }
        let n_q = self.r.ncols();
        if n_q == 0 || n_q > n {
            return Err(Error::invalid(format!(
                "need 1 <= N_Q <= N_alpha, got N_Q = {n_q}, N_alpha = {n}"
            )));
        }
        if self.mu_kappa.len() != n_q {
            return Err(Error::invalid(format!(
                "{} dipoles for {} resonances",
                self.mu_kappa.len(),
                n_q
            )));
        }
        if self.e_alpha.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("e_alpha must be strictly increasing"));
        }
        if self.delta_alpha.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::invalid("all delta_alpha must be positive"));
        }
        for kappa in 0..n_q {
            let norm2: f64 = (0..n).map(|a| self.r[(a, kappa)].norm_sqr()).sum();
            if !norm2.is_finite() || norm2 <= 0.0 {
                return Err(Error::invalid(format!(
                    "overlap column {kappa} has non-positive or non-finite norm"
                )));
            }
        }
        Ok(())
    }

    /// Energy span [min, max] of the state grid.
    pub fn span(&self) -> (f64, f64) {
        (self.e_alpha[0], self.e_alpha[self.e_alpha.len() - 1])
    }
}

/// Parameters of the synthetic generator, kept alongside archives for
/// reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n_alpha: usize,
    pub energy_window: (f64, f64),
    /// Lorentzian widths Γ_κ (eV), one per resonance.
    pub widths: Vec<f64>,
    /// Resonance centers E_κ (eV), one per resonance.
    pub centers: Vec<f64>,
    /// |⟨κ|μ|g⟩| magnitudes, one per resonance.
    pub dipole_magnitudes: Vec<f64>,
    pub seed: u64,
}

/// Builds a synthetic resonance system on a uniform energy grid.
///
/// |R[α,κ]|² follows a Lorentzian line profile of width Γ_κ centered at E_κ,
/// truncated at [`SUPPORT_HALF_WIDTH_FACTOR`]·Γ_κ and column-normalized to 1.
/// Entry phases are drawn uniformly from the seeded generator, so two calls
/// with equal parameters produce bit-identical systems.
pub fn generate_synthetic(
    n_alpha: usize,
    n_q: usize,
    energy_window: (f64, f64),
    widths: &[f64],
    centers: &[f64],
    dipole_magnitudes: &[f64],
    seed: u64,
) -> Result<ResonanceSystem> {
    let (e_l, e_h) = energy_window;
    if !(e_h > e_l) {
        return Err(Error::invalid(format!(
            "degenerate energy window [{e_l}, {e_h}]"
        )));
    }
    if n_q == 0 || n_q > n_alpha {
        return Err(Error::invalid(format!(
            "need 1 <= n_q <= n_alpha, got n_q = {n_q}, n_alpha = {n_alpha}"
        )));
    }
    if widths.len() != n_q || centers.len() != n_q || dipole_magnitudes.len() != n_q {
        return Err(Error::invalid(format!(
            "widths/centers/dipole_magnitudes must all have length n_q = {n_q}"
        )));
    }
    if let Some(g) = widths.iter().find(|&&g| !(g > 0.0)) {
        return Err(Error::invalid(format!("nonpositive width {g}")));
    }
    if let Some(c) = centers.iter().find(|&&c| c <= e_l || c >= e_h) {
        return Err(Error::invalid(format!(
            "center {c} outside energy window ({e_l}, {e_h})"
        )));
    }

    let de = (e_h - e_l) / n_alpha as f64;
    let e_alpha: Vec<f64> = (0..n_alpha).map(|i| e_l + (i as f64 + 0.5) * de).collect();
    let delta_alpha = vec![de; n_alpha];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = CMatrix::zeros(n_alpha, n_q);
    for a in 0..n_alpha {
        for k in 0..n_q {
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let detune = e_alpha[a] - centers[k];
            if detune.abs() <= SUPPORT_HALF_WIDTH_FACTOR * widths[k] {
                let lor = (widths[k] / std::f64::consts::TAU)
                    / (detune * detune + 0.25 * widths[k] * widths[k]);
                r[(a, k)] = C64::from_polar(lor.sqrt(), phi);
            }
        }
    }
    for k in 0..n_q {
        let norm2: f64 = (0..n_alpha).map(|a| r[(a, k)].norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::invalid(format!(
                "resonance {k} (center {}, width {}) has no support on the grid",
                centers[k], widths[k]
            )));
        }
        let scale = C64::new(1.0 / norm2.sqrt(), 0.0);
        for a in 0..n_alpha {
            r[(a, k)] *= scale;
        }
    }

    let mu_kappa = dipole_magnitudes.iter().map(|&m| C64::new(m, 0.0)).collect();
    let sys = ResonanceSystem {
        e_alpha,
        delta_alpha,
        r,
        mu_kappa,
        e_g: 0.0,
        hbar: HBAR_EV_FS,
    };
    sys.validate()?;
    Ok(sys)
}

/// Convenience wrapper taking the parameter struct.
pub fn generate_from_params(p: &GeneratorParams) -> Result<ResonanceSystem> {
    let n_q = p.widths.len();
    generate_synthetic(
        p.n_alpha,
        n_q,
        p.energy_window,
        &p.widths,
        &p.centers,
        &p.dipole_magnitudes,
        p.seed,
    )
}

/// Second-level reduction: the ᾱ states grouped into N_A contiguous energy
/// bins covering [E_L, E_H].
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSystem {
    /// N_A + 1 bin edges partitioning the window.
    pub bin_edges: Vec<f64>,
    /// Bin-center energies (eV).
    pub e_a: Vec<f64>,
    /// For each bin, the parent-state indices it contains.
    pub members: Vec<Vec<usize>>,
    /// Binned overlaps, N_A × N_Q; R_A[A,κ] = Σ_{α∈I_A} R[α,κ].
    pub r_a: CMatrix,
    /// Binned doorway dipoles, (i/ħ)⟨Ā|μ|g⟩, length N_A.
    pub mu_a: Vec<C64>,
    /// Source system.
    pub parent: ResonanceSystem,
}

impl BinnedSystem {
    pub fn n_bins(&self) -> usize {
        self.e_a.len()
    }

    pub fn n_resonances(&self) -> usize {
        self.r_a.ncols()
    }

    /// The covered energy window (E_L, E_H).
    pub fn window(&self) -> (f64, f64) {
        (self.bin_edges[0], self.bin_edges[self.bin_edges.len() - 1])
    }

    /// Bin-center transition frequencies ω_{A,g} = (E_A − E_g)/ħ in rad/fs.
    pub fn omega_grid(&self) -> Vec<f64> {
        self.e_a
            .iter()
            .map(|e| (e - self.parent.e_g) / self.parent.hbar)
            .collect()
    }
}

/// Partitions `window` into `n_a` uniform bins and aggregates the system.
///
/// R_A rows are member sums; μ^A comes from the doorway approximation,
/// μ^A[A] = Σ_{α∈I_A} (i/ħ) Σ_κ conj(R[α,κ])·μ_κ. States outside the window
/// are dropped; an empty bin is an error.
pub fn bin_system(sys: &ResonanceSystem, window: (f64, f64), n_a: usize) -> Result<BinnedSystem> {
    sys.validate()?;
    let (e_l, e_h) = window;
    if !(e_h > e_l) {
        return Err(Error::invalid(format!("degenerate window [{e_l}, {e_h}]")));
    }
    let (lo, hi) = sys.span();
    if e_l < lo || e_h > hi {
        return Err(Error::invalid(format!(
            "window [{e_l}, {e_h}] outside state grid span [{lo}, {hi}]"
        )));
    }
    if n_a == 0 {
        return Err(Error::invalid("need at least one bin"));
    }

    let width = (e_h - e_l) / n_a as f64;
    let bin_edges: Vec<f64> = (0..=n_a).map(|j| e_l + j as f64 * width).collect();
    let e_a: Vec<f64> = (0..n_a).map(|j| e_l + (j as f64 + 0.5) * width).collect();

    let mut members = vec![Vec::new(); n_a];
    for (alpha, &e) in sys.e_alpha.iter().enumerate() {
        if e < e_l || e > e_h {
            continue;
        }
        let j = (((e - e_l) / width) as usize).min(n_a - 1);
        members[j].push(alpha);
    }
    if let Some(j) = members.iter().position(|m| m.is_empty()) {
        return Err(Error::invalid(format!(
            "bin {j} [{}, {}] contains no states",
            bin_edges[j],
            bin_edges[j + 1]
        )));
    }

    let n_q = sys.n_resonances();
    let mut r_a = CMatrix::zeros(n_a, n_q);
    let mut mu_a = vec![C64::default(); n_a];
    let i_over_hbar = C64::new(0.0, 1.0 / sys.hbar);
    for (j, group) in members.iter().enumerate() {
        for &alpha in group {
            let mut dip = C64::default();
            for k in 0..n_q {
                r_a[(j, k)] += sys.r[(alpha, k)];
                dip += sys.r[(alpha, k)].conj() * sys.mu_kappa[k];
            }
            mu_a[j] += i_over_hbar * dip;
        }
    }

    Ok(BinnedSystem {
        bin_edges,
        e_a,
        members,
        r_a,
        mu_a,
        parent: sys.clone(),
    })
}

const ARCHIVE_VERSION: u32 = 1;

// JSON renders non-finite floats as `null`, so every numeric leaf is an
// Option on the wire; None maps back to NaN and is caught by validation with
// the field named.
#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    /// Row-major [re, im] pairs.
    data: Vec<[Option<f64>; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    e_alpha: Vec<Option<f64>>,
    delta_alpha: Vec<Option<f64>>,
    r: MatrixDoc,
    mu_kappa: Vec<[Option<f64>; 2]>,
    e_g: Option<f64>,
    hbar: Option<f64>,
}

fn wire(v: f64) -> Option<f64> {
    Some(v)
}

fn unwire(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// On-disk form of a system: versioned JSON with complex numbers as
/// [re, im] pairs and matrices row-major.
#[derive(Serialize, Deserialize)]
pub struct SystemArchive {
    format_version: u32,
    system: SystemDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorParams>,
}

fn check_finite(slice: &[Option<f64>], field: &str) -> Result<()> {
    if slice.iter().any(|v| !unwire(*v).is_finite()) {
        return Err(Error::Archive(format!("non-finite value in field `{field}`")));
    }
    Ok(())
}

/// Serializes a system (plus optional generator metadata) to JSON bytes.
pub fn save_archive(sys: &ResonanceSystem, generator: Option<&GeneratorParams>) -> Vec<u8> {
    let doc = SystemArchive {
        format_version: ARCHIVE_VERSION,
        system: SystemDoc {
            e_alpha: sys.e_alpha.iter().copied().map(wire).collect(),
            delta_alpha: sys.delta_alpha.iter().copied().map(wire).collect(),
            r: MatrixDoc {
                rows: sys.r.nrows(),
                cols: sys.r.ncols(),
                data: (0..sys.r.nrows())
                    .flat_map(|a| (0..sys.r.ncols()).map(move |k| (a, k)))
                    .map(|(a, k)| [wire(sys.r[(a, k)].re), wire(sys.r[(a, k)].im)])
                    .collect(),
            },
            mu_kappa: sys
                .mu_kappa
                .iter()
                .map(|c| [wire(c.re), wire(c.im)])
                .collect(),
            e_g: wire(sys.e_g),
            hbar: wire(sys.hbar),
        },
        generator: generator.cloned(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("archive serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

/// Parses and validates an archive produced by [`save_archive`].
///
/// Round-trips are bit-exact. Structural invariants are enforced; generated
/// column normalization is only advisory on load and deviations are logged.
pub fn load_archive(bytes: &[u8]) -> Result<(ResonanceSystem, Option<GeneratorParams>)> {
    let doc: SystemArchive = serde_json::from_slice(bytes)
        .map_err(|e| Error::Archive(format!("malformed archive: {e}")))?;
    if doc.format_version != ARCHIVE_VERSION {
        return Err(Error::Archive(format!(
            "unsupported format version {} (expected {ARCHIVE_VERSION})",
            doc.format_version
        )));
    }
    let s = doc.system;
    check_finite(&s.e_alpha, "e_alpha")?;
    check_finite(&s.delta_alpha, "delta_alpha")?;
    if s.r.data.len() != s.r.rows * s.r.cols {
        return Err(Error::Archive(format!(
            "overlap matrix has {} entries for {}x{} shape",
            s.r.data.len(),
            s.r.rows,
            s.r.cols
        )));
    }
    for (i, pair) in s.r.data.iter().enumerate() {
        if !unwire(pair[0]).is_finite() || !unwire(pair[1]).is_finite() {
            return Err(Error::Archive(format!("non-finite value in field `r[{i}]`")));
        }
    }
    for (i, pair) in s.mu_kappa.iter().enumerate() {
        if !unwire(pair[0]).is_finite() || !unwire(pair[1]).is_finite() {
            return Err(Error::Archive(format!(
                "non-finite value in field `mu_kappa[{i}]`"
            )));
        }
    }
    let e_g = unwire(s.e_g);
    let hbar = unwire(s.hbar);
    if !e_g.is_finite() {
        return Err(Error::Archive("non-finite value in field `e_g`".into()));
    }
    if !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::Archive("invalid value in field `hbar`".into()));
    }

    let r = DMatrix::from_fn(s.r.rows, s.r.cols, |a, k| {
        let [re, im] = s.r.data[a * s.r.cols + k];
        Complex64::new(unwire(re), unwire(im))
    });
    let sys = ResonanceSystem {
        e_alpha: s.e_alpha.into_iter().map(unwire).collect(),
        delta_alpha: s.delta_alpha.into_iter().map(unwire).collect(),
        r,
        mu_kappa: s
            .mu_kappa
            .iter()
            .map(|&[re, im]| C64::new(unwire(re), unwire(im)))
            .collect(),
        e_g,
        hbar,
    };
    sys.validate().map_err(|e| Error::Archive(e.to_string()))?;
    for k in 0..sys.n_resonances() {
        let norm2: f64 = (0..sys.n_states()).map(|a| sys.r[(a, k)].norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-9 {
            log::warn!("archive overlap column {k} has norm² {norm2:.6}, expected 1");
        }
    }
    Ok((sys, doc.generator))
}
