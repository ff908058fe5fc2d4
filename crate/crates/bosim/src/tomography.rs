//! Two-qubit polarization-state tomography.
//!
//! The polarization state of a photon pair, one photon per beam, lives in
//! the four-dimensional space spanned by |HH⟩, |HV⟩, |VH⟩, |VV⟩ (first
//! label: first beam). A tomographic run measures coincidence counts behind
//! 16 pairs of polarization filters drawn from {H, V, D, A, R, L}, with
//!
//! ```text
//! |D⟩ = (|H⟩+|V⟩)/√2,  |A⟩ = (|H⟩−|V⟩)/√2,  |R/L⟩ = (|H⟩ ± i|V⟩)/√2,
//! ```
//!
//! and reconstructs the density matrix by maximum likelihood. The physical
//! parametrization
//!
//! ```text
//! ρ(T) = T†T / Tr(T†T),   T lower-triangular, 16 real parameters,
//! ```
//!
//! is positive semidefinite with unit trace for every parameter vector, so
//! the optimizer can roam freely. The likelihood is Poissonian: with
//! μ_k = counts_per_setting · ⟨ψ_k|ρ|ψ_k⟩ the objective is
//! Σ_k (n_k ln μ_k − μ_k), maximized by gradient ascent with a numerically
//! computed gradient and a backtracking step size. Accepted steps only ever
//! increase the likelihood, so the recorded trace is non-decreasing.
//!
//! Fidelity between two states uses F(ρ,σ) = (Tr√(√ρ σ √ρ))², evaluated by
//! eigendecomposition with tiny negative eigenvalues clamped to zero.

use nalgebra::{DMatrix, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{draw_poisson, point_seed};
use crate::fock::{ModeLabel, Path, PhotonicState, Polarization};

/// Allowed deviation from exact Hermiticity.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// Most negative admissible eigenvalue of a density matrix.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-10;

/// Allowed deviation of the trace from one.
pub const TRACE_TOLERANCE: f64 = 1e-10;

/// Eigenvalues below this magnitude are clamped to zero inside matrix
/// square roots.
pub const SQRT_CLAMP_TOLERANCE: f64 = 1e-12;

/// The optimizer stops once an iteration improves the log-likelihood by
/// less than this.
pub const LL_IMPROVEMENT_TOLERANCE: f64 = 1e-9;

/// Iteration cap; hitting it flags the reconstruction as non-converged.
pub const MAX_MLE_ITERATIONS: usize = 10_000;

/// Floor applied to expected counts inside the log-likelihood so zero
/// predicted probability stays finite.
const MU_FLOOR: f64 = 1e-12;

/// Step used for central-difference gradients of the log-likelihood.
const GRADIENT_STEP: f64 = 1e-6;

/// Smallest line-search step before the search gives up.
const MIN_LINE_SEARCH_STEP: f64 = 1e-18;

/// Ordered basis labels of the two-photon polarization space.
pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

/// The canonical 16 filter settings.
pub const CANONICAL_SETTING_LABELS: [&str; 16] = [
    "HH", "HV", "VH", "VV", "HD", "HL", "VD", "VL", "DH", "DV", "DD", "DL", "LH", "LV", "LD", "LL",
];

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Single-photon polarization ket in the (H, V) basis.
fn single_ket(which: char) -> Result<Vector2<Complex64>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ok(match which {
        'H' => Vector2::new(real(1.0), real(0.0)),
        'V' => Vector2::new(real(0.0), real(1.0)),
        'D' => Vector2::new(real(r), real(r)),
        'A' => Vector2::new(real(r), real(-r)),
        'R' => Vector2::new(real(r), Complex64::new(0.0, r)),
        'L' => Vector2::new(real(r), Complex64::new(0.0, -r)),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown polarization label {other:?}"
            )))
        }
    })
}

/// Product ket |xy⟩ = |x⟩ ⊗ |y⟩ over the (HH, HV, VH, VV) basis.
pub fn pair_ket(label: &str) -> Result<Vector4<Complex64>> {
    let mut chars = label.chars();
    let (first, second) = match (chars.next(), chars.next(), chars.next()) {
        (Some(f), Some(s), None) => (f, s),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "setting label must be two letters, got {label:?}"
            )))
        }
    };
    let f = single_ket(first)?;
    let s = single_ket(second)?;
    Ok(f.kronecker(&s))
}

/// One tomographic filter setting: a label like "HD" and the projector ket.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    pub label: String,
    ket: Vector4<Complex64>,
}

impl MeasurementSetting {
    pub fn new(label: &str) -> Result<Self> {
        Ok(Self {
            label: label.to_string(),
            ket: pair_ket(label)?,
        })
    }

    pub fn ket(&self) -> &Vector4<Complex64> {
        &self.ket
    }
}

/// Tomography configuration: the projector set, the expected counts behind
/// each setting, and the RNG seed for simulated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographySettings {
    pub projectors: Vec<MeasurementSetting>,
    pub counts_per_setting: f64,
    pub rng_seed: u64,
}

/// Expected counts behind each filter setting when none is configured.
pub const DEFAULT_COUNTS_PER_SETTING: f64 = 5000.0;

impl Default for TomographySettings {
    fn default() -> Self {
        let projectors = CANONICAL_SETTING_LABELS
            .iter()
            .map(|label| MeasurementSetting::new(label).expect("canonical labels are valid"))
            .collect();
        Self {
            projectors,
            counts_per_setting: DEFAULT_COUNTS_PER_SETTING,
            rng_seed: crate::experiments::DEFAULT_SEED,
        }
    }
}

impl TomographySettings {
    /// Check the configuration: positive counts and a tomographically
    /// complete projector set (the 16 projectors must span the full
    /// operator space, i.e. their Gram matrix has rank 16).
    pub fn validate(&self) -> Result<()> {
        if !self.counts_per_setting.is_finite() || self.counts_per_setting <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "counts per setting must be positive, got {}",
                self.counts_per_setting
            )));
        }
        if self.projectors.len() != 16 {
            return Err(Error::InvalidParameter(format!(
                "need 16 settings, got {}",
                self.projectors.len()
            )));
        }
        if !self.is_complete() {
            return Err(Error::InvalidParameter(
                "projector set is not tomographically complete".into(),
            ));
        }
        Ok(())
    }

    /// Rank test on the Gram matrix G_ij = |⟨ψ_i|ψ_j⟩|² of the projectors
    /// viewed as vectors in operator space.
    pub fn is_complete(&self) -> bool {
        let n = self.projectors.len();
        let mut gram = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let ov = self.projectors[i].ket.dotc(&self.projectors[j].ket);
                gram[(i, j)] = ov.norm_sqr();
            }
        }
        let eig = gram.symmetric_eigen();
        let max = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        let rank = eig
            .eigenvalues
            .iter()
            .filter(|&&lam| lam > 1e-10 * max.max(1.0))
            .count();
        rank == n
    }
}

/// A 4×4 polarization density matrix over the (HH, HV, VH, VV) basis:
/// Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Matrix4<Complex64>,
}

impl DensityMatrix {
    /// Validate and wrap a matrix.
    pub fn from_matrix(matrix: Matrix4<Complex64>) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let dev = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if dev > HERMITICITY_TOLERANCE {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian: entry ({i},{j}) deviates by {dev:.2e}"
                    )));
                }
            }
        }
        let trace = matrix.trace();
        if (trace - real(1.0)).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {trace} is not 1"
            )));
        }
        let eig = hermitian_part(&matrix).symmetric_eigen();
        if let Some(lam) = eig
            .eigenvalues
            .iter()
            .find(|&&lam| lam < -EIGENVALUE_TOLERANCE)
        {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {lam:.2e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Projector onto a pure state; the ket is normalized first.
    pub fn from_pure(ket: &Vector4<Complex64>) -> Result<Self> {
        let n2 = ket.norm_squared();
        if n2 <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        Self::from_matrix(ket * ket.adjoint() / real(n2))
    }

    /// The maximally mixed state I/4.
    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Matrix4::identity() * real(0.25),
        }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    /// ⟨ψ|ρ|ψ⟩ for a (not necessarily normalized) ket.
    pub fn expectation(&self, ket: &Vector4<Complex64>) -> f64 {
        expectation_of(&self.matrix, ket)
    }

    /// JSON artifact: the basis order plus the 4×4 entries as [re, im]
    /// pairs.
    pub fn to_json_string(&self) -> Result<String> {
        let artifact = DensityArtifact::from(self);
        Ok(serde_json::to_string_pretty(&artifact)?)
    }

    /// Parse and validate the JSON artifact.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let artifact: DensityArtifact = serde_json::from_str(json)?;
        artifact.into_density()
    }
}

#[derive(Serialize, Deserialize)]
struct DensityArtifact {
    basis: Vec<String>,
    entries: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityMatrix> for DensityArtifact {
    fn from(density: &DensityMatrix) -> Self {
        let entries = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let z = density.matrix[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        Self {
            basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
            entries,
        }
    }
}

impl DensityArtifact {
    fn into_density(self) -> Result<DensityMatrix> {
        let expected: Vec<String> = BASIS_LABELS.iter().map(|s| s.to_string()).collect();
        if self.basis != expected {
            return Err(Error::Parse(format!(
                "unexpected basis order {:?}",
                self.basis
            )));
        }
        if self.entries.len() != 4 || self.entries.iter().any(|row| row.len() != 4) {
            return Err(Error::Parse("entries must form a 4×4 matrix".into()));
        }
        let mut matrix = Matrix4::zeros();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                matrix[(i, j)] = Complex64::new(re, im);
            }
        }
        DensityMatrix::from_matrix(matrix)
    }
}

fn expectation_of(matrix: &Matrix4<Complex64>, ket: &Vector4<Complex64>) -> f64 {
    (ket.adjoint() * matrix * ket)[(0, 0)].re
}

fn hermitian_part(matrix: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    (matrix + matrix.adjoint()) * real(0.5)
}

/// √M for Hermitian positive semidefinite M, with numerically tiny negative
/// eigenvalues clamped to zero.
fn sqrt_psd(matrix: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let eig = hermitian_part(matrix).symmetric_eigen();
    let mut diag = Matrix4::<Complex64>::zeros();
    for i in 0..4 {
        let lam = eig.eigenvalues[i];
        let clamped = if lam < SQRT_CLAMP_TOLERANCE { 0.0 } else { lam };
        diag[(i, i)] = real(clamped.sqrt());
    }
    eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity F(ρ,σ) = (Tr√(√ρ σ √ρ))², clamped into [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let s = sqrt_psd(&rho.matrix);
    let inner = s * sigma.matrix * s;
    let eig = hermitian_part(&inner).symmetric_eigen();
    let root_sum: f64 = eig
        .eigenvalues
        .iter()
        .map(|&lam| if lam < SQRT_CLAMP_TOLERANCE { 0.0 } else { lam.sqrt() })
        .sum();
    (root_sum * root_sum).clamp(0.0, 1.0)
}

/// Trace distance T(ρ,σ) = ½ Σ |eigenvalues of ρ−σ|.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let diff = rho.matrix - sigma.matrix;
    let eig = hermitian_part(&diff).symmetric_eigen();
    0.5 * eig.eigenvalues.iter().map(|lam| lam.abs()).sum::<f64>()
}

/// Exact expected counts μ_k = counts_per_setting · ⟨ψ_k|ρ|ψ_k⟩ for every
/// setting.
pub fn expected_counts(rho: &DensityMatrix, settings: &TomographySettings) -> Result<Vec<f64>> {
    settings.validate()?;
    Ok(settings
        .projectors
        .iter()
        .map(|setting| settings.counts_per_setting * rho.expectation(&setting.ket).max(0.0))
        .collect())
}

/// Simulate one tomographic run: an independent Poisson draw around the
/// expected counts of every setting, deterministic under the configured
/// seed.
pub fn simulate_tomography(rho: &DensityMatrix, settings: &TomographySettings) -> Result<Vec<u64>> {
    let means = expected_counts(rho, settings)?;
    Ok(means
        .iter()
        .enumerate()
        .map(|(k, &mean)| {
            let mut rng = ChaCha8Rng::seed_from_u64(point_seed(settings.rng_seed, k as u64));
            draw_poisson(&mut rng, mean)
        })
        .collect())
}

/// Lower-triangular T from 16 real parameters: four real diagonal entries,
/// six complex sub-diagonal entries.
fn t_matrix(params: &[f64; 16]) -> Matrix4<Complex64> {
    let mut t = Matrix4::zeros();
    t[(0, 0)] = real(params[0]);
    t[(1, 1)] = real(params[1]);
    t[(2, 2)] = real(params[2]);
    t[(3, 3)] = real(params[3]);
    t[(1, 0)] = Complex64::new(params[4], params[5]);
    t[(2, 0)] = Complex64::new(params[6], params[7]);
    t[(2, 1)] = Complex64::new(params[8], params[9]);
    t[(3, 0)] = Complex64::new(params[10], params[11]);
    t[(3, 1)] = Complex64::new(params[12], params[13]);
    t[(3, 2)] = Complex64::new(params[14], params[15]);
    t
}

/// ρ(T) = T†T / Tr(T†T): positive semidefinite with unit trace for every
/// parameter vector. The all-zero vector maps to the maximally mixed state.
pub fn density_from_parameters(params: &[f64; 16]) -> Matrix4<Complex64> {
    let t = t_matrix(params);
    let m = t.adjoint() * t;
    let trace = m.trace().re;
    if trace <= f64::MIN_POSITIVE {
        return Matrix4::identity() * real(0.25);
    }
    m / real(trace)
}

/// Result of a maximum-likelihood reconstruction.
#[derive(Debug, Clone)]
pub struct MleReconstruction {
    pub density: DensityMatrix,
    /// False when the iteration cap was hit before the improvement dropped
    /// below [`LL_IMPROVEMENT_TOLERANCE`]; the result is still usable but
    /// should be treated as a warning.
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Log-likelihood after every accepted step, non-decreasing.
    pub log_likelihood_trace: Vec<f64>,
}

fn log_likelihood(
    counts: &[f64],
    settings: &TomographySettings,
    params: &[f64; 16],
) -> f64 {
    let rho = density_from_parameters(params);
    counts
        .iter()
        .zip(&settings.projectors)
        .map(|(&n, setting)| {
            let p = expectation_of(&rho, &setting.ket).max(0.0);
            let mu = (settings.counts_per_setting * p).max(MU_FLOOR);
            n * mu.ln() - mu
        })
        .sum()
}

/// Reconstruct the density matrix that maximizes the Poisson likelihood of
/// the measured counts, by gradient ascent over the ρ(T) parametrization.
pub fn mle_reconstruct(counts: &[f64], settings: &TomographySettings) -> Result<MleReconstruction> {
    settings.validate()?;
    if counts.len() != settings.projectors.len() {
        return Err(Error::InvalidCounts(format!(
            "expected {} counts, got {}",
            settings.projectors.len(),
            counts.len()
        )));
    }
    if counts.iter().any(|n| !n.is_finite() || *n < 0.0) {
        return Err(Error::InvalidCounts(
            "counts must be finite and non-negative".into(),
        ));
    }
    if counts.iter().all(|&n| n == 0.0) {
        return Err(Error::InvalidCounts(
            "all counts are zero; nothing to reconstruct".into(),
        ));
    }

    let objective = |params: &[f64; 16]| log_likelihood(counts, settings, params);

    let mut params = [0.0; 16];
    for p in params.iter_mut().take(4) {
        *p = 0.5;
    }
    let mut ll = objective(&params);
    let mut trace = vec![ll];
    let mut step = 1e-4;
    let mut converged = false;
    let mut iterations = 0;
    let mut previous: Option<([f64; 16], [f64; 16])> = None;

    for iter in 1..=MAX_MLE_ITERATIONS {
        iterations = iter;
        let mut grad = [0.0; 16];
        for i in 0..16 {
            let mut up = params;
            up[i] += GRADIENT_STEP;
            let mut down = params;
            down[i] -= GRADIENT_STEP;
            grad[i] = (objective(&up) - objective(&down)) / (2.0 * GRADIENT_STEP);
        }

        // Conjugate-direction memory (Polak-Ribiere, reset when it stops
        // pointing uphill) keeps the ascent from zigzagging across the
        // nearly flat factor directions that appear for near-pure states.
        let mut direction = grad;
        if let Some((prev_grad, prev_dir)) = &previous {
            let denom: f64 = prev_grad.iter().map(|g| g * g).sum();
            if denom > 0.0 {
                let numer: f64 = grad
                    .iter()
                    .zip(prev_grad)
                    .map(|(g, p)| g * (g - p))
                    .sum();
                let beta = (numer / denom).max(0.0);
                for i in 0..16 {
                    direction[i] = grad[i] + beta * prev_dir[i];
                }
                let uphill: f64 = direction.iter().zip(&grad).map(|(d, g)| d * g).sum();
                if uphill <= 0.0 {
                    direction = grad;
                }
            }
        }
        previous = Some((grad, direction));

        // Backtrack until a step along the direction goes uphill, then keep
        // doubling and stepping while it still does, so one gradient
        // evaluation is milked for as much progress as it offers.
        let before = ll;
        let mut improved = false;
        while step >= MIN_LINE_SEARCH_STEP {
            let mut candidate = params;
            for i in 0..16 {
                candidate[i] += step * direction[i];
            }
            let candidate_ll = objective(&candidate);
            if candidate_ll > ll {
                params = candidate;
                ll = candidate_ll;
                trace.push(ll);
                improved = true;
                step *= 2.0;
            } else if improved {
                step *= 0.5;
                break;
            } else {
                step *= 0.5;
            }
        }
        if !improved {
            // No uphill step exists at any resolvable length: a maximum.
            converged = true;
            break;
        }
        if ll - before < LL_IMPROVEMENT_TOLERANCE {
            converged = true;
            break;
        }
    }

    let density = DensityMatrix::from_matrix(density_from_parameters(&params))?;
    Ok(MleReconstruction {
        density,
        converged,
        iterations,
        log_likelihood: ll,
        log_likelihood_trace: trace,
    })
}

/// The polarization state of the overlapped pair before it reaches the
/// merging splitter, (|HV⟩ + |VH⟩)/√2, as a two-beam photonic state.
pub fn entangled_target_state() -> PhotonicState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let hv = PhotonicState::vacuum()
        .create(ModeLabel::new(Path::A, Polarization::H, 0))
        .and_then(|s| s.create(ModeLabel::new(Path::B, Polarization::V, 0)))
        .expect("two photons fit the photon-number cap");
    let vh = PhotonicState::vacuum()
        .create(ModeLabel::new(Path::A, Polarization::V, 0))
        .and_then(|s| s.create(ModeLabel::new(Path::B, Polarization::H, 0)))
        .expect("two photons fit the photon-number cap");
    hv.scaled(real(r))
        .plus(&vh.scaled(real(r)))
        .normalize()
        .expect("state has unit norm")
}

/// The same state as a density matrix over the (HH, HV, VH, VV) basis.
pub fn entangled_target_density() -> DensityMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let ket = Vector4::new(real(0.0), real(r), real(r), real(0.0));
    DensityMatrix::from_pure(&ket).expect("Bell ket is a valid pure state")
}

/// CSV artifact for a counts vector: one `label,count` line per setting.
pub fn counts_to_csv(settings: &TomographySettings, counts: &[u64]) -> Result<String> {
    if counts.len() != settings.projectors.len() {
        return Err(Error::InvalidCounts(format!(
            "expected {} counts, got {}",
            settings.projectors.len(),
            counts.len()
        )));
    }
    let mut out = String::from("setting,count\n");
    for (setting, count) in settings.projectors.iter().zip(counts) {
        out.push_str(&format!("{},{}\n", setting.label, count));
    }
    Ok(out)
}

/// Parse a counts CSV back into the order given by `settings`, matching on
/// the setting labels.
pub fn counts_from_csv(settings: &TomographySettings, csv: &str) -> Result<Vec<f64>> {
    let mut lines = csv.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty counts CSV".into()))?;
    if header != "setting,count" {
        return Err(Error::Parse(format!(
            "unexpected counts CSV header: {header:?}"
        )));
    }
    let mut by_label = std::collections::HashMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (label, count) = line.split_once(',').ok_or_else(|| {
            Error::Parse(format!("line {}: expected label,count", lineno + 2))
        })?;
        let count: f64 = count
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: count: {e}", lineno + 2)))?;
        if by_label.insert(label.to_string(), count).is_some() {
            return Err(Error::Parse(format!(
                "line {}: duplicate setting {label:?}",
                lineno + 2
            )));
        }
    }
    settings
        .projectors
        .iter()
        .map(|setting| {
            by_label.get(&setting.label).copied().ok_or_else(|| {
                Error::Parse(format!("missing count for setting {:?}", setting.label))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn hv_density() -> DensityMatrix {
        DensityMatrix::from_pure(&pair_ket("HV").unwrap()).unwrap()
    }

    #[test]
    fn canonical_settings_are_tomographically_complete() {
        let settings = TomographySettings::default();
        assert!(settings.validate().is_ok());
        assert!(settings.is_complete());
    }

    #[test]
    fn degenerate_projector_sets_are_rejected() {
        let mut settings = TomographySettings::default();
        let hh = settings.projectors[0].clone();
        for slot in settings.projectors.iter_mut() {
            *slot = hh.clone();
        }
        assert!(!settings.is_complete());
        assert!(settings.validate().is_err());
    }

    #[test]
    fn expected_counts_match_the_projection_rules() {
        let settings = TomographySettings::default();
        let means = expected_counts(&hv_density(), &settings).unwrap();
        let index = |label: &str| {
            settings
                .projectors
                .iter()
                .position(|s| s.label == label)
                .unwrap()
        };
        let n = settings.counts_per_setting;
        assert_relative_eq!(means[index("HV")], n, epsilon = 1e-9);
        assert_relative_eq!(means[index("HH")], 0.0, epsilon = 1e-9);
        assert_relative_eq!(means[index("DD")], n / 4.0, epsilon = 1e-9);
        assert_relative_eq!(means[index("HD")], n / 2.0, epsilon = 1e-9);
        assert_relative_eq!(means[index("LL")], n / 4.0, epsilon = 1e-9);
    }

    #[test]
    fn simulated_counts_are_deterministic_under_the_seed() {
        let settings = TomographySettings::default();
        let a = simulate_tomography(&hv_density(), &settings).unwrap();
        let b = simulate_tomography(&hv_density(), &settings).unwrap();
        assert_eq!(a, b);

        let reseeded = TomographySettings {
            rng_seed: 7,
            ..TomographySettings::default()
        };
        let c = simulate_tomography(&hv_density(), &reseeded).unwrap();
        assert_ne!(a, c);

        let hv = settings
            .projectors
            .iter()
            .position(|s| s.label == "HV")
            .unwrap();
        let hh = settings
            .projectors
            .iter()
            .position(|s| s.label == "HH")
            .unwrap();
        assert!((a[hv] as f64 - 5000.0).abs() < 5.0 * 5000.0_f64.sqrt());
        assert_eq!(a[hh], 0);
    }

    #[test]
    fn density_matrix_validation_rejects_bad_matrices() {
        let mut not_hermitian = Matrix4::identity() * real(0.25);
        not_hermitian[(0, 1)] = real(0.1);
        assert!(DensityMatrix::from_matrix(not_hermitian).is_err());

        let wrong_trace = Matrix4::identity() * real(0.5);
        assert!(DensityMatrix::from_matrix(wrong_trace).is_err());

        let mut negative = Matrix4::zeros();
        negative[(0, 0)] = real(1.5);
        negative[(1, 1)] = real(-0.5);
        assert!(DensityMatrix::from_matrix(negative).is_err());
    }

    #[test]
    fn fidelity_ground_rules() {
        let hv = hv_density();
        let vh = DensityMatrix::from_pure(&pair_ket("VH").unwrap()).unwrap();
        let mixed = DensityMatrix::maximally_mixed();

        assert!((fidelity(&hv, &hv) - 1.0).abs() < 1e-10);
        assert!(fidelity(&hv, &vh).abs() < 1e-10);
        assert!((fidelity(&hv, &mixed) - 0.25).abs() < 1e-10);
        assert!((fidelity(&hv, &mixed) - fidelity(&mixed, &hv)).abs() < 1e-10);

        let bell = entangled_target_density();
        assert!((fidelity(&bell, &mixed) - 0.25).abs() < 1e-10);
        // For a pure second argument the fidelity reduces to ⟨ψ|ρ|ψ⟩.
        let expectation = mixed.expectation(&pair_ket("HV").unwrap());
        assert!((fidelity(&mixed, &hv) - expectation).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_ground_rules() {
        let hv = hv_density();
        let vh = DensityMatrix::from_pure(&pair_ket("VH").unwrap()).unwrap();
        assert!((trace_distance(&hv, &vh) - 1.0).abs() < 1e-10);
        assert!(trace_distance(&hv, &hv).abs() < 1e-12);
        assert!((trace_distance(&hv, &DensityMatrix::maximally_mixed()) - 0.75).abs() < 1e-10);
    }

    #[test]
    fn mle_recovers_a_pure_state_from_noiseless_counts() {
        let settings = TomographySettings::default();
        let target = hv_density();
        let counts = expected_counts(&target, &settings).unwrap();
        let result = mle_reconstruct(&counts, &settings).unwrap();
        assert!(result.converged, "hit the iteration cap");
        let f = fidelity(&result.density, &target);
        assert!(f >= 0.999, "fidelity {f}");
    }

    #[test]
    fn mle_recovers_the_maximally_mixed_state_entrywise() {
        let settings = TomographySettings::default();
        let target = DensityMatrix::maximally_mixed();
        let counts = expected_counts(&target, &settings).unwrap();
        let result = mle_reconstruct(&counts, &settings).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dev = (result.density.matrix()[(i, j)] - target.matrix()[(i, j)]).norm();
                assert!(dev < 1e-3, "entry ({i},{j}) off by {dev:.2e}");
            }
        }
    }

    #[test]
    fn mle_reconstruction_from_poisson_counts_reaches_high_fidelity() {
        let settings = TomographySettings {
            rng_seed: 7,
            ..TomographySettings::default()
        };
        let target = hv_density();
        let counts: Vec<f64> = simulate_tomography(&target, &settings)
            .unwrap()
            .into_iter()
            .map(|n| n as f64)
            .collect();
        let result = mle_reconstruct(&counts, &settings).unwrap();
        let f = fidelity(&result.density, &target);
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn mle_recovery_grid_by_trace_distance() {
        let settings = TomographySettings::default();
        let targets = [
            hv_density(),
            entangled_target_density(),
            DensityMatrix::maximally_mixed(),
        ];
        for target in &targets {
            let counts = expected_counts(target, &settings).unwrap();
            let result = mle_reconstruct(&counts, &settings).unwrap();
            let dist = trace_distance(&result.density, target);
            assert!(dist < 1e-3, "trace distance {dist:.2e}");
        }
    }

    #[test]
    fn mle_log_likelihood_trace_is_non_decreasing() {
        let settings = TomographySettings::default();
        let counts: Vec<f64> = simulate_tomography(&entangled_target_density(), &settings)
            .unwrap()
            .into_iter()
            .map(|n| n as f64)
            .collect();
        let result = mle_reconstruct(&counts, &settings).unwrap();
        for window in result.log_likelihood_trace.windows(2) {
            assert!(window[1] >= window[0]);
        }
        assert_eq!(
            *result.log_likelihood_trace.last().unwrap(),
            result.log_likelihood
        );
    }

    #[test]
    fn mle_rejects_unusable_counts() {
        let settings = TomographySettings::default();
        assert!(matches!(
            mle_reconstruct(&[0.0; 16], &settings),
            Err(Error::InvalidCounts(_))
        ));
        assert!(matches!(
            mle_reconstruct(&[100.0; 15], &settings),
            Err(Error::InvalidCounts(_))
        ));
        let mut negative = [100.0; 16];
        negative[3] = -1.0;
        assert!(matches!(
            mle_reconstruct(&negative, &settings),
            Err(Error::InvalidCounts(_))
        ));
    }

    #[test]
    fn entangled_target_state_projections() {
        let state = entangled_target_state();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let project = |first: [(Complex64, Polarization); 2],
                       second: [(Complex64, Polarization); 2]|
         -> f64 {
            let firsts: Vec<(Complex64, ModeLabel)> = first
                .iter()
                .map(|&(c, pol)| (c, ModeLabel::new(Path::A, pol, 0)))
                .collect();
            let seconds: Vec<(Complex64, ModeLabel)> = second
                .iter()
                .map(|&(c, pol)| (c, ModeLabel::new(Path::B, pol, 0)))
                .collect();
            let projector = PhotonicState::vacuum()
                .create_superposed(&firsts)
                .and_then(|s| s.create_superposed(&seconds))
                .and_then(|s| s.normalize())
                .unwrap();
            state.projection_probability(&projector).unwrap()
        };
        let d = [(real(r), Polarization::H), (real(r), Polarization::V)];
        let a = [(real(r), Polarization::H), (real(-r), Polarization::V)];
        let h = [(real(1.0), Polarization::H), (real(0.0), Polarization::V)];
        let v = [(real(0.0), Polarization::H), (real(1.0), Polarization::V)];

        assert_relative_eq!(project(d, d), 0.5, epsilon = 1e-12);
        assert!(project(d, a) < 1e-20);
        assert_relative_eq!(project(h, v), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn density_json_round_trip() {
        let bell = entangled_target_density();
        let json = bell.to_json_string().unwrap();
        assert!(json.contains("\"basis\""));
        let parsed = DensityMatrix::from_json_str(&json).unwrap();
        assert_eq!(bell, parsed);

        let reordered = json.replace("\"HH\"", "\"XX\"");
        assert!(DensityMatrix::from_json_str(&reordered).is_err());
    }

    #[test]
    fn counts_csv_round_trip_matches_setting_order() {
        let settings = TomographySettings::default();
        let counts = simulate_tomography(&entangled_target_density(), &settings).unwrap();
        let csv = counts_to_csv(&settings, &counts).unwrap();
        let parsed = counts_from_csv(&settings, &csv).unwrap();
        let expected: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
        assert_eq!(parsed, expected);

        let missing = csv.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(counts_from_csv(&settings, &missing).is_err());
    }

    #[test]
    fn zero_parameter_vector_maps_to_the_mixed_state() {
        let rho = density_from_parameters(&[0.0; 16]);
        assert_eq!(rho, Matrix4::identity() * real(0.25));
    }

    proptest! {
        #[test]
        fn parametrized_densities_are_always_valid(params in proptest::array::uniform16(-2.0_f64..2.0)) {
            let rho = density_from_parameters(&params);
            prop_assert!(DensityMatrix::from_matrix(rho).is_ok());
        }

        #[test]
        fn fidelity_is_symmetric(
            a in proptest::array::uniform16(-1.0_f64..1.0),
            b in proptest::array::uniform16(-1.0_f64..1.0),
        ) {
            let rho = DensityMatrix::from_matrix(density_from_parameters(&a)).unwrap();
            let sigma = DensityMatrix::from_matrix(density_from_parameters(&b)).unwrap();
            let fab = fidelity(&rho, &sigma);
            let fba = fidelity(&sigma, &rho);
            prop_assert!((fab - fba).abs() < 1e-10, "{fab} vs {fba}");
            prop_assert!((0.0..=1.0).contains(&fab));
        }
    }
}
