//! Two-photon Fock states over labeled bosonic modes.
//!
//! A mode is a triple of spatial path, polarization, and temporal index.
//! States live in the occupation-number representation: a state is a complex
//! amplitude for each occupation vector, and an occupation vector says how
//! many photons sit in each mode. Exchange symmetry is automatic in this
//! representation; there is no ordering of photons to get wrong.
//!
//! Creation operators act with the usual bosonic weight,
//!
//! ```text
//! a†_m |n_m⟩ = √(n_m + 1) |n_m + 1⟩,
//! ```
//!
//! so `a†_m a†_m |0⟩ = √2 |2_m⟩` and the normalized two-photon-in-one-mode
//! state is `(a†_m)²/√2 |0⟩`. Everything here caps the total photon number at
//! two, which is all the interference experiments need.
//!
//! Linear optical elements act by substitution on creation operators: a
//! transform with matrix `U` maps `a†_i ↦ Σ_j U_ji b†_j`. Unitary transforms
//! preserve inner products; a polarizer is the one non-unitary (projection)
//! transform in the crate. Transforms may relabel modes, which is how the
//! diagonal/antidiagonal basis is reached: with `a†_D = (a†_H + a†_V)/√2` and
//! `a†_A = (a†_H − a†_V)/√2`, the two-photon product `a†_H a†_V |0⟩` rewrites
//! to `(|2_D⟩ − |2_A⟩)/√2` because the cross terms `a†_D a†_A` cancel.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes with squared magnitude below this are dropped after arithmetic.
/// Keeps destructive interference from leaving ±1e-16 dust in the state map.
pub const AMPLITUDE_PRUNE_THRESHOLD: f64 = 1e-15;

/// A state counts as normalized when its L2 norm is within this of 1.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Deviation of U†U from the identity (max entry magnitude) tolerated when a
/// transform is declared unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Spatial paths through the apparatus: the two source arms, the two outputs
/// of a splitter drawn as a/b → a′/b′, and the two monitored outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    A,
    B,
    APrime,
    BPrime,
    Out1,
    Out2,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Path::A => "a",
            Path::B => "b",
            Path::APrime => "a'",
            Path::BPrime => "b'",
            Path::Out1 => "out1",
            Path::Out2 => "out2",
        };
        write!(f, "{s}")
    }
}

/// Polarization labels. `H`/`V` are the native basis; `D`/`A` are the
/// ±45° superpositions and appear as labels only after a basis-change
/// transform has rewritten a state onto them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
    D,
    A,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::H => "H",
            Polarization::V => "V",
            Polarization::D => "D",
            Polarization::A => "A",
        };
        write!(f, "{s}")
    }
}

/// One bosonic mode: where the photon is, how it is polarized, and which
/// temporal wavepacket slot it occupies. Two labels denote the same mode
/// exactly when all three coordinates match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub path: Path,
    pub polarization: Polarization,
    pub temporal: u8,
}

impl ModeLabel {
    pub fn new(path: Path, polarization: Polarization, temporal: u8) -> Self {
        Self {
            path,
            polarization,
            temporal,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.path, self.polarization, self.temporal)
    }
}

/// Photon counts per mode, sorted by label, zero entries omitted.
/// Total occupation never exceeds two photons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OccupationVector {
    counts: Vec<(ModeLabel, u32)>,
}

impl OccupationVector {
    /// The empty occupation (vacuum).
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// One photon in `mode`.
    pub fn single(mode: ModeLabel) -> Self {
        Self {
            counts: vec![(mode, 1)],
        }
    }

    /// One photon in each of two modes, or two photons in one mode when the
    /// labels coincide.
    pub fn pair(m1: ModeLabel, m2: ModeLabel) -> Self {
        if m1 == m2 {
            Self {
                counts: vec![(m1, 2)],
            }
        } else if m1 < m2 {
            Self {
                counts: vec![(m1, 1), (m2, 1)],
            }
        } else {
            Self {
                counts: vec![(m2, 1), (m1, 1)],
            }
        }
    }

    /// Total photon number.
    pub fn total_photons(&self) -> u32 {
        self.counts.iter().map(|(_, n)| n).sum()
    }

    /// Photons in `mode`.
    pub fn count(&self, mode: ModeLabel) -> u32 {
        self.counts
            .iter()
            .find(|(m, _)| *m == mode)
            .map_or(0, |(_, n)| *n)
    }

    /// Occupied modes with their counts, in label order.
    pub fn modes(&self) -> impl Iterator<Item = (ModeLabel, u32)> + '_ {
        self.counts.iter().copied()
    }

    /// The occupation with one more photon in `mode`, plus the new count of
    /// that mode (which supplies the √n bosonic weight).
    fn with_added(&self, mode: ModeLabel) -> (Self, u32) {
        let mut counts = self.counts.clone();
        match counts.binary_search_by(|(m, _)| m.cmp(&mode)) {
            Ok(i) => {
                counts[i].1 += 1;
                let n = counts[i].1;
                (Self { counts }, n)
            }
            Err(i) => {
                counts.insert(i, (mode, 1));
                (Self { counts }, 1)
            }
        }
    }

    /// For a two-photon occupation, the pair of occupied modes (equal labels
    /// for a doubly occupied mode).
    fn as_two_photon(&self) -> Option<(ModeLabel, ModeLabel)> {
        match self.counts.as_slice() {
            [(m, 2)] => Some((*m, *m)),
            [(m1, 1), (m2, 1)] => Some((*m1, *m2)),
            _ => None,
        }
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return write!(f, "|vac⟩");
        }
        write!(f, "|")?;
        for (i, (mode, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{n}_({mode})")?;
        }
        write!(f, "⟩")
    }
}

/// Whether a transform is a proper unitary or a flagged projection
/// (the polarizer, which discards amplitude).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Unitary,
    Projection,
}

/// A linear map on creation operators: `a†_{inputs[i]} ↦ Σ_j M[j][i] a†_{outputs[j]}`.
///
/// Inputs and outputs usually coincide (wave plates, beam splitters); they
/// differ for basis changes that rewrite a state onto derived labels such as
/// D/A. The matrix is square either way. Modes a state occupies that are not
/// listed as inputs pass through unchanged.
#[derive(Debug, Clone)]
pub struct ModeTransform {
    inputs: Vec<ModeLabel>,
    outputs: Vec<ModeLabel>,
    matrix: DMatrix<Complex64>,
    kind: TransformKind,
}

impl ModeTransform {
    /// A transform that must be unitary within [`UNITARITY_TOLERANCE`].
    pub fn unitary(
        inputs: Vec<ModeLabel>,
        outputs: Vec<ModeLabel>,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self> {
        let t = Self::validated(inputs, outputs, matrix, TransformKind::Unitary)?;
        let n = t.matrix.nrows();
        let gram = t.matrix.adjoint() * &t.matrix;
        let deviation = (gram - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary(format!(
                "U†U deviates from identity by {deviation:.3e}"
            )));
        }
        Ok(t)
    }

    /// A deliberately non-unitary transform (projection); no unitarity check.
    pub fn projection(
        inputs: Vec<ModeLabel>,
        outputs: Vec<ModeLabel>,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self> {
        Self::validated(inputs, outputs, matrix, TransformKind::Projection)
    }

    fn validated(
        inputs: Vec<ModeLabel>,
        outputs: Vec<ModeLabel>,
        matrix: DMatrix<Complex64>,
        kind: TransformKind,
    ) -> Result<Self> {
        let n = inputs.len();
        if n == 0 {
            return Err(Error::DomainMismatch("empty mode list".into()));
        }
        if outputs.len() != n {
            return Err(Error::DomainMismatch(format!(
                "{} inputs vs {} outputs",
                n,
                outputs.len()
            )));
        }
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DomainMismatch(format!(
                "matrix is {}×{}, expected {n}×{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (i, m) in inputs.iter().enumerate() {
            if inputs[i + 1..].contains(m) {
                return Err(Error::DomainMismatch(format!("duplicate input mode {m}")));
            }
        }
        for (i, m) in outputs.iter().enumerate() {
            if outputs[i + 1..].contains(m) {
                return Err(Error::DomainMismatch(format!("duplicate output mode {m}")));
            }
        }
        Ok(Self {
            inputs,
            outputs,
            matrix,
            kind,
        })
    }

    pub fn is_unitary(&self) -> bool {
        self.kind == TransformKind::Unitary
    }

    pub fn inputs(&self) -> &[ModeLabel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[ModeLabel] {
        &self.outputs
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Image of one creation operator under the substitution; identity for
    /// modes outside the input list.
    fn image(&self, mode: ModeLabel) -> Vec<(Complex64, ModeLabel)> {
        match self.inputs.iter().position(|m| *m == mode) {
            Some(col) => self
                .outputs
                .iter()
                .enumerate()
                .map(|(row, out)| (self.matrix[(row, col)], *out))
                .collect(),
            None => vec![(Complex64::new(1.0, 0.0), mode)],
        }
    }
}

/// A superposition of occupation vectors with at most two photons.
#[derive(Debug, Clone)]
pub struct PhotonicState {
    amplitudes: BTreeMap<OccupationVector, Complex64>,
    normalized: bool,
}

impl PhotonicState {
    /// The vacuum, which is trivially normalized.
    pub fn vacuum() -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(OccupationVector::vacuum(), Complex64::new(1.0, 0.0));
        Self {
            amplitudes,
            normalized: true,
        }
    }

    /// Build a state from raw amplitudes; the result is treated as
    /// unnormalized until [`normalize`](Self::normalize) is called.
    pub fn from_amplitudes<I>(amplitudes: I) -> Self
    where
        I: IntoIterator<Item = (OccupationVector, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (occ, amp) in amplitudes {
            let entry = map.entry(occ).or_insert_with(|| Complex64::new(0.0, 0.0));
            *entry += amp;
        }
        let mut state = Self {
            amplitudes: map,
            normalized: false,
        };
        state.prune();
        state
    }

    /// Amplitude of one occupation vector (zero when absent).
    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.amplitudes
            .get(occ)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// All stored (occupation, amplitude) pairs in label order.
    pub fn amplitudes(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Whether [`normalize`](Self::normalize) has vouched for unit norm
    /// (unitary transforms preserve the flag, projections clear it).
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Apply a creation operator: `a†_mode` with the bosonic √(n+1) weight.
    /// Fails if any component already holds two photons.
    pub fn create(&self, mode: ModeLabel) -> Result<Self> {
        let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            if occ.total_photons() >= 2 {
                return Err(Error::PhotonNumberCap(format!(
                    "creation on {occ} would exceed two photons"
                )));
            }
            let (new_occ, n) = occ.with_added(mode);
            let entry = out
                .entry(new_occ)
                .or_insert_with(|| Complex64::new(0.0, 0.0));
            *entry += amp * (n as f64).sqrt();
        }
        let mut state = Self {
            amplitudes: out,
            normalized: false,
        };
        state.prune();
        Ok(state)
    }

    /// Apply a creation operator for a photon in a superposition of modes:
    /// `Σ_k c_k a†_{m_k}` applied to `self`.
    pub fn create_superposed(&self, photon: &[(Complex64, ModeLabel)]) -> Result<Self> {
        if photon.is_empty() {
            return Err(Error::InvalidParameter(
                "creation over an empty mode superposition".into(),
            ));
        }
        let mut acc: Option<Self> = None;
        for (coeff, mode) in photon {
            let term = self.create(*mode)?.scaled(*coeff);
            acc = Some(match acc {
                Some(s) => s.plus(&term),
                None => term,
            });
        }
        Ok(acc.expect("non-empty superposition"))
    }

    /// The unnormalized two-photon state `a†_φ a†_ψ |0⟩` for single-photon
    /// superpositions φ and ψ. Its norm is √(1 + |⟨φ|ψ⟩|²) for unit φ, ψ.
    pub fn two_photon(
        photon1: &[(Complex64, ModeLabel)],
        photon2: &[(Complex64, ModeLabel)],
    ) -> Result<Self> {
        Self::vacuum()
            .create_superposed(photon1)?
            .create_superposed(photon2)
    }

    /// Scalar multiple of the state (clears the normalized flag).
    pub fn scaled(&self, factor: Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(occ, amp)| (occ.clone(), amp * factor))
            .collect();
        let mut state = Self {
            amplitudes,
            normalized: false,
        };
        state.prune();
        state
    }

    /// Sum of two states (clears the normalized flag).
    pub fn plus(&self, other: &Self) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        for (occ, amp) in &other.amplitudes {
            let entry = amplitudes
                .entry(occ.clone())
                .or_insert_with(|| Complex64::new(0.0, 0.0));
            *entry += amp;
        }
        let mut state = Self {
            amplitudes,
            normalized: false,
        };
        state.prune();
        state
    }

    /// Squared L2 norm Σ|amplitude|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// L2 norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale to unit norm. A state whose amplitudes cancelled to nothing
    /// (complete destructive interference) cannot be normalized.
    pub fn normalize(&self) -> Result<Self> {
        let mut state = self.clone();
        state.prune();
        let norm = state.norm();
        if state.amplitudes.is_empty() || norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        for amp in state.amplitudes.values_mut() {
            *amp *= inv;
        }
        state.normalized = true;
        Ok(state)
    }

    /// ⟨self|other⟩ in the occupation basis.
    pub fn inner_product(&self, other: &Self) -> Complex64 {
        let (small, large, conj_small) = if self.amplitudes.len() <= other.amplitudes.len() {
            (&self.amplitudes, &other.amplitudes, true)
        } else {
            (&other.amplitudes, &self.amplitudes, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (occ, amp) in small {
            if let Some(other_amp) = large.get(occ) {
                acc += if conj_small {
                    amp.conj() * other_amp
                } else {
                    other_amp.conj() * amp
                };
            }
        }
        acc
    }

    /// Rewrite the state under a mode transform (creation-operator
    /// substitution). Transform inputs the state does not occupy act as the
    /// identity; an output label that already appears in the state without
    /// being an input is a domain mismatch.
    pub fn apply_transform(&self, transform: &ModeTransform) -> Result<Self> {
        let fresh_outputs: Vec<ModeLabel> = transform
            .outputs
            .iter()
            .filter(|m| !transform.inputs.contains(m))
            .copied()
            .collect();
        if !fresh_outputs.is_empty() {
            for occ in self.amplitudes.keys() {
                for (mode, _) in occ.modes() {
                    if fresh_outputs.contains(&mode) {
                        return Err(Error::DomainMismatch(format!(
                            "output mode {mode} already occupied in {occ}"
                        )));
                    }
                }
            }
        }

        let sqrt2 = std::f64::consts::SQRT_2;
        let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        let mut add = |occ: OccupationVector, amp: Complex64| {
            let entry = out
                .entry(occ)
                .or_insert_with(|| Complex64::new(0.0, 0.0));
            *entry += amp;
        };

        for (occ, amp) in &self.amplitudes {
            match occ.total_photons() {
                0 => add(occ.clone(), *amp),
                1 => {
                    let (mode, _) = occ.modes().next().expect("one photon");
                    for (c, m) in transform.image(mode) {
                        add(OccupationVector::single(m), amp * c);
                    }
                }
                2 => {
                    let (m1, m2) = occ.as_two_photon().expect("two photons");
                    // Coefficient of the ordered operator monomial a†_{m1} a†_{m2}:
                    // |2_m⟩ = (a†_m)²/√2 |0⟩ carries a 1/√2 relative to the
                    // product of operators.
                    let monomial = if m1 == m2 { amp / sqrt2 } else { *amp };
                    for (c1, o1) in transform.image(m1) {
                        for (c2, o2) in transform.image(m2) {
                            let w = monomial * c1 * c2;
                            // Reassembling a doubly occupied mode restores the
                            // √2: (a†_o)² |0⟩ = √2 |2_o⟩.
                            let w = if o1 == o2 { w * sqrt2 } else { w };
                            add(OccupationVector::pair(o1, o2), w);
                        }
                    }
                }
                n => {
                    return Err(Error::PhotonNumberCap(format!(
                        "occupation {occ} holds {n} photons"
                    )))
                }
            }
        }

        let mut state = Self {
            amplitudes: out,
            normalized: self.normalized && transform.is_unitary(),
        };
        state.prune();
        Ok(state)
    }

    /// |⟨projector|self⟩|² for a single normalized projector state. Both
    /// states must have been normalized.
    pub fn projection_probability(&self, projector: &Self) -> Result<f64> {
        if !self.normalized {
            return Err(Error::NotNormalized("state in projection_probability"));
        }
        if !projector.normalized {
            return Err(Error::NotNormalized("projector in projection_probability"));
        }
        Ok(projector.inner_product(self).norm_sqr())
    }

    /// Probability of landing in the subspace spanned by an orthonormal
    /// family of projector states: Σ_k |⟨b_k|self⟩|².
    pub fn subspace_projection_probability(&self, basis: &[Self]) -> Result<f64> {
        let mut acc = 0.0;
        for b in basis {
            acc += self.projection_probability(b)?;
        }
        Ok(acc)
    }

    /// First-quantized tensor amplitudes of a pure two-photon state: the
    /// symmetric coefficients c_{mn} of Σ c_{mn} |m⟩⊗|n⟩. A two-mode pair
    /// |1_m 1_n⟩ contributes 1/√2 on (m,n) and on (n,m); a doubly occupied
    /// mode contributes 1 on (m,m). Only meaningful for states whose every
    /// component holds exactly two photons.
    pub fn first_quantized_amplitudes(
        &self,
    ) -> Result<BTreeMap<(ModeLabel, ModeLabel), Complex64>> {
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut out = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            let (m1, m2) = occ.as_two_photon().ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "first-quantized form needs exactly two photons, got {occ}"
                ))
            })?;
            if m1 == m2 {
                *out.entry((m1, m1))
                    .or_insert_with(|| Complex64::new(0.0, 0.0)) += amp;
            } else {
                let half = amp / sqrt2;
                *out.entry((m1, m2))
                    .or_insert_with(|| Complex64::new(0.0, 0.0)) += half;
                *out.entry((m2, m1))
                    .or_insert_with(|| Complex64::new(0.0, 0.0)) += half;
            }
        }
        Ok(out)
    }

    fn prune(&mut self) {
        self.amplitudes
            .retain(|_, amp| amp.norm() >= AMPLITUDE_PRUNE_THRESHOLD);
    }
}

impl fmt::Display for PhotonicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return write!(f, "0");
        }
        for (i, (occ, amp)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.4}{:+.4}i)·{}", amp.re, amp.im, occ)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mode(path: Path, pol: Polarization, t: u8) -> ModeLabel {
        ModeLabel::new(path, pol, t)
    }

    fn h0() -> ModeLabel {
        mode(Path::Out1, Polarization::H, 0)
    }

    fn v0() -> ModeLabel {
        mode(Path::Out1, Polarization::V, 0)
    }

    fn v1() -> ModeLabel {
        mode(Path::Out1, Polarization::V, 1)
    }

    /// H/V → D/A rewrite on one path: a†_H ↦ (a†_D + a†_A)/√2,
    /// a†_V ↦ (a†_D − a†_A)/√2.
    fn da_change(path: Path, temporal: u8) -> ModeTransform {
        let r = FRAC_1_SQRT_2;
        ModeTransform::unitary(
            vec![
                mode(path, Polarization::H, temporal),
                mode(path, Polarization::V, temporal),
            ],
            vec![
                mode(path, Polarization::D, temporal),
                mode(path, Polarization::A, temporal),
            ],
            DMatrix::from_row_slice(2, 2, &[c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]),
        )
        .unwrap()
    }

    #[test]
    fn create_on_vacuum_gives_single_photon() {
        let state = PhotonicState::vacuum().create(h0()).unwrap();
        assert_relative_eq!(
            state.amplitude(&OccupationVector::single(h0())).re,
            1.0,
            epsilon = 1e-15
        );
        assert!(!state.is_normalized());
    }

    #[test]
    fn double_creation_carries_bosonic_sqrt2() {
        let state = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(h0())
            .unwrap();
        let amp = state.amplitude(&OccupationVector::pair(h0(), h0()));
        assert_relative_eq!(amp.re, std::f64::consts::SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn creation_order_is_irrelevant() {
        let hv = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(v0())
            .unwrap();
        let vh = PhotonicState::vacuum()
            .create(v0())
            .unwrap()
            .create(h0())
            .unwrap();
        for (occ, amp) in hv.amplitudes() {
            assert_eq!(*amp, vh.amplitude(occ));
        }
        assert_eq!(hv.amplitudes().count(), vh.amplitudes().count());
    }

    #[test]
    fn third_photon_is_rejected() {
        let two = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(v0())
            .unwrap();
        assert!(matches!(two.create(h0()), Err(Error::PhotonNumberCap(_))));
    }

    #[test]
    fn normalize_is_idempotent_on_unit_states() {
        let state = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(v0())
            .unwrap();
        assert_relative_eq!(state.norm(), 1.0, epsilon = 1e-15);
        let normalized = state.normalize().unwrap();
        assert!(normalized.is_normalized());
        assert_eq!(
            normalized.amplitude(&OccupationVector::pair(h0(), v0())),
            state.amplitude(&OccupationVector::pair(h0(), v0()))
        );
    }

    #[test]
    fn cancelled_state_cannot_be_normalized() {
        let plus = PhotonicState::vacuum().create(h0()).unwrap();
        let minus = plus.scaled(c(-1.0, 0.0));
        let zero = plus.plus(&minus);
        assert!(matches!(zero.normalize(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn inner_products_of_occupation_basis_states() {
        let hv = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(v0())
            .unwrap();
        let hh = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(h0())
            .unwrap();
        assert_relative_eq!(hv.inner_product(&hv).re, 1.0, epsilon = 1e-15);
        // a†a† gives √2|2⟩, so ⟨·|·⟩ = 2 before normalization.
        assert_relative_eq!(hh.inner_product(&hh).re, 2.0, epsilon = 1e-15);
        assert_eq!(hv.inner_product(&hh), c(0.0, 0.0));
    }

    #[test]
    fn two_photon_norm_tracks_single_photon_overlap() {
        // ‖a†_φ a†_ψ |0⟩‖ = √(1 + |⟨φ|ψ⟩|²) for unit φ, ψ.
        let overlap = 0.3_f64;
        let ortho = (1.0 - overlap * overlap).sqrt();
        let phi = vec![(c(1.0, 0.0), v0())];
        let psi = vec![(c(overlap, 0.0), v0()), (c(ortho, 0.0), v1())];
        let state = PhotonicState::two_photon(&phi, &psi).unwrap();
        assert_relative_eq!(
            state.norm(),
            (1.0 + overlap * overlap).sqrt(),
            epsilon = 1e-12
        );

        let disjoint = PhotonicState::two_photon(&phi, &[(c(1.0, 0.0), h0())]).unwrap();
        assert_relative_eq!(disjoint.norm(), 1.0, epsilon = 1e-12);

        let same = PhotonicState::two_photon(&phi, &phi).unwrap();
        assert_relative_eq!(same.norm(), std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn distinguishable_pair_projects_onto_dd_with_quarter_probability() {
        // Photons in orthogonal temporal slots: no exchange interference, so
        // the D⊗D outcome keeps the product value (1/2)·(1/2).
        let state = PhotonicState::two_photon(&[(c(1.0, 0.0), h0())], &[(c(1.0, 0.0), v1())])
            .unwrap()
            .normalize()
            .unwrap();
        let rewritten = state
            .apply_transform(&da_change(Path::Out1, 0))
            .unwrap()
            .apply_transform(&da_change(Path::Out1, 1))
            .unwrap();
        let dd_basis = dd_subspace(Path::Out1);
        let p = rewritten.subspace_projection_probability(&dd_basis).unwrap();
        assert_relative_eq!(p, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn indistinguishable_pair_projects_onto_dd_with_half_probability() {
        // Same temporal slot: a†_H a†_V |0⟩ = (|2_D⟩ − |2_A⟩)/√2, so the D⊗D
        // outcome doubles to 1/2 and the cross D/A outcomes vanish.
        let state = PhotonicState::two_photon(&[(c(1.0, 0.0), h0())], &[(c(1.0, 0.0), v0())])
            .unwrap()
            .normalize()
            .unwrap();
        let rewritten = state.apply_transform(&da_change(Path::Out1, 0)).unwrap();

        let d0 = mode(Path::Out1, Polarization::D, 0);
        let a0 = mode(Path::Out1, Polarization::A, 0);
        let two_d = PhotonicState::vacuum()
            .create(d0)
            .unwrap()
            .create(d0)
            .unwrap()
            .normalize()
            .unwrap();
        let two_a = PhotonicState::vacuum()
            .create(a0)
            .unwrap()
            .create(a0)
            .unwrap()
            .normalize()
            .unwrap();
        let da = PhotonicState::vacuum()
            .create(d0)
            .unwrap()
            .create(a0)
            .unwrap()
            .normalize()
            .unwrap();

        assert_relative_eq!(
            rewritten.projection_probability(&two_d).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            rewritten.projection_probability(&two_a).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(rewritten.projection_probability(&da).unwrap() < 1e-20);
    }

    /// Orthonormal basis of the "both photons D-polarized" subspace on one
    /// path, over temporal slots 0 and 1.
    fn dd_subspace(path: Path) -> Vec<PhotonicState> {
        let d0 = mode(path, Polarization::D, 0);
        let d1 = mode(path, Polarization::D, 1);
        [(d0, d0), (d1, d1), (d0, d1)]
            .iter()
            .map(|(m1, m2)| {
                PhotonicState::vacuum()
                    .create(*m1)
                    .unwrap()
                    .create(*m2)
                    .unwrap()
                    .normalize()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn projection_requires_normalized_inputs() {
        let raw = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(h0())
            .unwrap();
        let normalized = raw.normalize().unwrap();
        assert!(matches!(
            raw.projection_probability(&normalized),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            normalized.projection_probability(&raw),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn transform_rejects_occupied_fresh_output() {
        // The D/A rewrite on temporal slot 0 names D as an output; a state
        // that already holds a D photon outside the input list is inconsistent.
        let d0 = mode(Path::Out1, Polarization::D, 0);
        let state = PhotonicState::vacuum()
            .create(d0)
            .unwrap()
            .create(h0())
            .unwrap();
        assert!(matches!(
            state.apply_transform(&da_change(Path::Out1, 0)),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn unitary_constructor_rejects_non_unitary_matrix() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        );
        assert!(matches!(
            ModeTransform::unitary(vec![h0(), v0()], vec![h0(), v0()], m),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn unitary_transform_preserves_norm_and_inner_products() {
        let state = PhotonicState::two_photon(
            &[(c(0.6, 0.0), h0()), (c(0.0, 0.8), v0())],
            &[(c(FRAC_1_SQRT_2, 0.0), v0()), (c(0.0, -FRAC_1_SQRT_2), v1())],
        )
        .unwrap();
        let other = PhotonicState::two_photon(&[(c(1.0, 0.0), h0())], &[(c(1.0, 0.0), v1())])
            .unwrap();
        let t = da_change(Path::Out1, 0);
        let before = other.inner_product(&state);
        let after = other
            .apply_transform(&t)
            .unwrap()
            .inner_product(&state.apply_transform(&t).unwrap());
        assert_relative_eq!(state.apply_transform(&t).unwrap().norm(), state.norm(), epsilon = 1e-10);
        assert_relative_eq!(before.re, after.re, epsilon = 1e-10);
        assert_relative_eq!(before.im, after.im, epsilon = 1e-10);
    }

    #[test]
    fn da_rewrite_matches_two_mode_interference() {
        // a†_H a†_V |0⟩ ↦ (|2_D⟩ − |2_A⟩)/√2 with no |1_D 1_A⟩ term.
        let state = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(v0())
            .unwrap()
            .apply_transform(&da_change(Path::Out1, 0))
            .unwrap();
        let d0 = mode(Path::Out1, Polarization::D, 0);
        let a0 = mode(Path::Out1, Polarization::A, 0);
        assert_relative_eq!(
            state.amplitude(&OccupationVector::pair(d0, d0)).re,
            FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            state.amplitude(&OccupationVector::pair(a0, a0)).re,
            -FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert_eq!(
            state.amplitude(&OccupationVector::pair(d0, a0)),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn first_quantized_form_of_symmetrized_pair() {
        // |1_H 1_V⟩ reads as (|HV⟩ + |VH⟩)/√2 in first quantization, so the
        // ordered H⊗V coefficient is 1/√2 and the ordered-projection
        // probability is 1/2.
        let state = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(v0())
            .unwrap();
        let tensor = state.first_quantized_amplitudes().unwrap();
        assert_relative_eq!(tensor[&(h0(), v0())].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(tensor[&(v0(), h0())].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(tensor[&(h0(), v0())].norm_sqr(), 0.5, epsilon = 1e-15);

        let doubled = PhotonicState::vacuum()
            .create(h0())
            .unwrap()
            .create(h0())
            .unwrap()
            .normalize()
            .unwrap();
        let tensor = doubled.first_quantized_amplitudes().unwrap();
        assert_relative_eq!(tensor[&(h0(), h0())].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn first_quantized_form_rejects_single_photons() {
        let one = PhotonicState::vacuum().create(h0()).unwrap();
        assert!(one.first_quantized_amplitudes().is_err());
    }

    #[test]
    fn probabilities_over_complete_da_basis_sum_to_one() {
        let overlap = 0.75_f64;
        let ortho = (1.0 - overlap * overlap).sqrt();
        let state = PhotonicState::two_photon(
            &[(c(1.0, 0.0), h0())],
            &[(c(overlap, 0.0), v0()), (c(ortho, 0.0), v1())],
        )
        .unwrap()
        .normalize()
        .unwrap()
        .apply_transform(&da_change(Path::Out1, 0))
        .unwrap()
        .apply_transform(&da_change(Path::Out1, 1))
        .unwrap();

        // Every two-photon occupation over {D, A} × {0, 1} on this path.
        let modes = [
            mode(Path::Out1, Polarization::D, 0),
            mode(Path::Out1, Polarization::D, 1),
            mode(Path::Out1, Polarization::A, 0),
            mode(Path::Out1, Polarization::A, 1),
        ];
        let mut basis = Vec::new();
        for (i, m1) in modes.iter().enumerate() {
            for m2 in modes.iter().skip(i) {
                basis.push(
                    PhotonicState::vacuum()
                        .create(*m1)
                        .unwrap()
                        .create(*m2)
                        .unwrap()
                        .normalize()
                        .unwrap(),
                );
            }
        }
        let total = state.subspace_projection_probability(&basis).unwrap();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
    }
}
