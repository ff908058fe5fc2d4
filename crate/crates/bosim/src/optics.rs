//! Linear optical elements as mode transforms.
//!
//! Every element is a substitution rule on creation operators (see
//! [`crate::fock`]). Conventions:
//!
//! * Half-wave plate with fast axis at angle θ from horizontal, acting on the
//!   H/V coordinates:
//!
//!   ```text
//!   J(θ) = [ cos 2θ   sin 2θ ]
//!          [ sin 2θ  −cos 2θ ]
//!   ```
//!
//!   θ = π/4 swaps H and V; θ = π/8 maps |H⟩ to the diagonal |D⟩.
//!
//! * Polarizer along (cos θ, sin θ): the rank-1 projector onto that direction,
//!   scaled by √transmission per photon. This is the one non-unitary element;
//!   applying it leaves an unnormalized state whose squared norm is the
//!   probability that every photon passes.
//!
//! * Beam splitter with reflectivity r, mapping input ports (in₁, in₂) to
//!   output ports (out₁, out₂):
//!
//!   ```text
//!   a†_in₁ ↦ √r a†_out₁ + √(1−r) a†_out₂
//!   a†_in₂ ↦ √r a†_out₂ − √(1−r) a†_out₁
//!   ```
//!
//!   Reflection keeps the port index, transmission crosses it, and the second
//!   input carries the minus sign that makes the matrix unitary. At r = 1/2
//!   this is the balanced splitter that cancels the coincidence amplitude for
//!   indistinguishable photons; at r = 0 everything is transmitted, so the
//!   routing is the crossed relabeling in₁ → out₂, in₂ → −out₁.
//!
//! All elements act identically on both temporal slots, and the beam splitter
//! is polarization-blind.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{ModeLabel, ModeTransform, Path, PhotonicState, Polarization};

/// The two temporal wavepacket slots every element acts on.
pub const TEMPORAL_SLOTS: [u8; 2] = [0, 1];

/// All polarization labels, for polarization-blind elements.
const ALL_POLARIZATIONS: [Polarization; 4] = [
    Polarization::H,
    Polarization::V,
    Polarization::D,
    Polarization::A,
];

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_angle(angle_rad: f64) -> Result<()> {
    if !angle_rad.is_finite() || !(0.0..std::f64::consts::PI).contains(&angle_rad) {
        return Err(Error::InvalidParameter(format!(
            "element angle must lie in [0, π), got {angle_rad}"
        )));
    }
    Ok(())
}

fn check_unit_interval(value: f64, what: &str) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter(format!(
            "{what} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Declarative description of one optical element, the form the configuration
/// file produces. Validation happens on construction of the concrete
/// transform (and via [`ElementSpec::validate`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementSpec {
    HalfWavePlate { angle_rad: f64 },
    Polarizer { angle_rad: f64, transmission: f64 },
    BeamSplitter { reflectivity: f64 },
    DelayLine { delay_fs: f64 },
}

impl ElementSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ElementSpec::HalfWavePlate { angle_rad } => check_angle(angle_rad),
            ElementSpec::Polarizer {
                angle_rad,
                transmission,
            } => {
                check_angle(angle_rad)?;
                check_unit_interval(transmission, "polarizer transmission")
            }
            ElementSpec::BeamSplitter { reflectivity } => {
                check_unit_interval(reflectivity, "beam-splitter reflectivity")
            }
            ElementSpec::DelayLine { delay_fs } => {
                if !delay_fs.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "delay must be finite, got {delay_fs}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The mode transform of a single-path element (wave plate or polarizer).
    pub fn path_transform(&self, path: Path) -> Result<ModeTransform> {
        match *self {
            ElementSpec::HalfWavePlate { angle_rad } => hwp_transform(angle_rad, path),
            ElementSpec::Polarizer {
                angle_rad,
                transmission,
            } => polarizer_projection(angle_rad, transmission, path),
            _ => Err(Error::InvalidParameter(
                "only wave plates and polarizers act on a single path".into(),
            )),
        }
    }

    /// The mode transform of a beam splitter between two port pairs.
    pub fn splitter_transform(
        &self,
        inputs: (Path, Path),
        outputs: (Path, Path),
    ) -> Result<ModeTransform> {
        match *self {
            ElementSpec::BeamSplitter { reflectivity } => {
                beam_splitter_transform(reflectivity, inputs, outputs)
            }
            _ => Err(Error::InvalidParameter(
                "not a beam splitter".into(),
            )),
        }
    }
}

/// Build a transform that applies the same 2×2 polarization-space matrix on
/// both temporal slots of one path, optionally relabeling the polarization.
fn per_slot_polarization_transform(
    path: Path,
    in_pols: (Polarization, Polarization),
    out_pols: (Polarization, Polarization),
    jones: [[Complex64; 2]; 2],
    unitary: bool,
) -> Result<ModeTransform> {
    let mut inputs = Vec::with_capacity(4);
    let mut outputs = Vec::with_capacity(4);
    let n = 2 * TEMPORAL_SLOTS.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for (s, slot) in TEMPORAL_SLOTS.iter().enumerate() {
        inputs.push(ModeLabel::new(path, in_pols.0, *slot));
        inputs.push(ModeLabel::new(path, in_pols.1, *slot));
        outputs.push(ModeLabel::new(path, out_pols.0, *slot));
        outputs.push(ModeLabel::new(path, out_pols.1, *slot));
        for row in 0..2 {
            for col in 0..2 {
                matrix[(2 * s + row, 2 * s + col)] = jones[row][col];
            }
        }
    }
    if unitary {
        ModeTransform::unitary(inputs, outputs, matrix)
    } else {
        ModeTransform::projection(inputs, outputs, matrix)
    }
}

/// Half-wave plate with fast axis at `angle_rad` from horizontal, acting on
/// the H/V modes of `path`.
pub fn hwp_transform(angle_rad: f64, path: Path) -> Result<ModeTransform> {
    check_angle(angle_rad)?;
    let (s, c) = (2.0 * angle_rad).sin_cos();
    per_slot_polarization_transform(
        path,
        (Polarization::H, Polarization::V),
        (Polarization::H, Polarization::V),
        [[real(c), real(s)], [real(s), real(-c)]],
        true,
    )
}

/// Polarizer along (cos θ, sin θ) with per-photon power transmission
/// `transmission`, acting on the H/V modes of `path`. Non-unitary: the
/// squared norm after application is the probability that all photons pass.
pub fn polarizer_projection(
    angle_rad: f64,
    transmission: f64,
    path: Path,
) -> Result<ModeTransform> {
    check_angle(angle_rad)?;
    check_unit_interval(transmission, "polarizer transmission")?;
    let amp = transmission.sqrt();
    let (s, c) = angle_rad.sin_cos();
    per_slot_polarization_transform(
        path,
        (Polarization::H, Polarization::V),
        (Polarization::H, Polarization::V),
        [
            [real(amp * c * c), real(amp * c * s)],
            [real(amp * s * c), real(amp * s * s)],
        ],
        false,
    )
}

/// Basis change from H/V to the diagonal/antidiagonal labels on `path`:
/// a†_H ↦ (a†_D + a†_A)/√2, a†_V ↦ (a†_D − a†_A)/√2.
pub fn da_basis_change(path: Path) -> Result<ModeTransform> {
    let r = real(std::f64::consts::FRAC_1_SQRT_2);
    per_slot_polarization_transform(
        path,
        (Polarization::H, Polarization::V),
        (Polarization::D, Polarization::A),
        [[r, r], [r, -r]],
        true,
    )
}

/// Beam splitter with reflectivity `reflectivity` between input ports
/// `inputs` and output ports `outputs`, polarization-blind and identical on
/// both temporal slots. Ports may be relabeled (a/b → a′/b′) or kept in
/// place (out₁/out₂ → out₁/out₂).
pub fn beam_splitter_transform(
    reflectivity: f64,
    inputs: (Path, Path),
    outputs: (Path, Path),
) -> Result<ModeTransform> {
    check_unit_interval(reflectivity, "beam-splitter reflectivity")?;
    if inputs.0 == inputs.1 || outputs.0 == outputs.1 {
        return Err(Error::InvalidParameter(
            "beam splitter ports must be distinct".into(),
        ));
    }
    let r = real(reflectivity.sqrt());
    let t = real((1.0 - reflectivity).sqrt());

    let sectors: Vec<(Polarization, u8)> = ALL_POLARIZATIONS
        .iter()
        .flat_map(|pol| TEMPORAL_SLOTS.iter().map(move |slot| (*pol, *slot)))
        .collect();
    let n = 2 * sectors.len();
    let mut in_modes = Vec::with_capacity(n);
    let mut out_modes = Vec::with_capacity(n);
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for (k, (pol, slot)) in sectors.iter().enumerate() {
        in_modes.push(ModeLabel::new(inputs.0, *pol, *slot));
        in_modes.push(ModeLabel::new(inputs.1, *pol, *slot));
        out_modes.push(ModeLabel::new(outputs.0, *pol, *slot));
        out_modes.push(ModeLabel::new(outputs.1, *pol, *slot));
        let base = 2 * k;
        // Columns are inputs (in₁, in₂); rows are outputs (out₁, out₂).
        matrix[(base, base)] = r;
        matrix[(base + 1, base)] = t;
        matrix[(base, base + 1)] = -t;
        matrix[(base + 1, base + 1)] = r;
    }
    ModeTransform::unitary(in_modes, out_modes, matrix)
}

/// Keep only the components with every photon in `path`, returning the
/// renormalized conditional state and the probability of that branch.
pub fn post_select_same_output(
    state: &PhotonicState,
    path: Path,
) -> Result<(PhotonicState, f64)> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized("state in post_select_same_output"));
    }
    let kept = PhotonicState::from_amplitudes(
        state
            .amplitudes()
            .filter(|(occ, _)| occ.modes().all(|(mode, _)| mode.path == path))
            .map(|(occ, amp)| (occ.clone(), *amp)),
    );
    let probability = kept.norm_sqr();
    let conditional = kept.normalize().map_err(|_| {
        Error::ZeroProbabilityBranch(format!("no component has all photons in path {path}"))
    })?;
    Ok((conditional, probability))
}
