//! Temporal distinguishability of photon wavepackets.
//!
//! A relative delay τ between two otherwise identical photons reduces the
//! amplitude overlap of their wavepackets. For Gaussian packets with
//! coherence time τ_c the overlap is
//!
//! ```text
//! v(τ) = exp(−τ² / (2 τ_c²)),
//! ```
//!
//! so photons are fully indistinguishable at τ = 0 (v = 1) and effectively
//! distinguishable once |τ| ≫ τ_c. A delayed photon splits exactly into a
//! component parallel to the reference packet and an orthogonal remainder,
//!
//! ```text
//! |delayed⟩ = v(τ) |slot 0⟩ + √(1 − v(τ)²) |slot 1⟩,
//! ```
//!
//! which is why two temporal slots per mode are all the interference
//! calculations ever need.

use crate::error::{Error, Result};

/// Speed of light in micrometers per femtosecond. Converts a path-length
/// difference of the delay stage into a time delay.
pub const SPEED_OF_LIGHT_UM_PER_FS: f64 = 0.299792458;

/// Wavepacket envelope family. Only Gaussian packets are modeled; the overlap
/// formula above is specific to this shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavepacketShape {
    Gaussian,
}

/// A photon wavepacket with a fixed coherence time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketModel {
    coherence_time_fs: f64,
    shape: WavepacketShape,
}

impl WavepacketModel {
    /// A Gaussian wavepacket with the given coherence time in femtoseconds.
    ///
    /// The coherence time must be finite and non-negative. Zero is accepted
    /// as a degenerate limit in which no two delayed packets overlap (the
    /// overlap is 0 at every delay) so that downstream checks can observe
    /// what a collapsed interference curve looks like. Experiment
    /// configurations reject τ_c = 0 at validation time.
    pub fn gaussian(coherence_time_fs: f64) -> Result<Self> {
        if !coherence_time_fs.is_finite() || coherence_time_fs < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coherence time must be finite and non-negative, got {coherence_time_fs}"
            )));
        }
        Ok(Self {
            coherence_time_fs,
            shape: WavepacketShape::Gaussian,
        })
    }

    pub fn coherence_time_fs(&self) -> f64 {
        self.coherence_time_fs
    }

    pub fn shape(&self) -> WavepacketShape {
        self.shape
    }

    /// Amplitude overlap v(τ) between a packet and its copy delayed by
    /// `delay_fs`. Even in τ, 1 at τ = 0, monotonically decreasing in |τ|.
    pub fn overlap(&self, delay_fs: f64) -> f64 {
        if self.coherence_time_fs == 0.0 {
            return 0.0;
        }
        let x = delay_fs / self.coherence_time_fs;
        (-0.5 * x * x).exp()
    }

    /// Decompose a delayed packet into (parallel, orthogonal) amplitudes
    /// relative to the undelayed packet: (v, √(1 − v²)).
    pub fn temporal_decomposition(&self, delay_fs: f64) -> (f64, f64) {
        let v = self.overlap(delay_fs);
        (v, (1.0 - v * v).sqrt())
    }
}

/// A delay-stage position together with the optical delay it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySetting {
    pub path_difference_um: f64,
    pub delay_fs: f64,
}

impl DelaySetting {
    /// Build from a stage displacement in micrometers.
    pub fn from_path_difference(path_difference_um: f64) -> Self {
        Self {
            path_difference_um,
            delay_fs: delay_from_path(path_difference_um),
        }
    }
}

/// Convert a path-length difference (µm) into a delay (fs): τ = Δx / c.
pub fn delay_from_path(path_difference_um: f64) -> f64 {
    path_difference_um / SPEED_OF_LIGHT_UM_PER_FS
}
