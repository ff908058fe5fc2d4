//! The modeled two-photon experiments.
//!
//! Three coincidence curves are produced, all as a function of the relative
//! delay τ between the photons of a pair (set by a scan of the delay-stage
//! position):
//!
//! * **Baseline**: pairs are merged into one beam and split again at a
//!   balanced splitter; the pair-splitting probability is 1/2 independent of
//!   τ, whether or not the photons interfere, so the curve is flat. It is
//!   reported in relative units (1.0) with the absolute factors kept as named
//!   constants.
//! * **Projected**: the merged, orthogonally polarized pair passes a
//!   diagonal polarizer. The pass probability interpolates between the
//!   product value 1/4 (distinguishable photons) and the symmetrized value
//!   1/2 (indistinguishable photons):
//!
//!   ```text
//!   P(τ) = (1 + v(τ)²) / 4 · η²,
//!   ```
//!
//!   with v the wavepacket overlap and η the per-photon polarizer
//!   transmission.
//! * **Dip**: identically polarized photons meet at a balanced splitter from
//!   opposite sides; the coincidence rate shows the interference dip
//!
//!   ```text
//!   P(τ) = (1 − V · v(τ)²) / 2,
//!   ```
//!
//!   where V is the mode-match visibility. The complementary same-output
//!   (bunching) rate is (1 + V·v²)/2.
//!
//! Every probability has two independent routes: the closed forms above and a
//! full pipeline through the Fock-state machinery (state preparation, mode
//! transforms, projections). The `*_analytic` twins expose the closed forms;
//! the primary functions run the pipeline. Imperfect mode match is treated as
//! a probability-weighted ensemble: a fraction V of pairs interferes, the
//! rest behaves as fully distinguishable.
//!
//! Monte Carlo counting draws Poisson counts around `probability ×
//! pair_budget` per scan point, with one RNG per point seeded from the
//! configured seed and the point index, so curves are reproducible and
//! points independent.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::distinguishability::{delay_from_path, WavepacketModel};
use crate::error::{Error, Result};
use crate::fock::{ModeLabel, Path, PhotonicState, Polarization};
use crate::optics::{beam_splitter_transform, polarizer_projection};

/// Probability that an orthogonally polarized pair leaves the merging
/// splitter through the one monitored output (no interference between
/// orthogonal photons: 1/2 per photon).
pub const SAME_OUTPUT_SELECTION: f64 = 0.25;

/// Probability that a same-beam pair splits at the counting splitter, which
/// is what makes it countable as a coincidence. Independent of the photons'
/// mutual coherence.
pub const PAIR_COUNT_EFFICIENCY: f64 = 0.5;

/// Coherence time of the photon pairs, femtoseconds.
pub const DEFAULT_TAU_C_FS: f64 = 210.0;

/// Detected-pair budget per scan point at baseline.
pub const DEFAULT_PAIR_BUDGET: f64 = 20777.0;

/// Per-photon polarizer transmission fitted to the measured separated-point
/// rate (η² ≈ 0.937).
pub const DEFAULT_POLARIZER_TRANSMISSION: f64 = 0.968;

/// Mode-match visibility of the interference dip.
pub const DEFAULT_MODE_MATCH_VISIBILITY: f64 = 0.97;

/// Half-range of the delay-stage scan, micrometers (±160 µm ≈ ±533.7 fs).
pub const DEFAULT_SCAN_HALF_RANGE_UM: f64 = 160.0;

/// Number of scan points.
pub const DEFAULT_SCAN_POINTS: usize = 81;

/// Default RNG seed for Monte Carlo counting.
pub const DEFAULT_SEED: u64 = 42;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Everything a scan needs: the wavepacket, the grid, the budget, and the
/// imperfection knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub tau_c_fs: f64,
    pub scan_positions_um: Vec<f64>,
    pub pair_budget: f64,
    pub polarizer_transmission: f64,
    pub mode_match_visibility: f64,
    pub rng_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tau_c_fs: DEFAULT_TAU_C_FS,
            scan_positions_um: uniform_scan_positions(
                -DEFAULT_SCAN_HALF_RANGE_UM,
                DEFAULT_SCAN_HALF_RANGE_UM,
                DEFAULT_SCAN_POINTS,
            ),
            pair_budget: DEFAULT_PAIR_BUDGET,
            polarizer_transmission: DEFAULT_POLARIZER_TRANSMISSION,
            mode_match_visibility: DEFAULT_MODE_MATCH_VISIBILITY,
            rng_seed: DEFAULT_SEED,
        }
    }
}

impl ExperimentConfig {
    /// Full validation for scan runs: positive coherence time, a non-empty
    /// finite grid, a positive budget, and unit-interval imperfections.
    pub fn validate(&self) -> Result<()> {
        if !self.tau_c_fs.is_finite() || self.tau_c_fs <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coherence time must be positive, got {}",
                self.tau_c_fs
            )));
        }
        if self.scan_positions_um.is_empty() {
            return Err(Error::InvalidParameter("empty scan grid".into()));
        }
        if self.scan_positions_um.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "scan positions must be finite".into(),
            ));
        }
        if !self.pair_budget.is_finite() || self.pair_budget <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pair budget must be positive, got {}",
                self.pair_budget
            )));
        }
        check_unit(self.polarizer_transmission, "polarizer transmission")?;
        check_unit(self.mode_match_visibility, "mode-match visibility")?;
        Ok(())
    }

    fn wavepacket(&self) -> Result<WavepacketModel> {
        WavepacketModel::gaussian(self.tau_c_fs)
    }
}

fn check_unit(value: f64, what: &str) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter(format!(
            "{what} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Uniform grid of stage positions from `min_um` to `max_um` inclusive.
pub fn uniform_scan_positions(min_um: f64, max_um: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![min_um];
    }
    let step = (max_um - min_um) / (points - 1) as f64;
    (0..points).map(|i| min_um + step * i as f64).collect()
}

/// Which curve a scan produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanKind {
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "projected")]
    Projected,
    #[serde(rename = "hom-dip")]
    HomDip,
}

impl std::fmt::Display for ScanKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScanKind::Baseline => "baseline",
            ScanKind::Projected => "projected",
            ScanKind::HomDip => "hom-dip",
        };
        write!(f, "{s}")
    }
}

/// One scan point: stage position, the delay it produces, the model
/// probability, the expected count under the pair budget, and optionally a
/// Poisson draw around that expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub position_um: f64,
    pub delay_fs: f64,
    pub probability: f64,
    pub expected_count: f64,
    pub simulated_count: Option<u64>,
}

/// A full coincidence curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCurve {
    pub kind: ScanKind,
    pub points: Vec<ScanPoint>,
}

/// The conditional state of an orthogonally polarized pair after merging
/// into one beam: `a†_H(0) · (v a†_V(0) + √(1−v²) a†_V(1)) |0⟩` on the
/// monitored path, already unit-norm because the polarizations are
/// orthogonal.
pub fn post_selected_pair_state(
    delay_fs: f64,
    model: &WavepacketModel,
) -> Result<PhotonicState> {
    let (par, perp) = model.temporal_decomposition(delay_fs);
    let h = [(
        real(1.0),
        ModeLabel::new(Path::Out1, Polarization::H, 0),
    )];
    let v = [
        (real(par), ModeLabel::new(Path::Out1, Polarization::V, 0)),
        (real(perp), ModeLabel::new(Path::Out1, Polarization::V, 1)),
    ];
    PhotonicState::two_photon(&h, &v)?.normalize()
}

/// Total photons of an occupation sitting in `path`.
fn photons_in_path(occ: &crate::fock::OccupationVector, path: Path) -> u32 {
    occ.modes()
        .filter(|(mode, _)| mode.path == path)
        .map(|(_, n)| n)
        .sum()
}

/// Probability of exactly one photon in each of two paths.
fn split_probability(state: &PhotonicState, p1: Path, p2: Path) -> f64 {
    state
        .amplitudes()
        .filter(|(occ, _)| photons_in_path(occ, p1) == 1 && photons_in_path(occ, p2) == 1)
        .map(|(_, amp)| amp.norm_sqr())
        .sum()
}

/// Probability of all photons in one path.
fn confined_probability(state: &PhotonicState, path: Path) -> f64 {
    state
        .amplitudes()
        .filter(|(occ, _)| occ.modes().all(|(mode, _)| mode.path == path))
        .map(|(_, amp)| amp.norm_sqr())
        .sum()
}

/// Pipeline: send the merged pair through the counting splitter and read off
/// the probability that it splits (one photon per output). This is 1/2 at
/// every delay (mutual coherence of the pair does not matter), which is why
/// the baseline curve is flat.
pub fn pair_split_probability(delay_fs: f64, model: &WavepacketModel) -> Result<f64> {
    let state = post_selected_pair_state(delay_fs, model)?;
    let splitter = beam_splitter_transform(0.5, (Path::Out1, Path::Out2), (Path::Out1, Path::Out2))?;
    let out = state.apply_transform(&splitter)?;
    Ok(split_probability(&out, Path::Out1, Path::Out2))
}

/// Baseline curve value in relative units: 1.0 at every delay. The absolute
/// pair rate is `pair_budget` × [`PAIR_COUNT_EFFICIENCY`] relative to the
/// merged-pair rate; both factors are delay-independent.
pub fn baseline_pair_probability(delay_fs: f64, cfg: &ExperimentConfig) -> Result<f64> {
    let model = cfg.wavepacket()?;
    let split = pair_split_probability(delay_fs, &model)?;
    debug_assert!((split - PAIR_COUNT_EFFICIENCY).abs() < 1e-12);
    Ok(1.0)
}

/// Projected curve through the pipeline: build the merged pair, apply the
/// diagonal polarizer, take the pass probability, and scale by the η² pair
/// transmission.
pub fn polarization_hom_probability(delay_fs: f64, cfg: &ExperimentConfig) -> Result<f64> {
    check_unit(cfg.polarizer_transmission, "polarizer transmission")?;
    let model = cfg.wavepacket()?;
    let state = post_selected_pair_state(delay_fs, &model)?;
    let polarizer = polarizer_projection(std::f64::consts::FRAC_PI_4, 1.0, Path::Out1)?;
    let pass = state.apply_transform(&polarizer)?.norm_sqr();
    let eta = cfg.polarizer_transmission;
    Ok(pass * eta * eta)
}

/// Closed form of the projected curve: (1 + v(τ)²)/4 · η².
pub fn polarization_hom_probability_analytic(
    delay_fs: f64,
    cfg: &ExperimentConfig,
) -> Result<f64> {
    check_unit(cfg.polarizer_transmission, "polarizer transmission")?;
    let v = cfg.wavepacket()?.overlap(delay_fs);
    let eta = cfg.polarizer_transmission;
    Ok((1.0 + v * v) / 4.0 * eta * eta)
}

/// Pipeline for one pure branch of the dip experiment: identically polarized
/// photons with the given temporal decomposition meet at a balanced
/// splitter. Returns (coincidence probability, same-output probability).
fn dip_pipeline(par: f64, perp: f64) -> Result<(f64, f64)> {
    let p1 = [(real(1.0), ModeLabel::new(Path::A, Polarization::H, 0))];
    let p2 = [
        (real(par), ModeLabel::new(Path::B, Polarization::H, 0)),
        (real(perp), ModeLabel::new(Path::B, Polarization::H, 1)),
    ];
    let state = PhotonicState::two_photon(&p1, &p2)?.normalize()?;
    let splitter = beam_splitter_transform(0.5, (Path::A, Path::B), (Path::APrime, Path::BPrime))?;
    let out = state.apply_transform(&splitter)?;
    let coincidence = split_probability(&out, Path::APrime, Path::BPrime);
    let same = confined_probability(&out, Path::APrime) + confined_probability(&out, Path::BPrime);
    Ok((coincidence, same))
}

/// Dip coincidence probability through the pipeline, with imperfect mode
/// match treated as an ensemble: a fraction V of pairs interferes, the rest
/// is fully distinguishable.
pub fn hom_dip_probability(delay_fs: f64, cfg: &ExperimentConfig) -> Result<f64> {
    check_unit(cfg.mode_match_visibility, "mode-match visibility")?;
    let model = cfg.wavepacket()?;
    let (par, perp) = model.temporal_decomposition(delay_fs);
    let (matched, _) = dip_pipeline(par, perp)?;
    let (unmatched, _) = dip_pipeline(0.0, 1.0)?;
    let vis = cfg.mode_match_visibility;
    Ok(vis * matched + (1.0 - vis) * unmatched)
}

/// Closed form of the dip: (1 − V·v(τ)²)/2.
pub fn hom_dip_probability_analytic(delay_fs: f64, cfg: &ExperimentConfig) -> Result<f64> {
    check_unit(cfg.mode_match_visibility, "mode-match visibility")?;
    let v = cfg.wavepacket()?.overlap(delay_fs);
    Ok((1.0 - cfg.mode_match_visibility * v * v) / 2.0)
}

/// Same-output (bunching) probability through the pipeline; complements the
/// dip exactly.
pub fn same_output_rate(delay_fs: f64, cfg: &ExperimentConfig) -> Result<f64> {
    check_unit(cfg.mode_match_visibility, "mode-match visibility")?;
    let model = cfg.wavepacket()?;
    let (par, perp) = model.temporal_decomposition(delay_fs);
    let (_, matched) = dip_pipeline(par, perp)?;
    let (_, unmatched) = dip_pipeline(0.0, 1.0)?;
    let vis = cfg.mode_match_visibility;
    Ok(vis * matched + (1.0 - vis) * unmatched)
}

/// Closed form of the same-output rate: (1 + V·v(τ)²)/2.
pub fn same_output_rate_analytic(delay_fs: f64, cfg: &ExperimentConfig) -> Result<f64> {
    check_unit(cfg.mode_match_visibility, "mode-match visibility")?;
    let v = cfg.wavepacket()?.overlap(delay_fs);
    Ok((1.0 + cfg.mode_match_visibility * v * v) / 2.0)
}

/// SplitMix64 finalizer; decorrelates consecutive point indices.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// RNG seed for one point of a deterministic sweep: the configured seed
/// XORed with a hash of the point index. Points are statistically
/// independent and the whole sweep is reproducible from the one configured
/// seed.
pub(crate) fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index.wrapping_add(1))
}

/// One Poisson draw with the given mean.
pub(crate) fn draw_poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(mean).expect("positive finite mean");
    poisson.sample(rng) as u64
}

/// Produce a full curve: per point the model probability, the expected count
/// `probability × pair_budget`, and, when `monte_carlo` is set, a Poisson
/// count drawn around the expectation with a per-point seed.
pub fn run_scan(kind: ScanKind, cfg: &ExperimentConfig, monte_carlo: bool) -> Result<ScanCurve> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.scan_positions_um.len());
    for (index, &position_um) in cfg.scan_positions_um.iter().enumerate() {
        let delay_fs = delay_from_path(position_um);
        let probability = match kind {
            ScanKind::Baseline => baseline_pair_probability(delay_fs, cfg)?,
            ScanKind::Projected => polarization_hom_probability(delay_fs, cfg)?,
            ScanKind::HomDip => hom_dip_probability(delay_fs, cfg)?,
        };
        let expected_count = probability * cfg.pair_budget;
        let simulated_count = if monte_carlo {
            let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.rng_seed, index as u64));
            Some(draw_poisson(&mut rng, expected_count))
        } else {
            None
        };
        points.push(ScanPoint {
            position_um,
            delay_fs,
            probability,
            expected_count,
            simulated_count,
        });
    }
    Ok(ScanCurve { kind, points })
}

/// Fraction of points, rounded up, that counts as "far from the dip" when
/// estimating the undipped level.
const FAR_TAIL_FRACTION: f64 = 0.10;

/// Minimum curve length for a visibility fit.
const MIN_FIT_POINTS: usize = 10;

/// Estimate the interference visibility of a dip curve:
/// (P_far − P_min) / P_far, with P_far the mean over the outermost 10% of
/// points by |delay|. Uses simulated counts when present, model
/// probabilities otherwise.
pub fn fit_visibility(curve: &ScanCurve) -> Result<f64> {
    let n = curve.points.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::DegenerateCurve(format!(
            "visibility fit needs at least {MIN_FIT_POINTS} points, got {n}"
        )));
    }
    let value = |p: &ScanPoint| -> f64 {
        p.simulated_count
            .map(|c| c as f64)
            .unwrap_or(p.probability)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        curve.points[j]
            .delay_fs
            .abs()
            .partial_cmp(&curve.points[i].delay_fs.abs())
            .expect("finite delays")
    });
    let tail = ((n as f64 * FAR_TAIL_FRACTION).ceil() as usize).max(1);
    let far = order[..tail]
        .iter()
        .map(|&i| value(&curve.points[i]))
        .sum::<f64>()
        / tail as f64;
    if far <= 0.0 {
        return Err(Error::DegenerateCurve(
            "far level is zero; nothing to normalize against".into(),
        ));
    }
    let min = curve
        .points
        .iter()
        .map(value)
        .fold(f64::INFINITY, f64::min);
    Ok((far - min) / far)
}

/// Header of the CSV artifact; the column order is part of the format.
pub const CSV_HEADER: &str = "position_um,delay_fs,probability,expected_count,simulated_count";

impl ScanCurve {
    /// CSV serialization. Floats use the shortest representation that parses
    /// back to the same double, so a round trip is lossless.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let simulated = p
                .simulated_count
                .map(|c| c.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.position_um, p.delay_fs, p.probability, p.expected_count, simulated
            ));
        }
        out
    }

    /// Parse a curve back from its CSV form. The kind is not stored in the
    /// CSV and must be supplied.
    pub fn from_csv_str(kind: ScanKind, csv: &str) -> Result<Self> {
        let mut lines = csv.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty CSV".into()))?;
        if header != CSV_HEADER {
            return Err(Error::Parse(format!(
                "unexpected CSV header: {header:?}"
            )));
        }
        let mut points = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!(
                    "line {}: expected 5 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {what}: {e}", lineno + 2)))
            };
            let simulated_count = if fields[4].is_empty() {
                None
            } else {
                Some(fields[4].parse::<u64>().map_err(|e| {
                    Error::Parse(format!("line {}: simulated_count: {e}", lineno + 2))
                })?)
            };
            points.push(ScanPoint {
                position_um: parse(fields[0], "position_um")?,
                delay_fs: parse(fields[1], "delay_fs")?,
                probability: parse(fields[2], "probability")?,
                expected_count: parse(fields[3], "expected_count")?,
                simulated_count,
            });
        }
        Ok(Self { kind, points })
    }

    /// JSON serialization with a schema version tag.
    pub fn to_json_string(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Artifact<'a> {
            schema: u32,
            kind: ScanKind,
            points: &'a [ScanPoint],
        }
        Ok(serde_json::to_string_pretty(&Artifact {
            schema: 1,
            kind: self.kind,
            points: &self.points,
        })?)
    }

    /// Parse the JSON artifact back.
    pub fn from_json_str(json: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Artifact {
            schema: u32,
            kind: ScanKind,
            points: Vec<ScanPoint>,
        }
        let artifact: Artifact = serde_json::from_str(json)?;
        if artifact.schema != 1 {
            return Err(Error::Parse(format!(
                "unsupported schema version {}",
                artifact.schema
            )));
        }
        Ok(Self {
            kind: artifact.kind,
            points: artifact.points,
        })
    }
}
