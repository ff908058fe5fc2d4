//! Executable acceptance suite.
//!
//! Eight criteria pin the simulator to the modeled experiment: projection
//! endpoints, measured count ratios, baseline flatness, dip visibility,
//! splitter bunching, tomography fidelity, agreement with an independent
//! permanent-based oracle, and a bundle of structural properties. Each
//! criterion produces a [`CriterionReport`] with a pass/fail verdict and a
//! compact account of every check performed, so a failure names the exact
//! quantity and bound that broke.
//!
//! The suite runs from the library (the `verify` subcommand calls it at
//! runtime) and from the dedicated integration test target.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distinguishability::WavepacketModel;
use crate::error::Result;
use crate::experiments::{
    self, fit_visibility, hom_dip_probability, hom_dip_probability_analytic,
    polarization_hom_probability, polarization_hom_probability_analytic, run_scan,
    same_output_rate, ExperimentConfig, ScanKind,
};
use crate::fock::{ModeLabel, Path, PhotonicState, Polarization};
use crate::optics::beam_splitter_transform;
use crate::tomography::{
    expected_counts, fidelity, mle_reconstruct, pair_ket, simulate_tomography, DensityMatrix,
    TomographySettings,
};

/// Endpoint probabilities must sit within this of 1/4 and 1/2.
pub const ENDPOINT_TOLERANCE: f64 = 1e-3;

/// Pipeline and closed-form probabilities must agree within this.
pub const PIPELINE_ANALYTIC_TOLERANCE: f64 = 1e-10;

/// Relative tolerance on the overlapped-point count prediction.
pub const COUNT_RATIO_TOLERANCE: f64 = 0.05;

/// Tolerance on the peak contrast of the projected curve.
pub const CONTRAST_TOLERANCE: f64 = 0.02;

/// Monte Carlo count scatter must match the Poisson width within this
/// factor.
pub const POISSON_STD_FACTOR: f64 = 1.3;

/// Visibility recovered from the analytic dip curve.
pub const VISIBILITY_ANALYTIC_TOLERANCE: f64 = 1e-3;

/// Visibility recovered from a Monte Carlo dip curve.
pub const VISIBILITY_MC_TOLERANCE: f64 = 0.01;

/// Dip and bunching rates must sum to one within this at every delay.
pub const COMPLEMENT_TOLERANCE: f64 = 1e-12;

/// Residual coincidence amplitude of perfectly overlapped photons.
pub const BUNCHING_COINCIDENCE_BOUND: f64 = 1e-20;

/// Fidelity floor for reconstruction from Poisson counts.
pub const MLE_POISSON_FIDELITY: f64 = 0.99;

/// Fidelity floor for reconstruction from exact mean counts.
pub const MLE_EXACT_FIDELITY: f64 = 0.999;

/// Tolerance for the fidelity ground rules (self, orthogonal, symmetry).
pub const FIDELITY_CHECK_TOLERANCE: f64 = 1e-10;

/// Agreement bound between the Fock pipeline and the permanent oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Number of randomized configurations checked against the oracle.
pub const ORACLE_TRIALS: usize = 200;

/// Curve symmetry bound |P(τ) − P(−τ)|.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Completeness bound for the {D,A} ⊗ temporal projector sum.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;

/// Measured coincidence count at the separated scan endpoint.
pub const SEPARATED_REFERENCE_COUNT: f64 = 4867.0;

/// Measured coincidence count at the overlapped scan center.
pub const OVERLAPPED_REFERENCE_COUNT: f64 = 9489.0;

/// Peak contrast derived from the measured endpoint counts.
pub const REFERENCE_CONTRAST: f64 = 0.322;

/// Delay at which the endpoint probabilities are evaluated, femtoseconds.
pub const SEPARATED_DELAY_FS: f64 = 533.0;

/// Knobs the verification run exposes; everything else is pinned.
#[derive(Debug, Clone)]
pub struct AcceptanceParams {
    /// Wavepacket coherence time. Forcing it to zero collapses the
    /// projection endpoints and must fail the first criterion.
    pub tau_c_fs: f64,
    pub rng_seed: u64,
}

impl Default for AcceptanceParams {
    fn default() -> Self {
        Self {
            tau_c_fs: experiments::DEFAULT_TAU_C_FS,
            rng_seed: experiments::DEFAULT_SEED,
        }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: &'static str,
    pub passed: bool,
    pub details: String,
    pub runtime: Duration,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {} [{:.2}s] {}",
            self.id,
            self.runtime.as_secs_f64(),
            self.details
        )
    }
}

/// Identifiers of all criteria, in execution order.
pub fn criterion_ids() -> [&'static str; 8] {
    [
        "projection-endpoints",
        "projected-scan-ratios",
        "baseline-flatness",
        "hom-dip-visibility",
        "beam-splitter-bunching",
        "tomography-fidelity",
        "oracle-equivalence",
        "property-suite",
    ]
}

/// Run every criterion and collect the reports.
pub fn run_all(params: &AcceptanceParams) -> Vec<CriterionReport> {
    vec![
        projection_endpoints(params),
        projected_scan_ratios(params),
        baseline_flatness(params),
        hom_dip_visibility(params),
        beam_splitter_bunching(params),
        tomography_fidelity(params),
        oracle_equivalence(params),
        property_suite(params),
    ]
}

/// Accumulates named checks; the criterion passes iff all checks hold.
struct Checks {
    lines: Vec<String>,
    all_pass: bool,
}

impl Checks {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            all_pass: true,
        }
    }

    fn record(&mut self, pass: bool, line: String) {
        if !pass {
            self.all_pass = false;
        }
        let mark = if pass { "ok" } else { "VIOLATED" };
        self.lines.push(format!("{line} [{mark}]"));
    }

    fn note(&mut self, line: String) {
        self.lines.push(line);
    }

    fn within(&mut self, label: &str, value: f64, target: f64, tolerance: f64) {
        let dev = (value - target).abs();
        self.record(
            dev <= tolerance,
            format!("{label} = {value:.6} vs {target} (|diff| {dev:.2e} <= {tolerance:.0e})"),
        );
    }

    fn below(&mut self, label: &str, value: f64, bound: f64) {
        self.record(value <= bound, format!("{label} = {value:.3e} <= {bound:.0e}"));
    }

    fn at_least(&mut self, label: &str, value: f64, floor: f64) {
        self.record(value >= floor, format!("{label} = {value:.6} >= {floor}"));
    }

    fn finish(self) -> (bool, String) {
        (self.all_pass, self.lines.join("; "))
    }
}

fn report(
    id: &'static str,
    runtime_bound: Option<f64>,
    body: impl FnOnce(&mut Checks) -> Result<()>,
) -> CriterionReport {
    let start = Instant::now();
    let mut checks = Checks::new();
    let outcome = body(&mut checks);
    let runtime = start.elapsed();
    if let Some(bound) = runtime_bound {
        checks.below("runtime seconds", runtime.as_secs_f64(), bound);
    }
    let (mut passed, mut details) = checks.finish();
    if let Err(e) = outcome {
        passed = false;
        if !details.is_empty() {
            details.push_str("; ");
        }
        details.push_str(&format!("errored: {e}"));
    }
    CriterionReport {
        id,
        passed,
        details,
        runtime,
    }
}

fn ideal_config(params: &AcceptanceParams) -> ExperimentConfig {
    ExperimentConfig {
        tau_c_fs: params.tau_c_fs,
        polarizer_transmission: 1.0,
        rng_seed: params.rng_seed,
        ..ExperimentConfig::default()
    }
}

fn default_config(params: &AcceptanceParams) -> ExperimentConfig {
    ExperimentConfig {
        tau_c_fs: params.tau_c_fs,
        rng_seed: params.rng_seed,
        ..ExperimentConfig::default()
    }
}

/// Criterion 1: the projected probability is 1/4 at the separated delay and
/// 1/2 at zero delay, and the pipeline matches the closed form.
fn projection_endpoints(params: &AcceptanceParams) -> CriterionReport {
    report("projection-endpoints", Some(1.0), |checks| {
        let cfg = ideal_config(params);
        let separated = polarization_hom_probability(SEPARATED_DELAY_FS, &cfg)?;
        let overlapped = polarization_hom_probability(0.0, &cfg)?;
        checks.within("P(separated)", separated, 0.25, ENDPOINT_TOLERANCE);
        checks.within("P(overlapped)", overlapped, 0.50, ENDPOINT_TOLERANCE);
        for delay in [0.0, SEPARATED_DELAY_FS, -SEPARATED_DELAY_FS, 100.0] {
            let pipeline = polarization_hom_probability(delay, &cfg)?;
            let analytic = polarization_hom_probability_analytic(delay, &cfg)?;
            checks.below(
                &format!("|pipeline-analytic|({delay} fs)"),
                (pipeline - analytic).abs(),
                PIPELINE_ANALYTIC_TOLERANCE,
            );
        }
        Ok(())
    })
}

/// Criterion 2: with the polarizer transmission fitted to the measured
/// separated-point count, the overlapped-point expectation and the peak
/// contrast reproduce the measured values.
fn projected_scan_ratios(params: &AcceptanceParams) -> CriterionReport {
    report("projected-scan-ratios", None, |checks| {
        let cfg = default_config(params);
        let eta_sq = cfg.polarizer_transmission * cfg.polarizer_transmission;

        let analytic_start = Instant::now();
        let curve = run_scan(ScanKind::Projected, &cfg, false)?;
        let edge = &curve.points[0];
        let center = curve
            .points
            .iter()
            .min_by(|a, b| {
                a.delay_fs
                    .abs()
                    .partial_cmp(&b.delay_fs.abs())
                    .expect("finite delays")
            })
            .expect("non-empty curve");

        // Strip the configured transmission back out, then fit it to the
        // measured separated count.
        let edge_ideal = edge.probability / eta_sq;
        let center_ideal = center.probability / eta_sq;
        let fitted_eta_sq = SEPARATED_REFERENCE_COUNT / (cfg.pair_budget * edge_ideal);
        let overlapped_expectation = cfg.pair_budget * center_ideal * fitted_eta_sq;
        checks.record(
            fitted_eta_sq > 0.0 && fitted_eta_sq <= 1.0,
            format!("fitted transmission^2 = {fitted_eta_sq:.4} in (0, 1]"),
        );
        checks.below(
            "overlapped-count relative error",
            (overlapped_expectation - OVERLAPPED_REFERENCE_COUNT).abs()
                / OVERLAPPED_REFERENCE_COUNT,
            COUNT_RATIO_TOLERANCE,
        );

        let pmax = curve
            .points
            .iter()
            .map(|p| p.probability)
            .fold(f64::NEG_INFINITY, f64::max);
        let pmin = curve
            .points
            .iter()
            .map(|p| p.probability)
            .fold(f64::INFINITY, f64::min);
        let contrast = (pmax - pmin) / (pmax + pmin);
        checks.within("peak contrast", contrast, REFERENCE_CONTRAST, CONTRAST_TOLERANCE);
        checks.below(
            "analytic runtime seconds",
            analytic_start.elapsed().as_secs_f64(),
            1.0,
        );

        let mc_start = Instant::now();
        let mc = run_scan(ScanKind::Projected, &cfg, true)?;
        let center_mc = mc
            .points
            .iter()
            .min_by(|a, b| {
                a.delay_fs
                    .abs()
                    .partial_cmp(&b.delay_fs.abs())
                    .expect("finite delays")
            })
            .expect("non-empty curve");
        let sigma = center_mc.expected_count.sqrt();
        checks.below(
            "center count deviation (sigmas)",
            (center_mc.simulated_count.expect("monte carlo ran") as f64
                - center_mc.expected_count)
                .abs()
                / sigma,
            5.0,
        );
        checks.below(
            "monte-carlo runtime seconds",
            mc_start.elapsed().as_secs_f64(),
            10.0,
        );
        Ok(())
    })
}

/// Criterion 3: the baseline curve is exactly flat, and its Monte Carlo
/// scatter is Poissonian.
fn baseline_flatness(params: &AcceptanceParams) -> CriterionReport {
    report("baseline-flatness", None, |checks| {
        let cfg = default_config(params);
        let curve = run_scan(ScanKind::Baseline, &cfg, false)?;
        let spread = curve
            .points
            .iter()
            .map(|p| p.probability)
            .fold(f64::NEG_INFINITY, f64::max)
            - curve
                .points
                .iter()
                .map(|p| p.probability)
                .fold(f64::INFINITY, f64::min);
        checks.record(
            spread == 0.0,
            format!("analytic spread across scan = {spread:.1e} (must be exactly 0)"),
        );

        let mc = run_scan(ScanKind::Baseline, &cfg, true)?;
        let counts: Vec<f64> = mc
            .points
            .iter()
            .map(|p| p.simulated_count.expect("monte carlo ran") as f64)
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        let sigma = cfg.pair_budget.sqrt();
        checks.record(
            std >= sigma / POISSON_STD_FACTOR && std <= sigma * POISSON_STD_FACTOR,
            format!(
                "count std {std:.1} within factor {POISSON_STD_FACTOR} of Poisson width {sigma:.1}"
            ),
        );
        Ok(())
    })
}

/// Criterion 4: the dip reaches exactly zero for perfect mode match, the
/// visibility estimator recovers the configured value, and dip plus
/// bunching rates sum to one everywhere.
fn hom_dip_visibility(params: &AcceptanceParams) -> CriterionReport {
    report("hom-dip-visibility", None, |checks| {
        let perfect = ExperimentConfig {
            mode_match_visibility: 1.0,
            ..default_config(params)
        };
        let floor = hom_dip_probability_analytic(0.0, &perfect)?;
        checks.record(
            floor == 0.0,
            format!("dip floor at perfect mode match = {floor:.1e} (must be exactly 0)"),
        );

        let cfg = default_config(params);
        let analytic = run_scan(ScanKind::HomDip, &cfg, false)?;
        let vis = fit_visibility(&analytic)?;
        checks.within(
            "fitted visibility (analytic)",
            vis,
            cfg.mode_match_visibility,
            VISIBILITY_ANALYTIC_TOLERANCE,
        );

        let mc = run_scan(ScanKind::HomDip, &cfg, true)?;
        let vis_mc = fit_visibility(&mc)?;
        checks.within(
            "fitted visibility (monte carlo)",
            vis_mc,
            cfg.mode_match_visibility,
            VISIBILITY_MC_TOLERANCE,
        );

        let mut worst = 0.0_f64;
        for point in &analytic.points {
            let dip = hom_dip_probability(point.delay_fs, &cfg)?;
            let same = same_output_rate(point.delay_fs, &cfg)?;
            worst = worst.max((dip + same - 1.0).abs());
        }
        checks.below("max |dip + bunching - 1|", worst, COMPLEMENT_TOLERANCE);
        Ok(())
    })
}

/// Criterion 5: two photons with identical internal states entering a
/// balanced splitter never split, and bunch with probability 1/2 per
/// output.
fn beam_splitter_bunching(params: &AcceptanceParams) -> CriterionReport {
    let _ = params;
    report("beam-splitter-bunching", Some(1.0), |checks| {
        let state = PhotonicState::vacuum()
            .create(ModeLabel::new(Path::A, Polarization::H, 0))?
            .create(ModeLabel::new(Path::B, Polarization::H, 0))?
            .normalize()?;
        let splitter =
            beam_splitter_transform(0.5, (Path::A, Path::B), (Path::APrime, Path::BPrime))?;
        let out = state.apply_transform(&splitter)?;

        let coincidence = out
            .amplitude(&crate::fock::OccupationVector::pair(
                ModeLabel::new(Path::APrime, Polarization::H, 0),
                ModeLabel::new(Path::BPrime, Polarization::H, 0),
            ))
            .norm_sqr();
        checks.below("split probability", coincidence, BUNCHING_COINCIDENCE_BOUND);

        for path in [Path::APrime, Path::BPrime] {
            let bunched = out
                .amplitude(&crate::fock::OccupationVector::pair(
                    ModeLabel::new(path, Polarization::H, 0),
                    ModeLabel::new(path, Polarization::H, 0),
                ))
                .norm_sqr();
            checks.within(&format!("bunched probability ({path})"), bunched, 0.5, 1e-12);
        }
        Ok(())
    })
}

/// Criterion 6: maximum-likelihood tomography reaches the required fidelity
/// from Poisson counts and from exact means, and the fidelity function
/// passes its ground rules.
fn tomography_fidelity(params: &AcceptanceParams) -> CriterionReport {
    report("tomography-fidelity", Some(30.0), |checks| {
        let settings = TomographySettings {
            rng_seed: params.rng_seed,
            ..TomographySettings::default()
        };
        let target = DensityMatrix::from_pure(&pair_ket("HV")?)?;

        let poisson: Vec<f64> = simulate_tomography(&target, &settings)?
            .into_iter()
            .map(|n| n as f64)
            .collect();
        let from_poisson = mle_reconstruct(&poisson, &settings)?;
        checks.at_least(
            "fidelity from Poisson counts",
            fidelity(&from_poisson.density, &target),
            MLE_POISSON_FIDELITY,
        );
        // Hitting the iteration cap is a warning, not a failure; the
        // fidelity floor above is the binding requirement.
        checks.note(if from_poisson.converged {
            format!("optimizer converged in {} iterations", from_poisson.iterations)
        } else {
            format!(
                "warning: optimizer hit the {}-iteration cap",
                from_poisson.iterations
            )
        });

        let exact = expected_counts(&target, &settings)?;
        let from_exact = mle_reconstruct(&exact, &settings)?;
        checks.at_least(
            "fidelity from exact means",
            fidelity(&from_exact.density, &target),
            MLE_EXACT_FIDELITY,
        );

        let vh = DensityMatrix::from_pure(&pair_ket("VH")?)?;
        let mixed = DensityMatrix::maximally_mixed();
        checks.below(
            "|self-fidelity - 1|",
            (fidelity(&target, &target) - 1.0).abs(),
            FIDELITY_CHECK_TOLERANCE,
        );
        checks.below(
            "orthogonal-states fidelity",
            fidelity(&target, &vh),
            FIDELITY_CHECK_TOLERANCE,
        );
        checks.below(
            "fidelity asymmetry",
            (fidelity(&target, &mixed) - fidelity(&mixed, &target)).abs(),
            FIDELITY_CHECK_TOLERANCE,
        );
        Ok(())
    })
}

/// Criterion 7: the Fock-algebra projection probability agrees with the
/// independent permanent-based oracle on randomized configurations.
fn oracle_equivalence(params: &AcceptanceParams) -> CriterionReport {
    report("oracle-equivalence", None, |checks| {
        let mut rng =
            ChaCha8Rng::seed_from_u64(crate::experiments::point_seed(params.rng_seed, 7));
        let model = WavepacketModel::gaussian(experiments::DEFAULT_TAU_C_FS)?;
        let mut worst = 0.0_f64;
        for _ in 0..ORACLE_TRIALS {
            let phi = oracle::random_internal_state(&mut rng, &model);
            let psi = oracle::random_internal_state(&mut rng, &model);
            let chi = oracle::random_internal_state(&mut rng, &model);
            let omega = oracle::random_internal_state(&mut rng, &model);

            let expected = oracle::two_photon_projection_probability(&phi, &psi, &chi, &omega);

            let state = PhotonicState::two_photon(&as_modes(&phi), &as_modes(&psi))?
                .normalize()?;
            let projector = PhotonicState::two_photon(&as_modes(&chi), &as_modes(&omega))?
                .normalize()?;
            let actual = state.projection_probability(&projector)?;

            worst = worst.max((actual - expected).abs());
        }
        checks.below(
            &format!("max |pipeline - oracle| over {ORACLE_TRIALS} trials"),
            worst,
            ORACLE_TOLERANCE,
        );
        Ok(())
    })
}

/// Criterion 8: structural properties: creation-order commutativity,
/// unitary norm preservation, projector completeness, curve symmetry, and
/// Monte Carlo determinism.
fn property_suite(params: &AcceptanceParams) -> CriterionReport {
    report("property-suite", None, |checks| {
        // Creation order cannot matter, bit for bit.
        let m1 = ModeLabel::new(Path::A, Polarization::H, 0);
        let m2 = ModeLabel::new(Path::B, Polarization::V, 1);
        let forward = PhotonicState::vacuum().create(m1)?.create(m2)?;
        let reversed = PhotonicState::vacuum().create(m2)?.create(m1)?;
        let identical = forward
            .amplitudes()
            .zip(reversed.amplitudes())
            .all(|((oa, aa), (ob, ab))| oa == ob && aa == ab)
            && forward.amplitudes().count() == reversed.amplitudes().count();
        checks.record(identical, "creation-order commutativity (exact)".into());

        // Unitary transforms preserve the norm.
        let cfg = default_config(params);
        let model = WavepacketModel::gaussian(cfg.tau_c_fs)?;
        let state = experiments::post_selected_pair_state(100.0, &model)?;
        let splitter =
            beam_splitter_transform(0.5, (Path::Out1, Path::Out2), (Path::Out1, Path::Out2))?;
        let norm_drift = (state.apply_transform(&splitter)?.norm() - 1.0).abs();
        checks.below("unitary norm drift", norm_drift, 1e-10);

        // The ten {D,A} x temporal two-photon projectors form a complete
        // set over the post-selected pair.
        let completeness = da_completeness_sum(&state)?;
        checks.below(
            "|sum of D/A projector probabilities - 1|",
            (completeness - 1.0).abs(),
            COMPLETENESS_TOLERANCE,
        );

        // Scan curves are even in the delay.
        let mut worst = 0.0_f64;
        for k in 1..=20 {
            let delay = k as f64 * 533.7 / 20.0;
            let plus = polarization_hom_probability(delay, &cfg)?;
            let minus = polarization_hom_probability(-delay, &cfg)?;
            worst = worst.max((plus - minus).abs());
        }
        checks.below("max |P(t) - P(-t)|", worst, SYMMETRY_TOLERANCE);

        // Same seed, same bytes.
        let a = run_scan(ScanKind::Projected, &cfg, true)?.to_csv_string();
        let b = run_scan(ScanKind::Projected, &cfg, true)?.to_csv_string();
        checks.record(a == b, "Monte Carlo reruns are byte-identical".into());
        Ok(())
    })
}

/// Map an oracle internal state onto creation-operator coefficients for the
/// monitored beam.
fn as_modes(state: &oracle::InternalState) -> [(Complex64, ModeLabel); 4] {
    [
        (state[0], ModeLabel::new(Path::Out1, Polarization::H, 0)),
        (state[1], ModeLabel::new(Path::Out1, Polarization::H, 1)),
        (state[2], ModeLabel::new(Path::Out1, Polarization::V, 0)),
        (state[3], ModeLabel::new(Path::Out1, Polarization::V, 1)),
    ]
}

/// Sum of projection probabilities over the ten-dimensional orthonormal
/// basis of two photons in {D, A} polarization and two temporal slots.
fn da_completeness_sum(state: &PhotonicState) -> Result<f64> {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let single = |sign: f64, slot: u8| -> [(Complex64, ModeLabel); 2] {
        [
            (r, ModeLabel::new(Path::Out1, Polarization::H, slot)),
            (
                r * Complex64::new(sign, 0.0),
                ModeLabel::new(Path::Out1, Polarization::V, slot),
            ),
        ]
    };
    let kets = [
        single(1.0, 0),
        single(1.0, 1),
        single(-1.0, 0),
        single(-1.0, 1),
    ];
    let mut total = 0.0;
    for i in 0..4 {
        for j in i..4 {
            let basis_state = PhotonicState::vacuum()
                .create_superposed(&kets[i])?
                .create_superposed(&kets[j])?
                .normalize()?;
            total += state.projection_probability(&basis_state)?;
        }
    }
    Ok(total)
}

/// Brute-force reference for two-photon projection probabilities, built on
/// the matrix permanent instead of the operator algebra.
///
/// For a state â†_φ â†_ψ |0⟩ projected onto â†_χ â†_ω |0⟩ the amplitude is
/// the permanent of the single-photon overlap matrix
///
/// ```text
/// M = [[⟨χ|φ⟩, ⟨χ|ψ⟩],
///      [⟨ω|φ⟩, ⟨ω|ψ⟩]],    perm M = M₁₁M₂₂ + M₁₂M₂₁,
/// ```
///
/// and the probability is |perm M|² divided by the squared norms
/// (1+|⟨φ|ψ⟩|²)(1+|⟨χ|ω⟩|²) of the two symmetrized states.
pub mod oracle {
    use nalgebra::Vector4;
    use num_complex::Complex64;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use crate::distinguishability::WavepacketModel;

    /// Single-photon internal state over (H slot 0, H slot 1, V slot 0,
    /// V slot 1).
    pub type InternalState = Vector4<Complex64>;

    /// |perm M|² / ((1+|⟨φ|ψ⟩|²)(1+|⟨χ|ω⟩|²)).
    pub fn two_photon_projection_probability(
        phi: &InternalState,
        psi: &InternalState,
        chi: &InternalState,
        omega: &InternalState,
    ) -> f64 {
        let m11 = chi.dotc(phi);
        let m12 = chi.dotc(psi);
        let m21 = omega.dotc(phi);
        let m22 = omega.dotc(psi);
        let permanent = m11 * m22 + m12 * m21;
        let state_norm_sq = 1.0 + phi.dotc(psi).norm_sqr();
        let projector_norm_sq = 1.0 + chi.dotc(omega).norm_sqr();
        permanent.norm_sqr() / (state_norm_sq * projector_norm_sq)
    }

    /// A random normalized internal state: a complex-Gaussian polarization
    /// ket tensored with the temporal ket of a random delay.
    pub fn random_internal_state(rng: &mut ChaCha8Rng, model: &WavepacketModel) -> InternalState {
        let mut gaussian = || -> Complex64 {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        };
        let mut h = gaussian();
        let mut v = gaussian();
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        h /= norm;
        v /= norm;
        let delay = rng.random_range(-800.0..800.0);
        let (par, perp) = model.temporal_decomposition(delay);
        Vector4::new(
            h * Complex64::new(par, 0.0),
            h * Complex64::new(perp, 0.0),
            v * Complex64::new(par, 0.0),
            v * Complex64::new(perp, 0.0),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_criteria_pass_with_default_parameters() {
        let reports = run_all(&AcceptanceParams::default());
        assert_eq!(reports.len(), criterion_ids().len());
        for report in &reports {
            assert!(report.passed, "{report}");
        }
    }

    #[test]
    fn degenerate_coherence_time_fails_the_endpoint_criterion_first() {
        let params = AcceptanceParams {
            tau_c_fs: 0.0,
            ..AcceptanceParams::default()
        };
        let reports = run_all(&params);
        let first_failure = reports
            .iter()
            .find(|r| !r.passed)
            .expect("collapsed endpoints must fail");
        assert_eq!(first_failure.id, "projection-endpoints");
    }

    #[test]
    fn oracle_matches_hand_computed_cases() {
        use nalgebra::Vector4;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

        // Orthogonal polarizations, same slot, projected onto both-diagonal.
        let h = Vector4::new(one, zero, zero, zero);
        let v = Vector4::new(zero, zero, one, zero);
        let d = Vector4::new(r, zero, r, zero);
        let p = oracle::two_photon_projection_probability(&h, &v, &d, &d);
        assert!((p - 0.5).abs() < 1e-12);

        // Temporally distinguishable photons onto slot-matched diagonal
        // projectors: only one of the four expansion terms survives.
        let v_late = Vector4::new(zero, zero, zero, one);
        let d_late = Vector4::new(zero, r, zero, r);
        let p = oracle::two_photon_projection_probability(&h, &v_late, &d, &d_late);
        assert!((p - 0.25).abs() < 1e-12);

        // A state projected onto itself, including the doubly occupied
        // case where the symmetrization norms matter.
        let p = oracle::two_photon_projection_probability(&h, &v, &h, &v);
        assert!((p - 1.0).abs() < 1e-12);
        let p = oracle::two_photon_projection_probability(&h, &h, &h, &h);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_display_is_one_line_per_criterion() {
        let reports = run_all(&AcceptanceParams::default());
        for report in &reports {
            let line = report.to_string();
            assert!(line.starts_with("PASS") || line.starts_with("FAIL"));
            assert!(!line.contains('\n'));
        }
    }
}
