//! Command-line interface.
//!
//! Subcommands:
//!
//! * `run` runs the experiment named by `--experiment` or the config file.
//! * `scan-projected`, `scan-baseline`, `hom-dip` run one scan directly.
//! * `tomo` simulates tomography counts (or reads a counts CSV) and
//!   reconstructs the density matrix.
//! * `point` evaluates a single probability at one delay.
//! * `verify` runs the acceptance criteria; `verify --list` prints their
//!   identifiers.
//!
//! Configuration is resolved with the precedence **flag > config file >
//! `BOSIM_SEED` environment variable > built-in default**. The config file
//! is flat `key = value` text; `#` starts a comment; unknown keys are
//! rejected. Recognized keys: `experiment`, `tau-c-fs`, `scan-min-um`,
//! `scan-max-um`, `points`, `pairs`, `eta`, `visibility`, `seed`,
//! `monte-carlo`, `out`, `format`, `state`, `counts`, `delay-fs`, plus the
//! optical-element keys `hwp-angle-rad`, `polarizer-angle-rad`,
//! `bs-reflectivity`, `delay-line-fs`, which construct range-checked
//! element specifications (`eta` doubles as the polarizer transmission).
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 runtime failure,
//! 3 verification failure (the first failing criterion is named). With the
//! same configuration and seed, output artifacts are byte-identical across
//! runs.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::acceptance::{criterion_ids, run_all, AcceptanceParams};
use crate::error::{Error, Result};
use crate::experiments::{
    fit_visibility, run_scan, uniform_scan_positions, ExperimentConfig, ScanCurve, ScanKind,
    DEFAULT_PAIR_BUDGET, DEFAULT_SCAN_HALF_RANGE_UM, DEFAULT_SCAN_POINTS, DEFAULT_SEED,
    DEFAULT_TAU_C_FS,
};
use crate::optics::ElementSpec;
use crate::tomography::{
    counts_from_csv, counts_to_csv, entangled_target_density, fidelity, mle_reconstruct,
    pair_ket, simulate_tomography, DensityMatrix, TomographySettings,
    DEFAULT_COUNTS_PER_SETTING,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_CONFIG: i32 = 1;
pub const EXIT_RUNTIME_FAILURE: i32 = 2;
pub const EXIT_VERIFY_FAILURE: i32 = 3;

/// Seed environment variable, used when neither flag nor config file sets
/// one.
pub const SEED_ENV_VAR: &str = "BOSIM_SEED";

#[derive(Parser)]
#[command(
    name = "bosim",
    version,
    about = "Two-photon linear-optics simulator: interference scans, count statistics, tomography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named by --experiment or the config file.
    Run(RunArgs),
    /// Coincidence scan behind the diagonal polarizer.
    ScanProjected(ScanArgs),
    /// Coincidence scan with the polarizer removed (flat curve).
    ScanBaseline(ScanArgs),
    /// Two-photon interference dip scan.
    HomDip(ScanArgs),
    /// Simulate tomography counts and reconstruct the density matrix.
    Tomo(TomoArgs),
    /// Evaluate one probability at a single delay.
    Point(PointArgs),
    /// Run the acceptance criteria and print one line per criterion.
    Verify(VerifyArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key-value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed (also settable via BOSIM_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Output artifact path (default: <experiment>.<format>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for scan artifacts.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args, Default)]
struct PhysicsArgs {
    /// Wavepacket coherence time in femtoseconds.
    #[arg(long)]
    tau_c_fs: Option<f64>,
    /// First stage position of the scan, micrometers.
    #[arg(long)]
    scan_min_um: Option<f64>,
    /// Last stage position of the scan, micrometers.
    #[arg(long)]
    scan_max_um: Option<f64>,
    /// Number of scan points.
    #[arg(long)]
    points: Option<usize>,
    /// Detected-pair budget per scan point.
    #[arg(long)]
    pairs: Option<f64>,
    /// Per-photon polarizer transmission.
    #[arg(long)]
    eta: Option<f64>,
    /// Mode-match visibility of the interference dip.
    #[arg(long)]
    visibility: Option<f64>,
    /// Draw Poisson counts around the expected counts.
    #[arg(long)]
    monte_carlo: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Which experiment to run.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Delay for `point`, femtoseconds.
    #[arg(long)]
    delay_fs: Option<f64>,
    /// Target state for `tomo`.
    #[arg(long, value_enum)]
    state: Option<TargetState>,
    /// Expected counts per tomography setting.
    #[arg(long)]
    counts: Option<f64>,
    /// Reconstruct from this counts CSV instead of simulating.
    #[arg(long)]
    counts_file: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
}

#[derive(Args)]
struct TomoArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target state whose counts are simulated and whose fidelity is
    /// reported.
    #[arg(long, value_enum)]
    state: Option<TargetState>,
    /// Expected counts per setting.
    #[arg(long)]
    counts: Option<f64>,
    /// Reconstruct from this counts CSV instead of simulating.
    #[arg(long)]
    counts_file: Option<PathBuf>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Which curve the point belongs to.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Delay in femtoseconds.
    #[arg(long)]
    delay_fs: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Print criterion identifiers without running anything.
    #[arg(long)]
    list: bool,
    /// Override the wavepacket coherence time, femtoseconds.
    #[arg(long)]
    tau_c_fs: Option<f64>,
    /// RNG seed for the randomized criteria.
    #[arg(long)]
    seed: Option<u64>,
}

/// The experiments the CLI can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    ScanProjected,
    ScanBaseline,
    HomDip,
    Tomo,
    Point,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::ScanProjected => "scan-projected",
            Experiment::ScanBaseline => "scan-baseline",
            Experiment::HomDip => "hom-dip",
            Experiment::Tomo => "tomo",
            Experiment::Point => "point",
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text {
            "scan-projected" => Ok(Experiment::ScanProjected),
            "scan-baseline" => Ok(Experiment::ScanBaseline),
            "hom-dip" => Ok(Experiment::HomDip),
            "tomo" => Ok(Experiment::Tomo),
            "point" => Ok(Experiment::Point),
            other => Err(Error::Config(format!("unknown experiment {other:?}"))),
        }
    }

    fn scan_kind(self) -> Option<ScanKind> {
        match self {
            Experiment::ScanProjected => Some(ScanKind::Projected),
            Experiment::ScanBaseline => Some(ScanKind::Baseline),
            Experiment::HomDip => Some(ScanKind::HomDip),
            _ => None,
        }
    }
}

/// Artifact serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// Tomography target states addressable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetState {
    #[value(name = "HV")]
    Hv,
    #[value(name = "VH")]
    Vh,
    #[value(name = "BELL")]
    Bell,
    #[value(name = "MIXED")]
    Mixed,
}

impl TargetState {
    fn name(self) -> &'static str {
        match self {
            TargetState::Hv => "HV",
            TargetState::Vh => "VH",
            TargetState::Bell => "BELL",
            TargetState::Mixed => "MIXED",
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text {
            "HV" => Ok(TargetState::Hv),
            "VH" => Ok(TargetState::Vh),
            "BELL" => Ok(TargetState::Bell),
            "MIXED" => Ok(TargetState::Mixed),
            other => Err(Error::Config(format!("unknown state {other:?}"))),
        }
    }

    fn density(self) -> Result<DensityMatrix> {
        Ok(match self {
            TargetState::Hv => DensityMatrix::from_pure(&pair_ket("HV")?)?,
            TargetState::Vh => DensityMatrix::from_pure(&pair_ket("VH")?)?,
            TargetState::Bell => entangled_target_density(),
            TargetState::Mixed => DensityMatrix::maximally_mixed(),
        })
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub scan: ExperimentConfig,
    pub counts_per_setting: f64,
    pub state: TargetState,
    pub counts_file: Option<PathBuf>,
    pub delay_fs: f64,
    pub monte_carlo: bool,
    pub out: PathBuf,
    pub format: OutputFormat,
    /// Optical elements constructed from config-file keys, range-checked.
    pub elements: Vec<ElementSpec>,
    /// Which curve the `point` command samples.
    pub point_kind: ScanKind,
    pub seed: u64,
}

/// Everything a source (flags or file) may specify; `None` falls through to
/// the next source.
#[derive(Debug, Default, Clone)]
struct Overrides {
    experiment: Option<Experiment>,
    tau_c_fs: Option<f64>,
    scan_min_um: Option<f64>,
    scan_max_um: Option<f64>,
    points: Option<usize>,
    pairs: Option<f64>,
    eta: Option<f64>,
    visibility: Option<f64>,
    seed: Option<u64>,
    monte_carlo: Option<bool>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    state: Option<TargetState>,
    counts: Option<f64>,
    counts_file: Option<PathBuf>,
    delay_fs: Option<f64>,
    hwp_angle_rad: Option<f64>,
    polarizer_angle_rad: Option<f64>,
    bs_reflectivity: Option<f64>,
    delay_line_fs: Option<f64>,
}

impl Overrides {
    fn from_flags(
        common: &CommonArgs,
        physics: &PhysicsArgs,
        experiment: Option<Experiment>,
        delay_fs: Option<f64>,
        state: Option<TargetState>,
        counts: Option<f64>,
        counts_file: Option<PathBuf>,
    ) -> Self {
        Self {
            experiment,
            tau_c_fs: physics.tau_c_fs,
            scan_min_um: physics.scan_min_um,
            scan_max_um: physics.scan_max_um,
            points: physics.points,
            pairs: physics.pairs,
            eta: physics.eta,
            visibility: physics.visibility,
            seed: common.seed,
            monte_carlo: if physics.monte_carlo { Some(true) } else { None },
            out: common.out.clone(),
            format: common.format,
            state,
            counts,
            counts_file,
            delay_fs,
            ..Self::default()
        }
    }
}

/// Parse the flat key-value config file into raw pairs. `#` starts a
/// comment, blank lines are skipped, section headers are not supported.
fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            return Err(Error::Config(format!(
                "line {}: sections are not supported; use flat key = value entries",
                lineno + 1
            )));
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("config key {key:?}: {e}")))
}

/// Interpret the raw pairs; unknown keys are rejected.
fn overrides_from_file(text: &str) -> Result<Overrides> {
    let mut o = Overrides::default();
    for (key, value) in parse_key_values(text)? {
        match key.as_str() {
            "experiment" => o.experiment = Some(Experiment::parse(&value)?),
            "tau-c-fs" => o.tau_c_fs = Some(parse_value(&key, &value)?),
            "scan-min-um" => o.scan_min_um = Some(parse_value(&key, &value)?),
            "scan-max-um" => o.scan_max_um = Some(parse_value(&key, &value)?),
            "points" => o.points = Some(parse_value(&key, &value)?),
            "pairs" => o.pairs = Some(parse_value(&key, &value)?),
            "eta" => o.eta = Some(parse_value(&key, &value)?),
            "visibility" => o.visibility = Some(parse_value(&key, &value)?),
            "seed" => o.seed = Some(parse_value(&key, &value)?),
            "monte-carlo" => o.monte_carlo = Some(parse_value(&key, &value)?),
            "out" => o.out = Some(PathBuf::from(value)),
            "format" => o.format = Some(OutputFormat::parse(&value)?),
            "state" => o.state = Some(TargetState::parse(&value)?),
            "counts" => o.counts = Some(parse_value(&key, &value)?),
            "counts-file" => o.counts_file = Some(PathBuf::from(value)),
            "delay-fs" => o.delay_fs = Some(parse_value(&key, &value)?),
            "hwp-angle-rad" => o.hwp_angle_rad = Some(parse_value(&key, &value)?),
            "polarizer-angle-rad" => o.polarizer_angle_rad = Some(parse_value(&key, &value)?),
            "bs-reflectivity" => o.bs_reflectivity = Some(parse_value(&key, &value)?),
            "delay-line-fs" => o.delay_line_fs = Some(parse_value(&key, &value)?),
            other => {
                return Err(Error::Config(format!("unknown config key {other:?}")));
            }
        }
    }
    Ok(o)
}

fn env_seed(env: Option<&str>) -> Result<Option<u64>> {
    match env {
        None => Ok(None),
        Some(text) => text
            .parse::<u64>()
            .map(Some)
            .map_err(|e| Error::Config(format!("{SEED_ENV_VAR}: {e}"))),
    }
}

/// Merge flag, file, and environment sources into a validated [`RunConfig`].
fn resolve(
    flags: Overrides,
    file: Overrides,
    env_seed: Option<u64>,
    default_experiment: Option<Experiment>,
) -> Result<RunConfig> {
    fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
        flag.or(file)
    }

    let experiment = pick(flags.experiment, file.experiment)
        .or(default_experiment)
        .ok_or_else(|| {
            Error::Config("no experiment selected; pass --experiment or set it in the config file".into())
        })?;

    let seed = flags
        .seed
        .or(file.seed)
        .or(env_seed)
        .unwrap_or(DEFAULT_SEED);

    let scan_min = pick(flags.scan_min_um, file.scan_min_um).unwrap_or(-DEFAULT_SCAN_HALF_RANGE_UM);
    let scan_max = pick(flags.scan_max_um, file.scan_max_um).unwrap_or(DEFAULT_SCAN_HALF_RANGE_UM);
    let points = pick(flags.points, file.points).unwrap_or(DEFAULT_SCAN_POINTS);
    if !(scan_min.is_finite() && scan_max.is_finite()) || scan_min > scan_max {
        return Err(Error::Config(format!(
            "scan range [{scan_min}, {scan_max}] um is invalid"
        )));
    }
    if points == 0 {
        return Err(Error::Config("points must be at least 1".into()));
    }

    let eta = pick(flags.eta, file.eta);
    let scan = ExperimentConfig {
        tau_c_fs: pick(flags.tau_c_fs, file.tau_c_fs).unwrap_or(DEFAULT_TAU_C_FS),
        scan_positions_um: uniform_scan_positions(scan_min, scan_max, points),
        pair_budget: pick(flags.pairs, file.pairs).unwrap_or(DEFAULT_PAIR_BUDGET),
        polarizer_transmission: eta.unwrap_or(crate::experiments::DEFAULT_POLARIZER_TRANSMISSION),
        mode_match_visibility: pick(flags.visibility, file.visibility)
            .unwrap_or(crate::experiments::DEFAULT_MODE_MATCH_VISIBILITY),
        rng_seed: seed,
    };
    scan.validate()?;

    let counts_per_setting = pick(flags.counts, file.counts).unwrap_or(DEFAULT_COUNTS_PER_SETTING);
    if !counts_per_setting.is_finite() || counts_per_setting <= 0.0 {
        return Err(Error::Config(format!(
            "counts must be positive, got {counts_per_setting}"
        )));
    }

    let format = pick(flags.format, file.format).unwrap_or(match experiment {
        Experiment::Tomo => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });
    if experiment == Experiment::Tomo && format == OutputFormat::Csv {
        return Err(Error::Config(
            "the tomography artifact is a JSON density matrix; csv is not available".into(),
        ));
    }
    let out = pick(flags.out, file.out)
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", experiment.name(), format.extension())));

    let mut elements = Vec::new();
    if let Some(angle) = pick(flags.hwp_angle_rad, file.hwp_angle_rad) {
        elements.push(ElementSpec::HalfWavePlate { angle_rad: angle });
    }
    if let Some(angle) = pick(flags.polarizer_angle_rad, file.polarizer_angle_rad) {
        elements.push(ElementSpec::Polarizer {
            angle_rad: angle,
            transmission: eta.unwrap_or(1.0),
        });
    }
    if let Some(reflectivity) = pick(flags.bs_reflectivity, file.bs_reflectivity) {
        elements.push(ElementSpec::BeamSplitter { reflectivity });
    }
    if let Some(delay) = pick(flags.delay_line_fs, file.delay_line_fs) {
        elements.push(ElementSpec::DelayLine { delay_fs: delay });
    }
    for element in &elements {
        element.validate()?;
    }

    Ok(RunConfig {
        experiment,
        scan,
        counts_per_setting,
        state: pick(flags.state, file.state).unwrap_or(TargetState::Hv),
        counts_file: pick(flags.counts_file, file.counts_file),
        delay_fs: pick(flags.delay_fs, file.delay_fs).unwrap_or(0.0),
        monte_carlo: pick(flags.monte_carlo, file.monte_carlo).unwrap_or(false),
        out,
        format,
        elements,
        point_kind: ScanKind::Projected,
        seed,
    })
}

fn load_file_overrides(path: Option<&FsPath>) -> Result<Overrides> {
    match path {
        None => Ok(Overrides::default()),
        Some(path) => overrides_from_file(&std::fs::read_to_string(path)?),
    }
}

/// An error tagged with the exit code it maps to.
struct CliFailure {
    code: i32,
    message: String,
}

fn config_failure(error: Error) -> CliFailure {
    CliFailure {
        code: EXIT_INVALID_CONFIG,
        message: error.to_string(),
    }
}

fn runtime_failure(error: Error) -> CliFailure {
    CliFailure {
        code: EXIT_RUNTIME_FAILURE,
        message: error.to_string(),
    }
}

/// Parse arguments, dispatch, and return the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    let env = std::env::var(SEED_ENV_VAR).ok();
    match dispatch(cli, env.as_deref()) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(cli: Cli, env: Option<&str>) -> std::result::Result<i32, CliFailure> {
    match cli.command {
        Command::Verify(args) => Ok(run_verify(&args, env)),
        Command::Run(args) => {
            let config = configure(
                &args.common,
                &args.physics,
                args.experiment,
                args.delay_fs,
                args.state,
                args.counts,
                args.counts_file.clone(),
                env,
                None,
            )?;
            execute(&config)
        }
        Command::ScanProjected(args) => {
            let config = configure_scan(&args, env, Experiment::ScanProjected)?;
            execute(&config)
        }
        Command::ScanBaseline(args) => {
            let config = configure_scan(&args, env, Experiment::ScanBaseline)?;
            execute(&config)
        }
        Command::HomDip(args) => {
            let config = configure_scan(&args, env, Experiment::HomDip)?;
            execute(&config)
        }
        Command::Tomo(args) => {
            let config = configure(
                &args.common,
                &PhysicsArgs::default(),
                None,
                None,
                args.state,
                args.counts,
                args.counts_file.clone(),
                env,
                Some(Experiment::Tomo),
            )?;
            execute(&config)
        }
        Command::Point(args) => {
            let config = configure(
                &args.common,
                &args.physics,
                args.experiment,
                args.delay_fs,
                None,
                None,
                None,
                env,
                Some(Experiment::Point),
            )?;
            execute(&config)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn configure(
    common: &CommonArgs,
    physics: &PhysicsArgs,
    experiment: Option<Experiment>,
    delay_fs: Option<f64>,
    state: Option<TargetState>,
    counts: Option<f64>,
    counts_file: Option<PathBuf>,
    env: Option<&str>,
    forced: Option<Experiment>,
) -> std::result::Result<RunConfig, CliFailure> {
    let build = || -> Result<RunConfig> {
        let file = load_file_overrides(common.config.as_deref())?;
        let mut flags = Overrides::from_flags(
            common,
            physics,
            experiment,
            delay_fs,
            state,
            counts,
            counts_file,
        );
        // For `point` the --experiment flag (or config key) names the curve
        // being sampled; the command itself stays `point`. Other subcommands
        // are themselves the experiment and take precedence over the file.
        let mut point_kind = ScanKind::Projected;
        match forced {
            Some(Experiment::Point) => {
                if let Some(curve) = flags.experiment.or(file.experiment) {
                    point_kind = curve.scan_kind().ok_or_else(|| {
                        Error::Config(format!(
                            "point needs a scan experiment, got {}",
                            curve.name()
                        ))
                    })?;
                }
                flags.experiment = Some(Experiment::Point);
            }
            Some(other) => flags.experiment = Some(other),
            None => {}
        }
        let mut config = resolve(flags, file, env_seed(env)?, None)?;
        config.point_kind = point_kind;
        Ok(config)
    };
    build().map_err(config_failure)
}

fn configure_scan(
    args: &ScanArgs,
    env: Option<&str>,
    experiment: Experiment,
) -> std::result::Result<RunConfig, CliFailure> {
    configure(
        &args.common,
        &args.physics,
        None,
        None,
        None,
        None,
        None,
        env,
        Some(experiment),
    )
}

fn execute(config: &RunConfig) -> std::result::Result<i32, CliFailure> {
    match config.experiment {
        Experiment::ScanProjected => run_scan_command(config, ScanKind::Projected),
        Experiment::ScanBaseline => run_scan_command(config, ScanKind::Baseline),
        Experiment::HomDip => run_scan_command(config, ScanKind::HomDip),
        Experiment::Tomo => run_tomo(config),
        Experiment::Point => run_point(config),
    }
}

fn run_scan_command(config: &RunConfig, kind: ScanKind) -> std::result::Result<i32, CliFailure> {
    let body = || -> Result<String> {
        let curve = run_scan(kind, &config.scan, config.monte_carlo)?;
        let artifact = match config.format {
            OutputFormat::Csv => curve.to_csv_string(),
            OutputFormat::Json => curve.to_json_string()?,
        };
        std::fs::write(&config.out, artifact)?;
        Ok(summarize_scan(&curve, config))
    };
    let summary = body().map_err(runtime_failure)?;
    println!("{summary}");
    Ok(EXIT_OK)
}

fn summarize_scan(curve: &ScanCurve, config: &RunConfig) -> String {
    let n = curve.points.len();
    let out = config.out.display();
    match curve.kind {
        ScanKind::Projected => {
            let separated = curve
                .points
                .iter()
                .max_by(|a, b| a.delay_fs.abs().total_cmp(&b.delay_fs.abs()))
                .map(|p| p.probability)
                .unwrap_or(f64::NAN);
            let overlapped = curve
                .points
                .iter()
                .min_by(|a, b| a.delay_fs.abs().total_cmp(&b.delay_fs.abs()))
                .map(|p| p.probability)
                .unwrap_or(f64::NAN);
            format!(
                "projected scan: {n} points, P(separated) = {separated:.4}, P(overlapped) = {overlapped:.4}, wrote {out}"
            )
        }
        ScanKind::Baseline => format!(
            "baseline scan: {n} points, flat at {} expected pairs per point, wrote {out}",
            config.scan.pair_budget
        ),
        ScanKind::HomDip => match fit_visibility(curve) {
            Ok(vis) => format!("dip scan: {n} points, fitted visibility = {vis:.4}, wrote {out}"),
            Err(_) => format!("dip scan: {n} points, wrote {out}"),
        },
    }
}

fn run_tomo(config: &RunConfig) -> std::result::Result<i32, CliFailure> {
    let settings = TomographySettings {
        counts_per_setting: config.counts_per_setting,
        rng_seed: config.seed,
        ..TomographySettings::default()
    };
    settings.validate().map_err(config_failure)?;
    let target = config.state.density().map_err(config_failure)?;

    let body = || -> Result<String> {
        let (counts, counts_note) = match &config.counts_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                (counts_from_csv(&settings, &text)?, String::new())
            }
            None => {
                let drawn = simulate_tomography(&target, &settings)?;
                let csv = counts_to_csv(&settings, &drawn)?;
                let counts_path = config.out.with_extension("counts.csv");
                std::fs::write(&counts_path, csv)?;
                let note = format!(" and {}", counts_path.display());
                (drawn.into_iter().map(|n| n as f64).collect(), note)
            }
        };
        let reconstruction = mle_reconstruct(&counts, &settings)?;
        if !reconstruction.converged {
            eprintln!(
                "warning: optimizer hit the iteration cap after {} iterations",
                reconstruction.iterations
            );
        }
        std::fs::write(&config.out, reconstruction.density.to_json_string()?)?;
        let f = fidelity(&reconstruction.density, &target);
        Ok(format!(
            "tomography: fidelity vs {} = {f:.4} ({} iterations), wrote {}{}",
            config.state.name(),
            reconstruction.iterations,
            config.out.display(),
            counts_note
        ))
    };
    let summary = body().map_err(runtime_failure)?;
    println!("{summary}");
    Ok(EXIT_OK)
}

fn run_point(config: &RunConfig) -> std::result::Result<i32, CliFailure> {
    let body = || -> Result<f64> {
        match config.point_kind {
            ScanKind::Projected => {
                crate::experiments::polarization_hom_probability(config.delay_fs, &config.scan)
            }
            ScanKind::Baseline => {
                crate::experiments::baseline_pair_probability(config.delay_fs, &config.scan)
            }
            ScanKind::HomDip => {
                crate::experiments::hom_dip_probability(config.delay_fs, &config.scan)
            }
        }
    };
    let probability = body().map_err(runtime_failure)?;
    println!("probability = {probability}");
    Ok(EXIT_OK)
}

fn run_verify(args: &VerifyArgs, env: Option<&str>) -> i32 {
    if args.list {
        for id in criterion_ids() {
            println!("{id}");
        }
        return EXIT_OK;
    }
    let seed = match env_seed(env) {
        Ok(seed) => seed,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    let params = AcceptanceParams {
        tau_c_fs: args.tau_c_fs.unwrap_or(DEFAULT_TAU_C_FS),
        rng_seed: args.seed.or(seed).unwrap_or(DEFAULT_SEED),
    };
    let reports = run_all(&params);
    for report in &reports {
        println!("{report}");
    }
    match reports.iter().find(|r| !r.passed) {
        Some(first) => {
            eprintln!("verify: first failing criterion: {}", first.id);
            EXIT_VERIFY_FAILURE
        }
        None => EXIT_OK,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing_handles_comments_and_rejects_junk() {
        let text = "
# a comment
experiment = hom-dip
tau-c-fs = 210   # trailing comment
monte-carlo = true
";
        let o = overrides_from_file(text).unwrap();
        assert_eq!(o.experiment, Some(Experiment::HomDip));
        assert_eq!(o.tau_c_fs, Some(210.0));
        assert_eq!(o.monte_carlo, Some(true));

        assert!(overrides_from_file("unknown-key = 3").is_err());
        assert!(overrides_from_file("[section]\nseed = 1").is_err());
        assert!(overrides_from_file("seed = 1\nseed = 2").is_err());
        assert!(overrides_from_file("justtext").is_err());
        assert!(overrides_from_file("eta = not-a-number").is_err());
    }

    #[test]
    fn precedence_is_flag_then_file_then_env_then_default() {
        let flag = Overrides {
            seed: Some(1),
            ..Overrides::default()
        };
        let file = Overrides {
            seed: Some(2),
            ..Overrides::default()
        };
        let none = Overrides::default();

        let pick = |flags: &Overrides, file: &Overrides, env: Option<u64>| {
            resolve(
                flags.clone(),
                file.clone(),
                env,
                Some(Experiment::ScanProjected),
            )
            .unwrap()
            .seed
        };
        assert_eq!(pick(&flag, &file, Some(3)), 1);
        assert_eq!(pick(&none, &file, Some(3)), 2);
        assert_eq!(pick(&none, &none, Some(3)), 3);
        assert_eq!(pick(&none, &none, None), DEFAULT_SEED);
    }

    #[test]
    fn resolution_validates_physical_ranges() {
        let bad_eta = Overrides {
            eta: Some(1.5),
            ..Overrides::default()
        };
        assert!(resolve(
            bad_eta,
            Overrides::default(),
            None,
            Some(Experiment::ScanProjected)
        )
        .is_err());

        let bad_range = Overrides {
            scan_min_um: Some(10.0),
            scan_max_um: Some(-10.0),
            ..Overrides::default()
        };
        assert!(resolve(
            bad_range,
            Overrides::default(),
            None,
            Some(Experiment::ScanProjected)
        )
        .is_err());

        let bad_tau = Overrides {
            tau_c_fs: Some(0.0),
            ..Overrides::default()
        };
        assert!(resolve(
            bad_tau,
            Overrides::default(),
            None,
            Some(Experiment::ScanProjected)
        )
        .is_err());
    }

    #[test]
    fn default_out_path_tracks_experiment_and_format() {
        let config = resolve(
            Overrides::default(),
            Overrides::default(),
            None,
            Some(Experiment::ScanBaseline),
        )
        .unwrap();
        assert_eq!(config.out, PathBuf::from("scan-baseline.csv"));
        assert_eq!(config.format, OutputFormat::Csv);

        let json = Overrides {
            format: Some(OutputFormat::Json),
            ..Overrides::default()
        };
        let config = resolve(
            json,
            Overrides::default(),
            None,
            Some(Experiment::ScanBaseline),
        )
        .unwrap();
        assert_eq!(config.out, PathBuf::from("scan-baseline.json"));

        let config = resolve(
            Overrides::default(),
            Overrides::default(),
            None,
            Some(Experiment::Tomo),
        )
        .unwrap();
        assert_eq!(config.out, PathBuf::from("tomo.json"));
        assert_eq!(config.format, OutputFormat::Json);
    }

    #[test]
    fn element_keys_construct_validated_specs() {
        let text = "
hwp-angle-rad = 0.7853981633974483
polarizer-angle-rad = 0.7853981633974483
bs-reflectivity = 0.5
delay-line-fs = 533
eta = 0.968
";
        let file = overrides_from_file(text).unwrap();
        let config = resolve(
            Overrides::default(),
            file,
            None,
            Some(Experiment::ScanProjected),
        )
        .unwrap();
        assert_eq!(config.elements.len(), 4);

        let bad = overrides_from_file("bs-reflectivity = 1.5").unwrap();
        assert!(resolve(
            Overrides::default(),
            bad,
            None,
            Some(Experiment::ScanProjected)
        )
        .is_err());
    }

    #[test]
    fn tomo_rejects_csv_format() {
        let flags = Overrides {
            format: Some(OutputFormat::Csv),
            ..Overrides::default()
        };
        assert!(resolve(flags, Overrides::default(), None, Some(Experiment::Tomo)).is_err());
    }
}
