//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on a usage or configuration error, 1 when a
//! run fails. Errors are reported as one line on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use coop_oam_core::beam::{self, Beam};
use coop_oam_core::scenario::ScenarioConfig;
use coop_oam_core::selection::{self, UserField};
use thiserror::Error;

use crate::config::ConfigFile;
use crate::output::{self, BeamRecord, DeviationTable, Manifest, SweepRecord};
use crate::sweep::{self, RegionShape, SweepResult, SweepSpec, SweepVariable};

pub const GIT_DESCRIBE: &str = env!("COOP_OAM_GIT_DESCRIBE");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "coop-oam", version, about = "Cooperative OAM wireless link simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop one user field, run the pair search and write the users with their roles.
    Demo(Common),
    /// Analytic and Monte Carlo formation probability over a sweep.
    PcowSweep(SweepCommand),
    /// Spectrum efficiency of the cooperative link and the fixed-UCA baseline over a sweep.
    SeSweep(SweepCommand),
    /// Mean selected-CU count over a sweep.
    CuCountSweep(SweepCommand),
    /// Radial intensity profile of one OAM beam.
    BeamProfile(BeamCommand),
    /// Parse and validate a config, then print the resolved document.
    ValidateConfig(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON scenario file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set user_count=4000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, env = "COOP_OAM_OUTPUT_DIR", default_value = "out")]
    pub output_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rerun exactly what a previous manifest recorded.
    #[arg(long, conflicts_with_all = ["config", "set", "seed", "square"])]
    pub from_manifest: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Drop users in a square of side 2·R_BS instead of the coverage disk.
    #[arg(long)]
    pub square: bool,
}

#[derive(Debug, Args)]
pub struct SweepCommand {
    #[command(flatten)]
    pub common: Common,
    /// One of bs_coverage_radius, user_count, d2d_max, bs_height, ring_half_width.
    #[arg(long = "var")]
    pub variable: Option<SweepVariable>,
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BeamCommand {
    #[command(flatten)]
    pub common: Common,
    /// OAM mode; defaults to the largest |ℓ| of the mode set.
    #[arg(long, allow_hyphen_values = true)]
    pub mode: Option<i32>,
    /// Waist radius in meters; defaults to the UCA radius.
    #[arg(long)]
    pub waist: Option<f64>,
    /// Propagation distance in meters.
    #[arg(long, default_value_t = 50.0)]
    pub z: f64,
    /// Outer radius of the profile; defaults to three beam radii.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 2000;

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ValidateConfig(args) => validate_config(&args),
        Command::Demo(common) => demo(&common),
        Command::PcowSweep(cmd) => sweep_command("pcow-sweep", &cmd),
        Command::SeSweep(cmd) => sweep_command("se-sweep", &cmd),
        Command::CuCountSweep(cmd) => sweep_command("cu-count-sweep", &cmd),
        Command::BeamProfile(cmd) => beam_profile(&cmd),
    }
}

fn validate_config(args: &ConfigArgs) -> Result<(), CliError> {
    let file = ConfigFile::load(args.config.as_deref(), &args.set).map_err(usage)?;
    println!("{}", serde_json::to_string_pretty(&file).map_err(runtime)?);
    Ok(())
}

/// What a run is built from, either from flags or from a manifest.
struct Resolved {
    file: ConfigFile,
    cfg: ScenarioConfig,
    seed: u64,
    region: RegionShape,
    manifest: Option<Manifest>,
}

fn resolve(command: &str, common: &Common) -> Result<Resolved, CliError> {
    if let Some(path) = &common.from_manifest {
        let m = Manifest::read(path).map_err(|e| usage(format!("cannot read manifest {}: {e}", path.display())))?;
        if m.command != command {
            return Err(usage(format!("manifest was written by `{}`, not `{command}`", m.command)));
        }
        let cfg = m.config.scenario().map_err(usage)?;
        return Ok(Resolved { file: m.config.clone(), cfg, seed: m.seed, region: m.region, manifest: Some(m) });
    }
    let file = ConfigFile::load(common.config.config.as_deref(), &common.config.set).map_err(usage)?;
    let cfg = file.scenario().map_err(usage)?;
    let region = if common.square { RegionShape::Square } else { RegionShape::Disk };
    Ok(Resolved { file, cfg, seed: common.seed.unwrap_or(DEFAULT_SEED), region, manifest: None })
}

fn workers(common: &Common) -> usize {
    common.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn base_manifest(command: &str, r: &Resolved, workers: usize, started: u64) -> Manifest {
    Manifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        git_describe: GIT_DESCRIBE.into(),
        config: r.file.clone(),
        seed: r.seed,
        workers,
        region: r.region,
        sweep: None,
        beam: None,
        outputs: Vec::new(),
        started_unix_secs: started,
        wall_clock_secs: 0.0,
        deviation_table: None,
        points: Vec::new(),
    }
}

fn write_outputs(
    dir: &Path,
    csv_name: &str,
    csv: &[u8],
    mut manifest: Manifest,
    clock: Instant,
) -> Result<(), CliError> {
    manifest.outputs = vec![csv_name.to_string()];
    manifest.wall_clock_secs = clock.elapsed().as_secs_f64();
    let path = output::write_atomic(dir, csv_name, csv).map_err(runtime)?;
    output::write_atomic(dir, &Manifest::file_name(&manifest.command), &manifest.to_bytes()).map_err(runtime)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn default_sweep(command: &str) -> (SweepVariable, Vec<f64>) {
    match command {
        "cu-count-sweep" => (SweepVariable::UserCount, vec![1000.0, 2000.0, 3000.0, 4000.0]),
        _ => (SweepVariable::BsCoverageRadius, vec![100.0, 200.0, 300.0, 400.0, 500.0]),
    }
}

fn sweep_command(command: &str, cmd: &SweepCommand) -> Result<(), CliError> {
    let clock = Instant::now();
    let started = unix_now();
    let r = resolve(command, &cmd.common)?;
    let record = match &r.manifest {
        Some(m) => {
            if cmd.variable.is_some() || !cmd.values.is_empty() || cmd.trials.is_some() {
                return Err(usage("--var, --values and --trials cannot be combined with --from-manifest"));
            }
            m.sweep.clone().ok_or_else(|| usage("manifest has no sweep record"))?
        }
        None => {
            let (default_var, default_values) = default_sweep(command);
            let variable = cmd.variable.unwrap_or(default_var);
            let values = if !cmd.values.is_empty() {
                cmd.values.clone()
            } else if cmd.variable.is_none() || variable == default_var {
                default_values
            } else {
                return Err(usage(format!("--values is required when sweeping {variable}")));
            };
            SweepRecord { variable, values, trials: cmd.trials.unwrap_or(DEFAULT_TRIALS) }
        }
    };
    let spec = SweepSpec {
        variable: record.variable,
        values: record.values.clone(),
        trials: record.trials,
        base: r.cfg.clone(),
        master_seed: r.seed,
        region: r.region,
        evaluate_channel: command == "se-sweep",
    };
    spec.validate().map_err(usage)?;
    let workers = workers(&cmd.common);
    let result: SweepResult = sweep::run_sweep(&spec, workers).map_err(runtime)?;

    let mut manifest = base_manifest(command, &r, workers, started);
    manifest.sweep = Some(record);
    manifest.points =
        result.points.iter().map(|p| serde_json::to_value(p).map_err(runtime)).collect::<Result<_, _>>()?;
    let (name, csv) = match command {
        "pcow-sweep" => {
            manifest.deviation_table = Some(DeviationTable::from_result(&result));
            ("pcow-sweep.csv", output::pcow_csv(&result))
        }
        "se-sweep" => ("se-sweep.csv", output::se_csv(&result)),
        _ => ("cu-count-sweep.csv", output::cu_csv(&result)),
    };
    write_outputs(&cmd.common.output_dir, name, &csv, manifest, clock)
}

fn demo(common: &Common) -> Result<(), CliError> {
    let clock = Instant::now();
    let started = unix_now();
    let r = resolve("demo", common)?;
    let region = r.region.region(&r.cfg);
    let field = UserField::generate(r.cfg.user_count, region, r.seed);
    let sel = selection::select_pair(&field, &r.cfg);
    let (pus, cus) = match &sel.pair {
        Some(pair) => (selection::potential_users(&field, &pair.ring), [pair.cu.0, pair.cu.1]),
        None => (Vec::new(), [usize::MAX; 2]),
    };
    let rows = field.positions.iter().enumerate().map(|(i, p)| {
        let (x, y) = p.to_cartesian();
        let role = if cus.contains(&i) {
            "cu"
        } else if pus.contains(&i) {
            "pu"
        } else {
            "user"
        };
        [i.to_string(), p.r.to_string(), p.theta.to_string(), x.to_string(), y.to_string(), role.to_string()]
    });
    let csv = output::csv_bytes(&output::DEMO_HEADER, rows);
    match &sel.pair {
        Some(pair) => println!(
            "pair {:?} on ring r_s={} eps={} chord={} z_c={} waist={}",
            pair.cu, pair.ring.r_s, sel.epsilon, pair.chord, pair.z_c, pair.waist_radius
        ),
        None => println!("no cooperative pair after {} sweeps", sel.iterations_outer),
    }
    let manifest = base_manifest("demo", &r, 1, started);
    write_outputs(&common.output_dir, "demo.csv", &csv, manifest, clock)
}

fn beam_profile(cmd: &BeamCommand) -> Result<(), CliError> {
    let clock = Instant::now();
    let started = unix_now();
    let r = resolve("beam-profile", &cmd.common)?;
    let record = match r.manifest.as_ref().and_then(|m| m.beam.clone()) {
        Some(b) => b,
        None if r.manifest.is_some() => return Err(usage("manifest has no beam record")),
        None => {
            let mode = cmd.mode.unwrap_or(r.cfg.max_abs_mode() as i32);
            let waist = cmd.waist.unwrap_or(r.cfg.uca_radius);
            let probe = Beam::oam(mode, waist, r.cfg.wavelength()).map_err(usage)?;
            let r_max = cmd.r_max.unwrap_or(3.0 * probe.beam_radius(cmd.z));
            BeamRecord { mode, waist, z: cmd.z, r_max, points: cmd.points }
        }
    };
    if record.points < 2 || record.r_max.is_nan() || record.r_max <= 0.0 || record.z.is_nan() || record.z < 0.0 {
        return Err(usage("beam profile needs at least 2 points, r_max > 0 and z >= 0"));
    }
    let b = Beam::oam(record.mode, record.waist, r.cfg.wavelength()).map_err(usage)?;
    let step = record.r_max / (record.points - 1) as f64;
    let rows = (0..record.points)
        .map(|i| {
            let rr = i as f64 * step;
            beam::lg_intensity(&b, rr, record.z).map(|u| [rr.to_string(), u.to_string()])
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let csv = output::csv_bytes(&output::BEAM_HEADER, rows);
    let mut manifest = base_manifest("beam-profile", &r, 1, started);
    manifest.beam = Some(record);
    write_outputs(&cmd.common.output_dir, "beam-profile.csv", &csv, manifest, clock)
}
