//! Subcommand implementations. Argument structs carry the clap derives, but
//! every command is a plain function over `Ctx` + args so tests can call it
//! without spawning a process.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dualstream_core::autoencoder::{loss_curve_to_csv, train, AutoencoderModel, Topology};
use dualstream_core::fusion::{
    calibrate, calibration_to_text, health_from_csv, health_to_csv, health_pipeline, raw_health,
    HealthVector, Quadrant,
};
use dualstream_core::physics::physics_vector;
use dualstream_core::stats::{correlation_report, mwu_battery, mwu_to_csv, LabeledWindow};
use dualstream_core::synthgen::{
    generate_corpus, generate_mission, CorpusConfig, Mission, MissionSpec, Scenario,
    DEFAULT_EVENT_RATE_PER_MIN, DEFAULT_GRADE, DEFAULT_NOISE_STD, PAPER_MASSES,
};
use dualstream_core::telemetry::{split_by_mission, Label, Window};

use crate::config::RunConfig;
use crate::{bench, io, CliError};

/// Global flags resolved once in `main`.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub seed: u64,
    pub config: RunConfig,
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generate a scenario x mass grid instead of a single mission.
    #[arg(long)]
    pub corpus: bool,
    /// Missions per scenario x mass cell (corpus mode).
    #[arg(long, default_value_t = 2)]
    pub per_cell: usize,
    /// cruise | pothole | speed_bump | ramp | rough_terrain.
    /// Required for single missions; restricts the grid in corpus mode.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Vehicle mass in kg. Single mission: defaults to the config mass.
    /// Corpus mode: restricts the grid to this one mass.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Base speed in m/s (single mission).
    #[arg(long, default_value_t = 12.0)]
    pub speed: f64,
    /// Per-mission speed draw range in m/s (corpus mode).
    #[arg(long, default_value_t = 8.0)]
    pub speed_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub speed_max: f64,
    /// Mission length in seconds.
    #[arg(long, default_value_t = 120.0)]
    pub duration: f64,
    /// Accelerometer noise sigma in m/s^2.
    #[arg(long, default_value_t = DEFAULT_NOISE_STD)]
    pub noise_std: f64,
    /// Pothole / speed-bump arrivals per minute.
    #[arg(long, default_value_t = DEFAULT_EVENT_RATE_PER_MIN)]
    pub event_rate: f64,
    /// Ramp grade in radians.
    #[arg(long, default_value_t = DEFAULT_GRADE)]
    pub grade: f64,
    /// Drop the pitch channel so scoring exercises the estimation fallback.
    #[arg(long)]
    pub strip_theta: bool,
}

pub fn cmd_generate(ctx: &Ctx, args: &GenerateArgs) -> Result<(), CliError> {
    let scenario = match &args.scenario {
        Some(s) => Some(
            Scenario::parse(s)
                .ok_or_else(|| CliError::Usage(format!("unknown scenario `{}`", s)))?,
        ),
        None => None,
    };

    let mut missions: Vec<Mission> = if args.corpus {
        let cfg = CorpusConfig {
            per_cell: args.per_cell,
            scenarios: scenario.map_or_else(|| Scenario::ALL.to_vec(), |s| vec![s]),
            masses: args.mass.map_or_else(|| PAPER_MASSES.to_vec(), |m| vec![m]),
            duration_s: args.duration,
            speed_range: (args.speed_min, args.speed_max),
            noise_std: args.noise_std,
            event_rate_per_min: args.event_rate,
            grade: args.grade,
            seed: ctx.seed,
        };
        generate_corpus(&cfg)?
    } else {
        let scenario = scenario.ok_or_else(|| {
            CliError::Usage("single-mission mode needs --scenario (or pass --corpus)".into())
        })?;
        let spec = MissionSpec {
            scenario,
            duration_s: args.duration,
            mass: args.mass.unwrap_or(ctx.config.mass_kg),
            base_speed: args.speed,
            seed: ctx.seed,
            noise_std: args.noise_std,
            grade: args.grade,
            event_rate_per_min: args.event_rate,
        };
        let id = format!("{}-m{}-s{}", scenario.as_str(), spec.mass, ctx.seed);
        vec![generate_mission(&spec, &id)?]
    };

    if args.strip_theta {
        for m in missions.iter_mut() {
            *m = m.strip_theta();
        }
    }

    for m in &missions {
        io::write_mission(&ctx.output_dir, m)?;
    }
    println!(
        "wrote {} mission(s) to {} (digest=0x{:016x})",
        missions.len(),
        ctx.output_dir.display(),
        io::corpus_digest(&missions)
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TopologyFlag {
    /// [32, 16] encoder, fast enough for laptops and CI.
    Desk,
    /// [128, 64, 32] encoder.
    Paper,
}

impl TopologyFlag {
    pub fn topology(self) -> Topology {
        match self {
            TopologyFlag::Desk => Topology::desk(),
            TopologyFlag::Paper => Topology::paper(),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Telemetry corpus: a directory of <mission>.csv/.meta pairs or one CSV.
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = TopologyFlag::Desk)]
    pub topology: TopologyFlag,
    /// Model artifact path (default: <output-dir>/model.bin).
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Loss curve CSV path (default: <output-dir>/loss.csv).
    #[arg(long)]
    pub loss_out: Option<PathBuf>,
    /// Override the configured epoch count.
    #[arg(long)]
    pub epochs: Option<usize>,
}

pub fn cmd_train(ctx: &Ctx, args: &TrainArgs) -> Result<(), CliError> {
    let (windows, discards) = io::load_windows(&args.corpus)?;
    discards.report();
    let normal: Vec<Window> = windows
        .into_iter()
        .filter(|w| w.label == Some(Label::Normal))
        .collect();
    if normal.is_empty() {
        return Err(CliError::Other(
            "corpus holds no Normal-labeled windows; training needs labeled normal driving".into(),
        ));
    }

    let split = split_by_mission(normal, (0.7, 0.15, 0.15), ctx.seed)?;
    if split.train.is_empty() || split.val.is_empty() {
        return Err(CliError::Other(
            "corpus too small to carve train and validation missions; generate more missions"
                .into(),
        ));
    }

    let mut train_cfg = ctx.config.train.clone();
    train_cfg.seed = ctx.seed;
    if let Some(epochs) = args.epochs {
        train_cfg.epochs = epochs;
    }
    if !train_cfg.is_valid() {
        return Err(CliError::Usage("epochs must be at least 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let init = AutoencoderModel::init(args.topology.topology(), &mut rng);
    println!(
        "training {:?} topology: {} parameters, {}/{}/{} train/val/test windows",
        args.topology,
        init.param_count(),
        split.train.len(),
        split.val.len(),
        split.test.len()
    );

    let (model, curve) = train(init, &split.train, &split.val, &train_cfg)?;
    let first = curve.first().expect("at least one epoch");
    let last = curve.last().expect("at least one epoch");
    println!(
        "val loss {:.6} -> {:.6} over {} epochs",
        first.val_loss,
        last.val_loss,
        curve.len()
    );

    let model_out = args
        .model_out
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("model.bin"));
    let loss_out = args
        .loss_out
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("loss.csv"));
    io::save_model(&model_out, &model)?;
    io::write_file(&loss_out, loss_curve_to_csv(&curve).as_bytes())?;
    println!("model written to {}", model_out.display());
    println!("loss curve written to {}", loss_out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Trained model artifact.
    pub model: PathBuf,
    /// Calibration corpus: directory of missions or one CSV.
    pub corpus: PathBuf,
    /// Calibration file path (default: <output-dir>/calibration.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_calibrate(ctx: &Ctx, args: &CalibrateArgs) -> Result<(), CliError> {
    let model = io::load_model(&args.model)?;
    let (windows, discards) = io::load_windows(&args.corpus)?;
    discards.report();
    let rows: Vec<_> = windows
        .iter()
        .map(|w| raw_health(w, &model, &ctx.config.physics_for(w.mass)))
        .collect();
    let cal = calibrate(&rows)?;
    for channel in cal.degenerate_channels() {
        eprintln!(
            "warning: channel {} is degenerate (constant over the corpus); it will normalize to 0",
            channel.as_str()
        );
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("calibration.csv"));
    io::write_file(&out, calibration_to_text(&cal).as_bytes())?;
    println!(
        "calibrated on {} windows; scales written to {}",
        rows.len(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Trained model artifact.
    pub model: PathBuf,
    /// Telemetry to score: directory of missions or one CSV.
    pub telemetry: PathBuf,
    /// Calibration file (default: <output-dir>/calibration.csv).
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Health CSV path (default: <output-dir>/health.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write raw proxies with their pitch provenance.
    #[arg(long)]
    pub proxies_out: Option<PathBuf>,
}

pub fn cmd_score(ctx: &Ctx, args: &ScoreArgs) -> Result<(), CliError> {
    let model = io::load_model(&args.model)?;
    let cal_path = args
        .calibration
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("calibration.csv"));
    let cal = io::load_calibration(&cal_path)?;
    let (windows, discards) = io::load_windows(&args.telemetry)?;
    discards.report();

    let rows: Vec<HealthVector> = windows
        .iter()
        .map(|w| health_pipeline(w, &model, &ctx.config.physics_for(w.mass), &cal, &ctx.config.fusion))
        .collect();
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("health.csv"));
    io::write_file(&out, health_to_csv(&rows).as_bytes())?;

    if let Some(proxies_out) = &args.proxies_out {
        let mut csv = String::from("mission_id,window_idx,e_susp,e_lat,w_drive,e_brake,theta_source\n");
        for w in &windows {
            let (p, source) = physics_vector(w, &ctx.config.physics_for(w.mass));
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                w.mission_id, w.index, p.e_susp, p.e_lat, p.w_drive, p.e_brake,
                source.as_str()
            ));
        }
        io::write_file(proxies_out, csv.as_bytes())?;
    }

    let mut counts: BTreeMap<Quadrant, usize> = BTreeMap::new();
    for row in &rows {
        *counts.entry(row.quadrant).or_insert(0) += 1;
    }
    println!("scored {} windows; health written to {}", rows.len(), out.display());
    for (quadrant, count) in &counts {
        println!("  {}: {}", quadrant, count);
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Health CSV produced by `score`.
    pub health: PathBuf,
    /// Directory holding the missions' .meta files (labels and masses).
    #[arg(long)]
    pub meta_dir: PathBuf,
    /// Correlation report path (default: <output-dir>/correlations.csv).
    #[arg(long)]
    pub correlations_out: Option<PathBuf>,
    /// Mann-Whitney report path (default: <output-dir>/mwu.csv).
    #[arg(long)]
    pub mwu_out: Option<PathBuf>,
}

pub fn cmd_analyze(ctx: &Ctx, args: &AnalyzeArgs) -> Result<(), CliError> {
    let rows = health_from_csv(&io::read_text(&args.health)?)?;
    let metas = io::load_meta_dir(&args.meta_dir)?;
    let by_id: BTreeMap<&str, _> = metas.iter().map(|m| (m.mission_id.as_str(), m)).collect();

    let mut labeled = Vec::with_capacity(rows.len());
    for row in &rows {
        let meta = by_id.get(row.mission_id.as_str()).ok_or_else(|| {
            CliError::Other(format!(
                "mission {} has no .meta file under {}",
                row.mission_id,
                args.meta_dir.display()
            ))
        })?;
        let label = meta
            .label_track
            .as_ref()
            .and_then(|t| t.get(row.window_idx))
            .copied()
            .ok_or_else(|| {
                CliError::Other(format!(
                    "mission {} has no label for window {}",
                    row.mission_id, row.window_idx
                ))
            })?;
        labeled.push(LabeledWindow {
            a_ml: row.a_ml_raw,
            proxies: row.proxies,
            label,
            mass: meta.mass_kg,
        });
    }

    let report = correlation_report(&labeled)?;
    let tests = mwu_battery(&labeled);
    let corr_out = args
        .correlations_out
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("correlations.csv"));
    let mwu_out = args
        .mwu_out
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("mwu.csv"));
    io::write_file(&corr_out, report.to_csv().as_bytes())?;
    io::write_file(&mwu_out, mwu_to_csv(&tests).as_bytes())?;
    println!(
        "analyzed {} windows: {} correlation rows to {}, {} tests to {}",
        labeled.len(),
        report.rows.len(),
        corr_out.display(),
        tests.len(),
        mwu_out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Trained model artifact.
    pub model: PathBuf,
    /// Telemetry to time against: directory of missions or one CSV.
    pub telemetry: PathBuf,
    /// Calibration file (default: <output-dir>/calibration.csv).
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 100)]
    pub warmup: usize,
    /// Also write the report to a file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_bench(ctx: &Ctx, args: &BenchArgs) -> Result<(), CliError> {
    let model = io::load_model(&args.model)?;
    let cal_path = args
        .calibration
        .clone()
        .unwrap_or_else(|| ctx.output_dir.join("calibration.csv"));
    let cal = io::load_calibration(&cal_path)?;
    let (windows, _) = io::load_windows(&args.telemetry)?;
    let params: Vec<_> = windows.iter().map(|w| ctx.config.physics_for(w.mass)).collect();

    let report = bench::run(
        &windows,
        &model,
        &params,
        &cal,
        &ctx.config.fusion,
        args.iterations,
        args.warmup,
    )?;
    let text = bench::format_report(&report);
    print!("{}", text);
    if let Some(out) = &args.out {
        io::write_file(out, text.as_bytes())?;
    }
    Ok(())
}
