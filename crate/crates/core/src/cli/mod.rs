//! Command-line front end.
//!
//! ```text
//! photomap register|map|simulate|evaluate [args] [--config FILE] [--set key=value]... [--seed N]
//! ```
//!
//! Exit codes: 0 success, 1 I/O or configuration error, 2 data error.

pub mod config;
pub mod evaluate;
pub mod trajectory;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{ConfigError, RunConfig};
pub use evaluate::{evaluate, EvaluationReport};
pub use trajectory::{parse_log, write_log};

use crate::flightsim::{CommandScript, GroundWorld, PixelNoise, Simulation};
use crate::imageio::{self, has_image_extension, quantize8};
use crate::photomap::{MapBuilder, MapExport, TrajectoryRecord};
use crate::preprocess::{to_grayscale, Frame};
use crate::registration::{Registrar, RegistrationError};
use trajectory::fixed;

/// Name of the ground-truth log written by `simulate`.
pub const GROUND_TRUTH_LOG: &str = "ground_truth.log";

#[derive(Debug, Parser)]
#[command(name = "photomap", version, about = "Fourier-Mellin photomapping from aerial frame sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Seed for any randomness (required when noise_sigma > 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register image B against image A and print `scale rotation tx ty confidence`
    Register { image_a: PathBuf, image_b: PathBuf },
    /// Build a photomap from every image in a directory (lexicographic order)
    Map {
        frames_dir: PathBuf,
        out_map: PathBuf,
        out_trajectory: PathBuf,
    },
    /// Fly the simulated blimp over a texture and write frames plus ground truth
    Simulate {
        texture: PathBuf,
        script: PathBuf,
        out_dir: PathBuf,
    },
    /// Compare an estimated trajectory log against ground truth
    Evaluate { estimated: PathBuf, truth: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    /// I/O, decode or configuration problems (exit 1).
    Io(String),
    /// Bad data: degenerate frames, malformed scripts (exit 2).
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Data(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Io(format!("config: {e}"))
    }
}

impl From<imageio::ImageIoError> for CliError {
    fn from(e: imageio::ImageIoError) -> Self {
        CliError::Io(e.to_string())
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Parses arguments, runs one command, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "photomap: {}", e.message());
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_text(&read_text(path)?)?;
    }
    for a in &cli.set {
        cfg.set_assignment(a)?;
    }
    cfg.validate()?;
    if cfg.noise_sigma > 0.0 && cli.seed.is_none() {
        return Err(CliError::Io("config: noise_sigma > 0 requires --seed".into()));
    }
    Ok(cfg)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Register { image_a, image_b } => cmd_register(image_a, image_b, &cfg, out),
        Command::Map {
            frames_dir,
            out_map,
            out_trajectory,
        } => cmd_map(frames_dir, out_map, out_trajectory, &cfg, out),
        Command::Simulate {
            texture,
            script,
            out_dir,
        } => cmd_simulate(texture, script, out_dir, &cfg, cli.seed, out),
        Command::Evaluate { estimated, truth } => cmd_evaluate(estimated, truth, out),
    }
}

fn load_frame(path: &Path, index: usize, cfg: &RunConfig) -> Result<Frame, CliError> {
    let raw = imageio::read_image(path)?;
    cfg.preprocessor()
        .process(&raw, index)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn registration_error(e: RegistrationError) -> CliError {
    match e {
        RegistrationError::DegenerateInput => CliError::Data("degenerate input".into()),
        other => CliError::Data(other.to_string()),
    }
}

pub fn cmd_register(a: &Path, b: &Path, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let fa = load_frame(a, 0, cfg)?;
    let fb = load_frame(b, 1, cfg)?;
    let registrar = Registrar::new(cfg.frame_size, cfg.fmi()).map_err(registration_error)?;
    let r = registrar.register(&fa, &fb).map_err(registration_error)?;
    let t = r.transform;
    writeln!(
        out,
        "{} {} {} {} {}",
        fixed(t.scale, 6),
        fixed(t.rotation, 6),
        fixed(t.tx, 3),
        fixed(t.ty, 3),
        fixed(r.confidence, 6)
    )
    .map_err(|e| CliError::Io(e.to_string()))
}

/// Image files in `dir`, sorted by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = entry.path();
        if path.is_file() && has_image_extension(&path) {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(paths)
}

/// Path of the metadata record written next to a map raster.
pub fn sidecar_path(map_path: &Path) -> PathBuf {
    let mut s = map_path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn write_map(path: &Path, export: &MapExport, tile_size: usize, frame_count: usize) -> Result<(), CliError> {
    let samples = export.values.iter().map(|&v| quantize8(v as f64)).collect();
    imageio::write_gray8(path, export.width, export.height, samples)?;
    let meta = format!(
        "origin_x={}\norigin_y={}\nwidth={}\nheight={}\ntile_size={}\nframe_count={}\n",
        export.origin_x, export.origin_y, export.width, export.height, tile_size, frame_count
    );
    write_text(&sidecar_path(path), &meta)
}

pub fn cmd_map(
    frames_dir: &Path,
    out_map: &Path,
    out_trajectory: &Path,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let paths = list_frames(frames_dir)?;
    if paths.is_empty() {
        return Err(CliError::Io(format!("{}: no image files", frames_dir.display())));
    }
    let mut builder =
        MapBuilder::new(cfg.fmi(), cfg.canvas()).map_err(|e| CliError::Io(format!("config: {e}")))?;
    for (i, p) in paths.iter().enumerate() {
        let frame = load_frame(p, i, cfg)?;
        builder
            .push(frame)
            .map_err(|e| CliError::Io(format!("config: {e}")))?;
    }
    let (canvas, records) = builder.finish();
    let export = canvas
        .export()
        .map_err(|e| CliError::Data(e.to_string()))?;
    write_map(out_map, &export, canvas.tile_size(), canvas.frame_count())?;
    write_text(out_trajectory, &write_log(&records))?;
    let accepted = records.iter().filter(|r| r.accepted).count();
    writeln!(
        out,
        "frames={} accepted={} map={}x{}",
        records.len(),
        accepted,
        export.width,
        export.height
    )
    .map_err(|e| CliError::Io(e.to_string()))
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

pub fn cmd_simulate(
    texture: &Path,
    script: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let tex = to_grayscale(&imageio::read_image(texture)?).to_raster();
    let script_text = read_text(script)?;
    let script = CommandScript::parse(&script_text)
        .map_err(|e| CliError::Data(format!("{}: {e}", script.display())))?;
    let world = GroundWorld::new(tex, cfg.meters_per_texel, cfg.background);
    let sim = Simulation {
        model: cfg.blimp_model(),
        camera: cfg.camera(),
        initial: cfg.initial_state(),
        capture_interval: cfg.capture_interval,
        duration: cfg.duration,
        noise: (cfg.noise_sigma > 0.0).then(|| PixelNoise {
            sigma: cfg.noise_sigma,
            seed: seed.unwrap_or(0),
        }),
    };
    let captures = sim
        .run(&world, &script)
        .map_err(|e| CliError::Io(format!("config: {e}")))?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    for c in &captures {
        imageio::write_gray16(&out_dir.join(frame_file_name(c.index)), &c.image)?;
    }
    let records: Vec<TrajectoryRecord> = sim
        .ground_truth(&captures)
        .into_iter()
        .enumerate()
        .map(|(i, pose)| TrajectoryRecord {
            frame_index: i,
            pose,
            confidence: 1.0,
            accepted: true,
        })
        .collect();
    write_text(&out_dir.join(GROUND_TRUTH_LOG), &write_log(&records))?;
    writeln!(out, "frames={} truth={}", captures.len(), GROUND_TRUTH_LOG)
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn cmd_evaluate(estimated: &Path, truth: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let parse = |p: &Path| -> Result<Vec<TrajectoryRecord>, CliError> {
        parse_log(&read_text(p)?).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    };
    let est = parse(estimated)?;
    let tru = parse(truth)?;
    let report = evaluate(&est, &tru).ok_or_else(|| {
        CliError::Io(format!(
            "frame count mismatch: {} estimated vs {} truth",
            est.len(),
            tru.len()
        ))
    })?;
    write!(out, "{}", report.render()).map_err(|e| CliError::Io(e.to_string()))
}
