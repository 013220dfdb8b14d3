//! The `salsa` command-line tool.
//!
//! Exit codes: 0 success, 2 input or usage error, 3 output error.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::audio_io::{
    read_metadata_csv, read_wav, resample_if_needed, write_metadata_csv, write_wav,
};
use crate::augment::{
    apply_spatial_pattern_feature, apply_spatial_pattern_labels, random_cutout, spec_augment,
    ss_bin_dropout, SpatialPattern,
};
use crate::config::ToolConfig;
use crate::error::SalsaError;
use crate::feature_file::{read_feature_file, write_feature_file};
use crate::metrics::{compute_scores_with, match_events};
use crate::salsa::{salsa_from_spectrogram, NUM_INPUT_CHANNELS};
use crate::synth::{parse_scene_spec, render_foa};
use crate::tfr::stft;
use crate::types::ArrayFormat;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_OUTPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "salsa",
    version,
    about = "SALSA feature extraction, augmentation, synthesis and SELD scoring"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract an 8-channel feature file from a 4-channel WAV.
    Extract(ExtractArgs),
    /// Render a scene description to WAV plus metadata CSV.
    Synth(SynthArgs),
    /// Score predicted metadata against reference metadata.
    Score(ScoreArgs),
    /// Transform a feature file.
    Augment(AugmentArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Array format; overrides the config file.
    #[arg(long)]
    pub format: Option<ArrayFormat>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out_wav: PathBuf,
    #[arg(long)]
    pub out_meta: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// Localization threshold in degrees.
    #[arg(long)]
    pub t_deg: Option<f64>,
    #[arg(long)]
    pub segment_frames: Option<usize>,
    /// Count only pairs within the threshold towards localization recall.
    #[arg(long)]
    pub lr_gated: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("op").required(true).args(["pattern", "cutout", "specaugment", "ssdrop"])))]
pub struct AugmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Spatial pattern id in 0..16.
    #[arg(long)]
    pub pattern: Option<usize>,
    #[arg(long)]
    pub cutout: bool,
    #[arg(long)]
    pub specaugment: bool,
    /// Drop each single-source bin with this probability.
    #[arg(long)]
    pub ssdrop: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Array format of the input feature.
    #[arg(long, default_value_t = ArrayFormat::Foa)]
    pub format: ArrayFormat,
    /// Metadata CSV to transform alongside a spatial pattern.
    #[arg(long, requires = "out_meta")]
    pub meta: Option<PathBuf>,
    #[arg(long, requires = "meta")]
    pub out_meta: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn input_err(path: &Path) -> impl FnOnce(SalsaError) -> CliError + '_ {
    move |e| CliError {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    }
}

fn output_err(path: &Path) -> impl FnOnce(SalsaError) -> CliError + '_ {
    move |e| CliError {
        code: EXIT_OUTPUT,
        message: format!("{}: {e}", path.display()),
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn load_config(path: Option<&Path>) -> Result<ToolConfig, CliError> {
    match path {
        Some(p) => ToolConfig::load(p).map_err(input_err(p)),
        None => Ok(ToolConfig::default()),
    }
}

type CliResult = Result<(), CliError>;

pub fn run(cli: Cli, out: &mut impl Write) -> CliResult {
    match cli.command {
        Command::Extract(a) => cmd_extract(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Score(a) => cmd_score(&a, out),
        Command::Augment(a) => cmd_augment(&a, out),
    }
}

fn report(out: &mut impl Write, text: std::fmt::Arguments<'_>) -> CliResult {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| CliError {
            code: EXIT_OUTPUT,
            message: format!("stdout: {e}"),
        })
}

pub fn cmd_extract(args: &ExtractArgs, out: &mut impl Write) -> CliResult {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(format) = args.format {
        cfg.salsa.format = format;
    }
    let audio = read_wav(&args.input).map_err(input_err(&args.input))?;
    if audio.num_channels() != NUM_INPUT_CHANNELS {
        return Err(usage(format!(
            "{}: expected {NUM_INPUT_CHANNELS} channels, found {}",
            args.input.display(),
            audio.num_channels()
        )));
    }
    let audio = resample_if_needed(audio, cfg.stft.sample_rate).map_err(input_err(&args.input))?;
    let spec = stft(&audio, &cfg.stft).map_err(input_err(&args.input))?;
    let feat = salsa_from_spectrogram(&spec, &cfg.salsa).map_err(input_err(&args.input))?;
    write_feature_file(&feat, &args.output).map_err(output_err(&args.output))?;
    let pct = 100.0 * feat.ss_count() as f64 / feat.plane_len().max(1) as f64;
    report(
        out,
        format_args!(
            "shape: [{}, {}, {}]",
            feat.num_channels(),
            feat.num_frames,
            feat.num_bins
        ),
    )?;
    report(out, format_args!("single-source bins: {pct:.2}%"))
}

pub fn cmd_synth(args: &SynthArgs, out: &mut impl Write) -> CliResult {
    let text =
        std::fs::read_to_string(&args.scene).map_err(|e| input_err(&args.scene)(e.into()))?;
    let spec = parse_scene_spec(&text).map_err(input_err(&args.scene))?;
    let (audio, events) = render_foa(&spec).map_err(input_err(&args.scene))?;
    write_wav(&args.out_wav, &audio).map_err(output_err(&args.out_wav))?;
    write_metadata_csv(&events, &args.out_meta).map_err(output_err(&args.out_meta))?;
    report(
        out,
        format_args!(
            "rendered {:.2} s, {} sources, {} label rows",
            audio.duration_secs(),
            spec.sources.len(),
            events.len()
        ),
    )
}

pub fn cmd_score(args: &ScoreArgs, out: &mut impl Write) -> CliResult {
    let cfg = load_config(args.config.as_deref())?;
    let mut settings = cfg.metrics;
    if let Some(t) = args.t_deg {
        settings.score.threshold_deg = t;
    }
    if let Some(s) = args.segment_frames {
        settings.segment_frames = s;
    }
    settings.score.lr_gated |= args.lr_gated;
    if settings.segment_frames == 0 {
        return Err(usage("--segment-frames must be positive"));
    }
    let refs = read_metadata_csv(&args.reference).map_err(input_err(&args.reference))?;
    let preds = read_metadata_csv(&args.pred).map_err(input_err(&args.pred))?;
    let matching =
        match_events(&refs, &preds, settings.segment_frames).map_err(|e| usage(e.to_string()))?;
    let scores =
        compute_scores_with(&matching, &settings.score).map_err(|e| usage(e.to_string()))?;
    report(out, format_args!("{scores}"))?;
    report(out, format_args!("{}", scores.to_json_line()))
}

pub fn cmd_augment(args: &AugmentArgs, out: &mut impl Write) -> CliResult {
    let cfg = load_config(args.config.as_deref())?;
    let feat = read_feature_file(&args.input, args.format).map_err(input_err(&args.input))?;
    if args.meta.is_some() && args.pattern.is_none() {
        return Err(usage("--meta is only meaningful with --pattern"));
    }
    let result = if let Some(id) = args.pattern {
        let pattern = SpatialPattern::from_id(id).map_err(|e| usage(e.to_string()))?;
        let transformed =
            apply_spatial_pattern_feature(&feat, pattern).map_err(|e| usage(e.to_string()))?;
        if let (Some(meta), Some(out_meta)) = (&args.meta, &args.out_meta) {
            let events = read_metadata_csv(meta).map_err(input_err(meta))?;
            let mapped = apply_spatial_pattern_labels(&events, pattern);
            write_metadata_csv(&mapped, out_meta).map_err(output_err(out_meta))?;
        }
        transformed
    } else if args.cutout {
        random_cutout(
            &feat,
            args.seed,
            cfg.augment.cutout_time,
            cfg.augment.cutout_freq,
        )
        .map_err(|e| usage(e.to_string()))?
    } else if args.specaugment {
        spec_augment(&feat, args.seed, cfg.augment.spec_augment)
            .map_err(|e| usage(e.to_string()))?
    } else {
        let p = args
            .ssdrop
            .expect("argument group guarantees one operation");
        ss_bin_dropout(&feat, args.seed, p).map_err(|e| usage(e.to_string()))?
    };
    write_feature_file(&result, &args.output).map_err(output_err(&args.output))?;
    report(
        out,
        format_args!(
            "single-source bins: {} -> {}",
            feat.ss_count(),
            result.ss_count()
        ),
    )
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
