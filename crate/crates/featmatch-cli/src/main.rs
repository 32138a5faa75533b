//! `featmatch`: skin segmentation, keypoint detection, descriptor matching,
//! rotation-based evaluation, and match visualization over PGM/PPM images.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Default descriptor pattern seed when neither `--seed` nor the
/// `FEATMATCH_SEED` environment variable is set.
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "featmatch",
    about = "Local-feature detection, matching, and evaluation toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment skin-colored pixels in YCbCr chroma space.
    Segment(SegmentArgs),
    /// Detect keypoints and write keypoint/descriptor files.
    Detect(DetectArgs),
    /// Match two images end to end and render the correspondences.
    Match(MatchArgs),
    /// Run the rotation evaluation experiment and report scores.
    Evaluate(EvaluateArgs),
    /// Rotate an image by an exact multiple of 90 degrees.
    Rotate(RotateArgs),
}

#[derive(Args)]
struct DetectorOpts {
    /// FAST segment-test intensity threshold.
    #[arg(long, default_value_t = 20)]
    detector_threshold: u8,
    /// Contiguous circle pixels required by the segment test (9..=16).
    #[arg(long, default_value_t = 9)]
    arc_length: u8,
    /// Keypoint budget after Harris ranking.
    #[arg(long, default_value_t = 500)]
    max_keypoints: usize,
    /// Harris trace weight k.
    #[arg(long, default_value_t = 0.04)]
    harris_k: f64,
    /// Patch half-size for orientation and description.
    #[arg(long, default_value_t = 15)]
    patch_radius: u32,
}

impl DetectorOpts {
    fn to_config(&self) -> featmatch_core::DetectorConfig {
        featmatch_core::DetectorConfig {
            fast_threshold: self.detector_threshold,
            arc_length: self.arc_length,
            max_keypoints: self.max_keypoints,
            harris_k: self.harris_k,
            patch_radius: self.patch_radius,
        }
    }
}

#[derive(Args)]
struct DescriptorOpts {
    /// Steer the sampling pattern by keypoint orientation.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    steered: bool,
    /// Box-blur radius applied before descriptor sampling.
    #[arg(long, default_value_t = 2)]
    blur_radius: u32,
    /// Descriptor pattern seed; falls back to $FEATMATCH_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
}

impl DescriptorOpts {
    fn resolve_seed(&self) -> anyhow::Result<u64> {
        if let Some(seed) = self.seed {
            return Ok(seed);
        }
        match std::env::var("FEATMATCH_SEED") {
            Ok(v) => v
                .parse()
                .map_err(|e| anyhow::anyhow!("FEATMATCH_SEED={v:?} is not a valid seed: {e}")),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FilterModeOpt {
    /// Keep matches with normalized distance strictly below the threshold.
    Absolute,
    /// Lowe ratio against the second-nearest neighbor.
    LoweRatio,
}

#[derive(Args)]
struct FilterOpts {
    #[arg(long, value_enum, default_value_t = FilterModeOpt::Absolute)]
    filter_mode: FilterModeOpt,
    #[arg(long, default_value_t = 0.7)]
    filter_threshold: f64,
}

impl FilterOpts {
    fn to_config(&self) -> featmatch_core::MatchFilterConfig {
        featmatch_core::MatchFilterConfig {
            mode: match self.filter_mode {
                FilterModeOpt::Absolute => featmatch_core::MatchFilterMode::AbsoluteThreshold,
                FilterModeOpt::LoweRatio => featmatch_core::MatchFilterMode::LoweRatio,
            },
            threshold: self.filter_threshold,
        }
    }
}

#[derive(Args)]
struct ThresholdOpts {
    #[arg(long, default_value_t = 77)]
    cb_min: u8,
    #[arg(long, default_value_t = 127)]
    cb_max: u8,
    #[arg(long, default_value_t = 133)]
    cr_min: u8,
    #[arg(long, default_value_t = 173)]
    cr_max: u8,
}

impl ThresholdOpts {
    fn to_thresholds(&self) -> anyhow::Result<featmatch_core::SkinThresholds> {
        Ok(featmatch_core::SkinThresholds::new(
            self.cb_min,
            self.cb_max,
            self.cr_min,
            self.cr_max,
        )?)
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// Input image (PGM or PPM).
    #[arg(long)]
    input: PathBuf,
    /// Mask output path (PGM, 0/255).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Masked foreground output path (PPM).
    #[arg(long)]
    foreground: Option<PathBuf>,
    #[command(flatten)]
    thresholds: ThresholdOpts,
    /// Fill color for masked-out pixels, as R,G,B.
    #[arg(long, default_value = "0,0,0", value_parser = parse_rgb)]
    fill: [u8; 3],
    /// Print a machine-readable JSON summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Keypoint list output (JSON array).
    #[arg(long)]
    keypoints_json: Option<PathBuf>,
    /// Keypoint list output (CSV).
    #[arg(long)]
    keypoints_csv: Option<PathBuf>,
    /// Descriptor file output (FEATDESC hex).
    #[arg(long)]
    descriptors: Option<PathBuf>,
    #[command(flatten)]
    detector: DetectorOpts,
    #[command(flatten)]
    descriptor: DescriptorOpts,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    image1: PathBuf,
    #[arg(long)]
    image2: PathBuf,
    /// Filtered match list output (CSV).
    #[arg(long)]
    matches_out: Option<PathBuf>,
    /// Match visualization output (PPM).
    #[arg(long)]
    viz_out: Option<PathBuf>,
    /// How many of the best matches to draw.
    #[arg(long, default_value_t = 10)]
    draw_top: usize,
    #[arg(long, default_value_t = 1)]
    line_thickness: u32,
    #[arg(long, default_value_t = 3)]
    marker_radius: u32,
    /// Keep only mutual nearest-neighbor matches.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    cross_check: bool,
    #[command(flatten)]
    filter: FilterOpts,
    #[command(flatten)]
    detector: DetectorOpts,
    #[command(flatten)]
    descriptor: DescriptorOpts,
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TransformOpt {
    Identity,
    Rot90cw,
    Rot90ccw,
    Rot180,
    /// Match against an explicit second image (no ground-truth transform).
    SecondImage,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Transform producing the second view, or `second-image`.
    #[arg(long, value_enum, default_value_t = TransformOpt::Rot90cw)]
    transform: TransformOpt,
    /// Second image path; requires `--transform second-image`.
    #[arg(long)]
    second_image: Option<PathBuf>,
    /// Run both steered and unsteered pipelines and print both rows.
    #[arg(long)]
    both_modes: bool,
    /// Reprojection tolerance in pixels.
    #[arg(long, default_value_t = 2.0)]
    eps: f64,
    /// Skin-segment both images before detection.
    #[arg(long)]
    segment: bool,
    #[command(flatten)]
    thresholds: ThresholdOpts,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    cross_check: bool,
    #[command(flatten)]
    filter: FilterOpts,
    #[command(flatten)]
    detector: DetectorOpts,
    #[command(flatten)]
    descriptor: DescriptorOpts,
    /// Report output path (JSON; an array when --both-modes is set).
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Include stage timings in the written report (timings vary run to run,
    /// so they are omitted by default to keep outputs byte-identical).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DirectionOpt {
    Cw,
    Ccw,
    #[value(name = "180")]
    Half,
}

#[derive(Args)]
struct RotateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    direction: DirectionOpt,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    json: bool,
}

fn parse_rgb(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected R,G,B, got {s:?}"));
    }
    let mut rgb = [0u8; 3];
    for (slot, part) in rgb.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| format!("bad channel {part:?}: {e}"))?;
    }
    Ok(rgb)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Segment(args) => commands::segment(args),
        Command::Detect(args) => commands::detect(args),
        Command::Match(args) => commands::match_images(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Rotate(args) => commands::rotate(args),
    }
}
