//! Library behind the `dde-circle` binary: edge extraction, circle
//! detection, synthetic scenes and benchmarking from the command line.
//!
//! Exit codes: 0 success, 1 no circle detected, 2 I/O or configuration
//! error, 3 insufficient edges, 4 scene generation error, 5 bad benchmark
//! suite.

pub mod commands;
pub mod document;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dde-circle", version, about = "Circle detection with Discrete Differential Evolution")]
pub struct Cli {
    /// TOML file overriding the default detector, DDE and Canny parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Canny detector on a grayscale image and write a PBM edge map.
    Edges(EdgesArgs),
    /// Detect one or more circles in an image or edge map.
    Detect(DetectArgs),
    /// Generate a synthetic scene: clean PGM render, noisy PBM edge map and
    /// ground-truth JSON.
    Synth(SynthArgs),
    /// Run the detector repeatedly over a directory of fixtures and report
    /// time, success rate and error score per fixture.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct CannyArgs {
    /// Gaussian smoothing sigma in pixels.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Low hysteresis threshold, fraction of the maximum gradient.
    #[arg(long)]
    pub low: Option<f64>,
    /// High hysteresis threshold, fraction of the maximum gradient.
    #[arg(long)]
    pub high: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EdgesArgs {
    pub input: PathBuf,
    /// Destination PBM edge map.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub canny: CannyArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// PGM/PBM (or PNG with the `png` feature). PBM files are used as edge
    /// maps directly; grayscale inputs go through the Canny detector.
    pub input: PathBuf,
    /// Maximum number of circles to report.
    #[arg(long, default_value_t = 1)]
    pub circles: usize,
    /// RNG seed; a fresh one is drawn and printed to stderr when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generation limit per circle.
    #[arg(long)]
    pub generations: Option<usize>,
    /// Side of the square tolerance window (odd).
    #[arg(long)]
    pub window: Option<usize>,
    /// Smallest accepted radius in pixels.
    #[arg(long)]
    pub min_radius: Option<f64>,
    /// Minimum hit ratio for a detection to be reported.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Treat a PGM input as an edge map (nonzero = edge).
    #[arg(long)]
    pub edge_input: bool,
    /// Write the result document here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write an SVG overlay of edges and detected circles.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Report elapsed times as 0 so output depends only on inputs and seed.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub canny: CannyArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Image width in pixels.
    #[arg(long, default_value_t = 200)]
    pub width: usize,
    /// Image height in pixels.
    #[arg(long, default_value_t = 200)]
    pub height: usize,
    /// Either a count of randomly placed circles, or explicit circles as
    /// `x,y,r;x,y,r;...`.
    #[arg(long, default_value = "1")]
    pub circles: String,
    /// Radius range `MIN:MAX` for randomly placed circles.
    #[arg(long, default_value = "20:80")]
    pub radius: String,
    /// Number of random segments, rectangles and triangles.
    #[arg(long, default_value_t = 0)]
    pub distractors: usize,
    /// Salt-and-pepper density on the edge map.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// RNG seed; a fresh one is drawn and printed to stderr when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output prefix; writes PREFIX.pgm, PREFIX.pbm and PREFIX.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of fixtures: each NAME.pbm edge map needs a NAME.json
    /// ground truth next to it.
    #[arg(long)]
    pub suite: PathBuf,
    /// Seeded runs per fixture.
    #[arg(long, default_value_t = 35)]
    pub runs: usize,
    /// File with one seed per run (whitespace separated).
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Base seed when no seed file is given; run i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generation limit per circle.
    #[arg(long)]
    pub generations: Option<usize>,
    /// Write the CSV report here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Report times as 0 so the report depends only on inputs and seeds.
    #[arg(long)]
    pub no_timing: bool,
    /// Run the seeds one after another instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

pub use commands::{run, Failure};
