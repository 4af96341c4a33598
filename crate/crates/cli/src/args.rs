use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nlos", version, about = "Scannerless non-line-of-sight imaging pipeline")]
pub struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "NLOS_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a raw histogram cube from a scene description.
    Simulate(SimulateArgs),
    /// Correct a raw cube: bad pixels, timing offsets, first-scatter removal.
    Calibrate(CalibrateArgs),
    /// Reconstruct a voxel volume from a calibrated cube.
    Reconstruct(ReconstructArgs),
    /// Maximum-intensity projection of a volume to a 16-bit PGM.
    Project(ProjectArgs),
    /// Phasor-field reconstructions over a (λ, σ) grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene description JSON; the default scene when omitted.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write noiseless expected counts (real-valued) instead of Poisson draws.
    #[arg(long)]
    pub no_poisson: bool,
    /// Covered-sensor acquisition: dark counts only.
    #[arg(long)]
    pub dark: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Covered-sensor cube for dark-count rates; the histogram tails are used otherwise.
    #[arg(long)]
    pub dark: Option<PathBuf>,
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Calibration settings JSON; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub exposure: Option<f64>,
    #[arg(long)]
    pub dcr_threshold: Option<f64>,
    #[arg(long)]
    pub gate_start: Option<usize>,
    #[arg(long)]
    pub gate_end: Option<usize>,
    /// Align first-scatter peaks on this bin.
    #[arg(long, conflicts_with = "median_reference")]
    pub reference_bin: Option<usize>,
    /// Align on the median detected peak bin instead of a fixed one.
    #[arg(long)]
    pub median_reference: bool,
    #[arg(long, conflicts_with_all = ["guard_fwhm", "no_strip"])]
    pub guard_bins: Option<usize>,
    /// Strip half-width as a multiple of the mean FWHM.
    #[arg(long, conflicts_with = "no_strip")]
    pub guard_fwhm: Option<f64>,
    /// Keep the first-scatter signature.
    #[arg(long)]
    pub no_strip: bool,
    #[arg(long)]
    pub no_return_leg: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fbp,
    Phasor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Filter {
    None,
    DepthLaplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Front,
    Side,
    Top,
}

/// Volume and weighting options shared by `reconstruct` and `sweep`.
#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Reconstruction settings JSON (grid, attenuation, filter); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Voxels per side of a cubic grid in front of the imaged region.
    #[arg(long)]
    pub voxels: Option<usize>,
    /// Edge length of that grid, meters.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Weight samples by r1²·r2².
    #[arg(long)]
    pub attenuation: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Virtual wavelength, meters (phasor only).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Wavelet length in wavelengths (phasor only).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum)]
    pub filter: Option<Filter>,
    #[command(flatten)]
    pub volume: VolumeArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Comma-separated wavelengths, meters.
    #[arg(long, value_delimiter = ',', default_values_t = [0.10, 0.08, 0.06])]
    pub lambdas: Vec<f64>,
    /// Comma-separated cycle counts.
    #[arg(long, value_delimiter = ',', default_values_t = [3.0, 4.0, 5.0])]
    pub sigmas: Vec<f64>,
    /// Scene description whose target gives the ground truth for IoU.
    #[arg(long)]
    pub truth_scene: Option<PathBuf>,
    /// Write a front-view PGM per (λ, σ) into this directory.
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[command(flatten)]
    pub volume: VolumeArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}
