use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seamkit::object_aware::InitMethod;
use seamkit::pipeline::{AlignmentMode, Method, ReportFormat, SaliencyMode};
use seamkit::saliency::ObjectCombine;
use seamkit::CostKind;

#[derive(Debug, Parser)]
#[command(
    name = "seamkit",
    version,
    about = "Object-aware seam finding and composition for image pairs"
)]
pub struct Cli {
    /// JSON configuration: a run configuration, or a suite configuration for `synth`.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Random seed (RANSAC for runs, scene seeds for `synth`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for batches; 0 uses every core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output directory; for `saliency`, the mask file.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stitch one pair with one or more seam methods.
    Stitch {
        #[command(flatten)]
        pair: PairArgs,
        /// Seam methods to run (comma separated or repeated).
        #[arg(long = "method", value_delimiter = ',', default_value = "object-aware")]
        methods: Vec<Method>,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// Find a single seam and export its label map.
    Seam {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// Spectral-residual saliency mask of one image.
    Saliency {
        image: PathBuf,
        /// Threshold on the normalised saliency map.
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        /// Also write the continuous saliency map here.
        #[arg(long, value_name = "FILE")]
        soft: Option<PathBuf>,
    },
    /// Render synthetic pairs with ground truth.
    Synth {
        /// A single scene description instead of a suite.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
        /// Number of suite pairs.
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Run methods over a directory of pairs or the synthetic suite.
    Eval {
        /// Directory holding one subdirectory per pair.
        #[arg(required_unless_present_any = ["suite", "suite_config"])]
        dir: Option<PathBuf>,
        /// Evaluate the built-in synthetic suite.
        #[arg(long, conflicts_with = "dir")]
        suite: bool,
        /// Evaluate the suite described by this file.
        #[arg(long, value_name = "FILE", conflicts_with = "dir")]
        suite_config: Option<PathBuf>,
        /// Number of suite pairs.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long = "method", value_delimiter = ',')]
        methods: Vec<Method>,
        #[arg(long)]
        alignment: Option<AlignArg>,
        #[arg(long)]
        saliency: Option<SaliencyArg>,
        /// Per-pair report format.
        #[arg(long)]
        format: Option<FormatArg>,
        /// Record zero times so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        optim: OptimArgs,
    },
}

/// One pair: a pair directory, or target and reference images.
#[derive(Debug, Args)]
pub struct PairArgs {
    /// `<dir>` or `<target> <reference>`.
    #[arg(num_args = 1..=2, required = true, value_name = "INPUT")]
    pub inputs: Vec<PathBuf>,
    /// Target-to-reference homography file (nine numbers, row-major).
    #[arg(long, value_name = "FILE", conflicts_with = "h")]
    pub homography: Option<PathBuf>,
    /// Homography inline, as nine comma-separated numbers.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub h: Option<Vec<f64>>,
    #[arg(long, value_name = "FILE", requires = "mask_r")]
    pub mask_t: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "mask_t")]
    pub mask_r: Option<PathBuf>,
    /// Canvas validity of the pre-warped target.
    #[arg(long, value_name = "FILE", requires = "valid_r")]
    pub valid_t: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "valid_t")]
    pub valid_r: Option<PathBuf>,
    /// Overrides the mode implied by the inputs.
    #[arg(long)]
    pub alignment: Option<AlignArg>,
    #[arg(long)]
    pub saliency: Option<SaliencyArg>,
    /// Saliency threshold.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub object_combine: Option<CombineArg>,
    #[arg(long)]
    pub cost: Option<CostArg>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct OptimArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub w_comp: Option<f64>,
    #[arg(long)]
    pub w_excl: Option<f64>,
    #[arg(long)]
    pub w_smooth: Option<f64>,
    #[arg(long)]
    pub w_photo: Option<f64>,
    /// Raw sums, as in the original formulation, instead of per-pixel means.
    #[arg(long)]
    pub paper_exact: bool,
    #[arg(long)]
    pub init: Option<InitArg>,
    /// Write the object-aware loss trace here.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlignArg {
    Estimate,
    ProvidedH,
    PreWarped,
}

impl From<AlignArg> for AlignmentMode {
    fn from(a: AlignArg) -> Self {
        match a {
            AlignArg::Estimate => AlignmentMode::Estimate,
            AlignArg::ProvidedH => AlignmentMode::ProvidedH,
            AlignArg::PreWarped => AlignmentMode::PreWarped,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SaliencyArg {
    Spectral,
    File,
}

impl From<SaliencyArg> for SaliencyMode {
    fn from(s: SaliencyArg) -> Self {
        match s {
            SaliencyArg::Spectral => SaliencyMode::Spectral,
            SaliencyArg::File => SaliencyMode::File,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CombineArg {
    Union,
    Intersection,
}

impl From<CombineArg> for ObjectCombine {
    fn from(c: CombineArg) -> Self {
        match c {
            CombineArg::Union => ObjectCombine::Union,
            CombineArg::Intersection => ObjectCombine::Intersection,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CostArg {
    Color,
    Gradient,
}

impl From<CostArg> for CostKind {
    fn from(c: CostArg) -> Self {
        match c {
            CostArg::Color => CostKind::Color,
            CostArg::Gradient => CostKind::Gradient,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Voronoi,
    Uniform,
}

impl From<InitArg> for InitMethod {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Voronoi => InitMethod::Voronoi,
            InitArg::Uniform => InitMethod::Uniform,
        }
    }
}
