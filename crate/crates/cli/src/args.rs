//! Command-line and config-file options.
//!
//! Every option struct doubles as the schema of its config file: keys are
//! the long flag names with `-` replaced by `_`, and flags given on the
//! command line win over file values.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use halfspace::experiments::Reference;
use halfspace::Spec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "halfspace", version, about = "Lévy processes conditioned to stay in a half-space")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Global {
    /// Master seed of every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with option values; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path of a Lévy process.
    Simulate(SimulateOpts),
    /// Split a path at its directional infimum or its maximal norm.
    Split(SplitOpts),
    /// Conditioned Brownian motion: the transform matrix or sample paths.
    Condition(ConditionOpts),
    #[command(subcommand)]
    Check(Check),
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Subcommand)]
pub enum Check {
    /// Exact enumeration of the conditioned pair against its representation.
    Enum(EnumOpts),
    /// Positive occupation time against the argmax index.
    Sparre(SparreOpts),
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Zoom in at the directional infimum.
    Zoom(ZoomOpts),
    /// Split planar Brownian paths at their maximal norm.
    Maxnorm(MaxNormOpts),
    /// Initial jump law of the conditioned process.
    InitialJump(InitialJumpOpts),
}

/// A Lévy spec given as a file path or, in config files, inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecArg {
    File(PathBuf),
    Inline(Spec),
}

fn spec_file(s: &str) -> Result<SpecArg, String> {
    Ok(SpecArg::File(PathBuf::from(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    Infimum,
    MaxNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceArg {
    Exact,
    SelfTest,
}

impl From<ReferenceArg> for Reference {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::Exact => Reference::Exact,
            ReferenceArg::SelfTest => Reference::SelfTest,
        }
    }
}

/// Declares an option struct whose fields are all optional, with a merge
/// that prefers the receiver.
macro_rules! options {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty,)* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])*
            #[arg(allow_negative_numbers = true)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub $field: Option<$ty>,)*
        }

        impl $name {
            pub fn merged(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

options!(SimulateOpts {
    /// JSON Lévy spec file.
    #[arg(long, value_parser = spec_file)]
    spec: SpecArg,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    step: f64,
    /// Start point, comma separated; the origin by default.
    #[arg(long, value_delimiter = ',')]
    start: Vec<f64>,
});

options!(SplitOpts {
    #[arg(long, value_enum)]
    mode: SplitMode,
    /// Direction for the infimum split, comma separated.
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    /// Path file (CSV as written by `simulate`, or JSON).
    #[arg(long)]
    path: PathBuf,
    /// Spec for a fresh simulation when no path file is given.
    #[arg(long, value_parser = spec_file)]
    spec: SpecArg,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    step: f64,
});

options!(ConditionOpts {
    #[arg(long)]
    sigma1: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long)]
    rho: f64,
    /// Covariance of any dimension, as a spec whose `sigma` is used.
    #[arg(long, value_parser = spec_file)]
    spec: SpecArg,
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    /// Print `M`, `R` and `MR` instead of sampling.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    print_matrix: bool,
    #[arg(long)]
    n_paths: usize,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    step: f64,
    /// Start point in the closed half-space; the origin by default.
    #[arg(long, value_delimiter = ',')]
    start: Vec<f64>,
});

options!(EnumOpts {
    #[arg(long)]
    n: usize,
    /// `default1d`, `default2d`, or a CSV file with header `weight,x1,...,xd`.
    #[arg(long)]
    increments: String,
    /// Direction for an increments file; defaults to the first axis.
    #[arg(long, value_delimiter = ',')]
    eta: Vec<String>,
});

options!(SparreOpts {
    #[arg(long)]
    n_steps: usize,
    #[arg(long)]
    n_mc: usize,
    /// The check fails when the chi-squared p-value is below this level.
    #[arg(long)]
    alpha: f64,
});

options!(ZoomOpts {
    #[arg(long, value_parser = spec_file)]
    spec: SpecArg,
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    step: f64,
    #[arg(long)]
    n_rep: usize,
    #[arg(long)]
    n_perm: usize,
    #[arg(long, value_enum)]
    reference: ReferenceArg,
});

options!(MaxNormOpts {
    #[arg(long)]
    sigma1: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    step: f64,
    #[arg(long)]
    n_rep: usize,
    /// Permutations for the energy test; 0 skips it.
    #[arg(long)]
    n_perm: usize,
    /// KDE grid points per axis; 0 skips the density estimates.
    #[arg(long)]
    kde_points: usize,
    #[arg(long)]
    kde_range: f64,
    /// KDE bandwidths `hx,hy`; Silverman's rule when absent.
    #[arg(long, value_delimiter = ',')]
    bandwidth: Vec<f64>,
});

options!(InitialJumpOpts {
    #[arg(long, value_parser = spec_file)]
    spec: SpecArg,
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    step: f64,
    #[arg(long)]
    n_rep: usize,
});
