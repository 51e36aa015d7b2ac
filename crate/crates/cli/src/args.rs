use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drp_core::acoustic1d::{Acoustic1DConfig, Scheme};
use drp_core::elastic2d::{ElasticConfig, ElasticScheme};
use drp_core::GridKind;

use crate::run::{Method, OutputFormat, StencilParams};

#[derive(Debug, Parser)]
#[command(name = "drp", version, about = "Finite-difference stencil design, dispersion analysis and wave solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrally optimized stencil for a Taylor-constrained family.
    Optimize(OptimizeArgs),
    /// Modified-wavenumber curve of a stencil on [0, π].
    Dispersion(DispersionArgs),
    /// Shortest wavelength resolved within a relative misfit tolerance.
    Resolution(ResolutionArgs),
    /// 1D acoustic standing-wave run against the analytic solution.
    Acoustic1d(Acoustic1dArgs),
    /// Final-error sweep of optimized4 against conventional6 over grid sizes.
    Sweep(SweepArgs),
    /// 2D staggered-grid elastic run over the layered model.
    Elastic2d(Elastic2dArgs),
    /// Normalized difference between two snapshot directories.
    Diff(DiffArgs),
    /// Canned recipe producing the data behind one figure.
    Figure(FigureArgs),
    /// Re-runs the invocation recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DerivativeArg {
    #[value(alias = "1")]
    First,
    #[value(alias = "2")]
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Collocated,
    #[value(alias = "a", alias = "type-a")]
    StaggeredForward,
    #[value(alias = "b", alias = "type-b")]
    StaggeredBackward,
}

impl From<KindArg> for GridKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Collocated => GridKind::Collocated,
            KindArg::StaggeredForward => GridKind::StaggeredForward,
            KindArg::StaggeredBackward => GridKind::StaggeredBackward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepPreset {
    /// 400 to 500 cells in steps of 10.
    Fine,
    /// 250 to 1000 cells in steps of 50.
    Wide,
}

/// Stencil selection shared by `optimize`, `dispersion` and `resolution`.
#[derive(Debug, Clone, Default, Args)]
pub struct StencilArgs {
    #[arg(long, value_enum)]
    pub derivative: Option<DerivativeArg>,
    /// Grid kind of the stencil.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Half-width for collocated stencils, coefficient pairs for staggered ones.
    #[arg(long)]
    pub extent: Option<u32>,
    /// Taylor accuracy order; defaults to the maximum for conventional stencils
    /// and two below it for optimized ones.
    #[arg(long)]
    pub order: Option<u32>,
    /// Half-width of the optimization window in radians.
    #[arg(long)]
    pub window: Option<f64>,
}

impl StencilArgs {
    pub fn apply(&self, p: &mut StencilParams) {
        if let Some(d) = self.derivative {
            p.derivative = match d {
                DerivativeArg::First => 1,
                DerivativeArg::Second => 2,
            };
        }
        if let Some(k) = self.kind {
            p.grid_kind = k.into();
        }
        if let Some(e) = self.extent {
            p.extent = e;
        }
        if self.order.is_some() {
            p.order = self.order;
        }
        if let Some(w) = self.window {
            p.window = w;
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub stencil: StencilArgs,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// JSON file with the `parameters` object of an optimize manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write stencil.csv, stencil.json and manifest.json here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    pub stencil: StencilArgs,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Uniform samples on [0, π], endpoints included.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write dispersion.csv and manifest.json here instead of printing.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ResolutionArgs {
    #[command(flatten)]
    pub stencil: StencilArgs,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Relative misfit tolerance of the modified wavenumber.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write resolution.json and manifest.json here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Every field of the 1D configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct AcousticFields {
    /// Domain length in meters.
    #[arg(long)]
    pub length: Option<f64>,
    /// Wave speed in m/s.
    #[arg(long)]
    pub wavespeed: Option<f64>,
    #[arg(long)]
    pub courant: Option<f64>,
    #[arg(long)]
    pub n_cells: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of even sine modes in the analytic series.
    #[arg(long)]
    pub series_terms: Option<usize>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Spacing of the error samples in seconds.
    #[arg(long)]
    pub error_interval: Option<f64>,
}

impl AcousticFields {
    pub fn apply(&self, c: &mut Acoustic1DConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(length, wavespeed, courant, n_cells, t_end, series_terms, amplitude, scheme, error_interval);
    }
}

#[derive(Debug, Clone, Args)]
pub struct Acoustic1dArgs {
    #[command(flatten)]
    pub fields: AcousticFields,
    /// Times at which to write snapshot_t<t>.csv.
    #[arg(long, value_delimiter = ',')]
    pub snapshot_times: Option<Vec<f64>>,
    /// JSON file mirroring the 1D configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub fields: AcousticFields,
    /// Explicit cell counts; overrides --preset.
    #[arg(long, value_delimiter = ',')]
    pub cells: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub preset: Option<SweepPreset>,
    /// JSON file mirroring the 1D configuration used as the sweep template.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct Elastic2dArgs {
    #[arg(long)]
    pub scheme: Option<ElasticScheme>,
    /// JSON file mirroring the elastic configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dz: Option<f64>,
    #[arg(long)]
    pub courant: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub snapshot_interval: Option<f64>,
    /// Peak frequency of the Ricker source in Hz.
    #[arg(long)]
    pub f_peak: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

impl Elastic2dArgs {
    pub fn apply(&self, c: &mut ElasticConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(width, depth, dx, dz, courant, t_end, snapshot_interval);
        if let Some(f) = self.f_peak {
            c.source.f_peak = f;
        }
        if let Some(a) = self.amplitude {
            c.source.amplitude = a;
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DiffArgs {
    /// Snapshot directory of the minuend.
    pub a: PathBuf,
    /// Snapshot directory of the subtrahend.
    pub b: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// fig1..fig8, fig11, fig12, or an elastic id (fig9, fig10, fig13..fig16, fig16-diff, elastic).
    pub id: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Defaults to the directory holding the manifest.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
