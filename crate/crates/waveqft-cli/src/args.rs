use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Wavelet lattice field theory experiments.
///
/// Every option can also come from a JSON file given with `--config`; flags on the
/// command line (and their environment mirrors) take precedence over the file, which
/// takes precedence over the built-in defaults. Lists accept `a,b,c`, inclusive ranges
/// `a..b` and stepped ranges `a..b:step`. A float range without a step has 11 points.
#[derive(Debug, Parser)]
#[command(name = "waveqft", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Worker threads for scan points [default: hardware count]
    #[arg(long, global = true, env = "WAVEQFT_THREADS")]
    pub threads: Option<usize>,

    /// Memory cap for dense matrices, in GiB [default: 8]
    #[arg(long, global = true, env = "WAVEQFT_MEM_CAP_GB")]
    pub mem_cap_gb: Option<f64>,

    /// JSON config file with option values keyed by flag name
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output path; `csv`, `json` or `-` write to stdout [default: csv]
    #[arg(long, global = true)]
    pub out: Option<String>,

    /// Table format: csv | json [default: from --out, else csv]
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Run manifest path [default: <out>.manifest.json when --out is a file]
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Resolve and validate the configuration, print it as JSON and exit
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Daubechies filter coefficients h and g
    Filters(FiltersArgs),
    /// Scale function or wavelet sampled by the cascade algorithm
    Cascade(CascadeArgs),
    /// Exact derivative stencil coefficients
    Stencil(StencilArgs),
    /// Multi-level wavelet transform of a signal read from CSV
    Dwt(DwtArgs),
    /// Fermion ground states
    #[command(subcommand)]
    Fermion(FermionCommand),
    /// Boson ground states
    #[command(subcommand)]
    Boson(BosonCommand),
    /// Same-scale wavelet correlators with the bulk approximation
    CorrelatorScan(CorrelatorArgs),
    /// Mutual information of two regions against compression level
    MiCompress(MiArgs),
    /// Entanglement of purification of two compressed regions
    EopScan(EopArgs),
}

#[derive(Debug, Subcommand)]
pub enum FermionCommand {
    /// Write Γ⁰¹ as a binary matrix with a JSON sidecar
    Covariance(CovarianceArgs),
    /// Entropy of [0, size) for each size
    EntropyScan(EntropyArgs),
    /// Ground-state fidelity against mass and compression level
    FidelityScan(FidelityArgs),
}

#[derive(Debug, Subcommand)]
pub enum BosonCommand {
    /// Entropy of [0, size) for each size and cutoff depth
    EntropyScan(EntropyArgs),
    /// Half-torus entropy of the 2D periodic boson
    #[command(name = "entropy-2d")]
    Entropy2d(Entropy2dArgs),
    /// Write Γ_Φ and Γ_Π as a binary array with a JSON sidecar
    Covariance(CovarianceArgs),
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Box length in scale-0 units
    #[arg(long)]
    pub x: Option<usize>,
    /// Daubechies order K
    #[arg(long)]
    pub k: Option<usize>,
    /// Bare mass
    #[arg(long, allow_hyphen_values = true)]
    pub m0: Option<f64>,
    /// Boundary: periodic | antiperiodic | open
    #[arg(long)]
    pub bc: Option<String>,
    /// Mass units: physical | scale-n
    #[arg(long)]
    pub units: Option<String>,
}

#[derive(Debug, Args)]
pub struct FiltersArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// Same as --format json
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// scale | wavelet
    #[arg(long)]
    pub kind: Option<String>,
    /// Refinement depth, 1..=16
    #[arg(long)]
    pub depth: Option<u32>,
}

#[derive(Debug, Args)]
pub struct StencilArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// Derivative order, 1 or 2
    #[arg(long)]
    pub alpha: Option<u32>,
    /// Print exact rationals (default)
    #[arg(long, conflicts_with = "float")]
    pub rational: bool,
    /// Print floating-point values
    #[arg(long)]
    pub float: bool,
}

#[derive(Debug, Args)]
pub struct DwtArgs {
    /// Input CSV: one value per line, optional header
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub levels: Option<u32>,
    /// Scale label of the input [default: levels]
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub boundary: Option<String>,
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Scale depth n, V = 2^n X
    #[arg(long)]
    pub n: Option<u32>,
    /// Spatial dimensions (boson only), 1 or 2
    #[arg(long)]
    pub dims: Option<u8>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Scale depths n; each gives its own lattice
    #[arg(long)]
    pub n: Option<String>,
    /// Subsystem sizes: all | half | list
    #[arg(long)]
    pub sizes: Option<String>,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    /// Number of sites V
    #[arg(long)]
    pub v: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub bc: Option<String>,
    /// Mass difference: auto (1/V) or a number
    #[arg(long)]
    pub delta: Option<String>,
    /// Centre masses
    #[arg(long, allow_hyphen_values = true)]
    pub masses: Option<String>,
    /// Compression levels; 0 is the uncompressed product formula
    #[arg(long)]
    pub levels: Option<String>,
}

#[derive(Debug, Args)]
pub struct Entropy2dArgs {
    #[arg(long)]
    pub x: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Scale depths
    #[arg(long)]
    pub n: Option<String>,
    /// Masses
    #[arg(long)]
    pub m0: Option<String>,
}

#[derive(Debug, Args)]
pub struct CorrelatorArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long)]
    pub n: Option<u32>,
    /// fermion | boson
    #[arg(long)]
    pub theory: Option<String>,
    /// Boson observable: ff | pp
    #[arg(long)]
    pub observable: Option<String>,
    /// massless | massive (selects the bulk approximation)
    #[arg(long)]
    pub phase: Option<String>,
    /// Wavelet scales r
    #[arg(long)]
    pub r: Option<String>,
}

#[derive(Debug, Args)]
pub struct MiArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long)]
    pub n: Option<u32>,
    /// Gap between the regions
    #[arg(long)]
    pub d: Option<usize>,
    /// Region length
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub levels: Option<String>,
}

#[derive(Debug, Args)]
pub struct EopArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long)]
    pub n: Option<u32>,
    /// Gap between the regions
    #[arg(long)]
    pub d: Option<usize>,
    /// Region lengths; a range expands to the powers of two inside it
    #[arg(long)]
    pub l: Option<String>,
    /// Modes kept per region: 2 | 4
    #[arg(long)]
    pub modes: Option<usize>,
}
