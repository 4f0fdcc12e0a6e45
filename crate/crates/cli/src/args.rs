use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// `--version` text. The defaults are repeated here as literals; a test
/// keeps them in step with the library constants.
pub const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\ndefaults: pmax=1000 ell_ceiling=1000 precision=50 reported_digits=15",
    "\nbach-sorenson constants: a=4 b=2.5 c=5"
);

#[derive(Debug, Parser)]
#[command(name = "galprod", version, long_version = LONG_VERSION)]
#[command(about = "Surjectivity of mod-l images for products of elliptic curves, and explicit bounds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Largest prime p scanned [default: 1000, or the sieve input's value]
    #[arg(long, global = true)]
    pub pmax: Option<u64>,
    /// Minimum working decimal digits for bound evaluation
    #[arg(long, global = true, default_value_t = 50)]
    pub precision: usize,
    /// Never touch the network; labels must already be cached
    #[arg(long, global = true)]
    pub offline: bool,
    /// Directory of cached curve records
    #[arg(long, global = true, env = "GALPROD_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Base URL of the curve database
    #[arg(long, global = true, env = "GALPROD_LMFDB_URL")]
    pub lmfdb_url: Option<String>,
    /// Seed for randomized verification
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report wall-clock time in verification output
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct CurveArg {
    /// Curve JSON file, or inline JSON starting with `{`
    #[arg(long)]
    pub curve: Option<String>,
    /// Curve database label, resolved through the cache
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frobenius traces a_p for every prime p <= pmax
    Ap(CurveArg),
    /// dim of the fixed 2- and 3-torsion of Frobenius at good p > 3
    TorsionDims(CurveArg),
    /// Trace sieve over all pairs of curves
    Sieve {
        /// JSON with `curves` (labels or inline models) and `nonsurjective_sets`
        #[arg(long)]
        input: PathBuf,
        /// Scan primes l up to at least this bound
        #[arg(long)]
        ell_ceiling: Option<u64>,
    },
    /// Evaluate an explicit bound
    #[command(subcommand)]
    Bound(BoundCommand),
    /// Re-check finite group statements by enumeration
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Fetch labels into the cache and print the cached records
    Fetch {
        #[arg(long = "label", required = true)]
        labels: Vec<String>,
        /// Ignore existing cache entries
        #[arg(long)]
        refresh: bool,
    },
}

#[derive(Debug, Args)]
pub struct FieldOpts {
    /// |d_K| of the base field
    #[arg(long, default_value = "1")]
    pub disc: String,
    /// [K:Q]
    #[arg(long, default_value_t = 1)]
    pub degree: u32,
}

#[derive(Debug, Args)]
pub struct BsOpts {
    #[arg(long, default_value = "4")]
    pub bs_a: String,
    #[arg(long, default_value = "2.5")]
    pub bs_b: String,
    #[arg(long, default_value = "5")]
    pub bs_c: String,
}

#[derive(Debug, Subcommand)]
pub enum BoundCommand {
    /// Single elliptic curve over Q, from its conductor
    Mw20 {
        #[arg(long)]
        conductor: String,
    },
    /// Pair of abelian varieties of dimension g
    Faltings {
        #[arg(long)]
        g: u64,
        #[arg(long)]
        n1: String,
        #[arg(long)]
        n2: String,
        #[command(flatten)]
        field: FieldOpts,
        #[command(flatten)]
        bs: BsOpts,
    },
    /// Product of n abelian varieties
    ProductAv {
        #[arg(long)]
        g: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        conductors: Vec<String>,
        /// Individual bounds c_i, one per factor [default: all 0]
        #[arg(long = "c", value_delimiter = ',')]
        c_individual: Vec<String>,
        #[command(flatten)]
        field: FieldOpts,
        #[command(flatten)]
        bs: BsOpts,
    },
    /// Product of n elliptic curves over Q
    ProductEc {
        #[arg(long, value_delimiter = ',', required = true)]
        conductors: Vec<String>,
        /// Replace the additive constant
        #[arg(long, conflicts_with = "exact_constant")]
        constant: Option<String>,
        /// Use the unrounded additive constant
        #[arg(long)]
        exact_constant: bool,
    },
    /// Pair bound from a Chebotarev bound B and individual bounds
    Pair {
        #[arg(long)]
        g: u64,
        #[arg(long)]
        b: String,
        #[arg(long, default_value = "0")]
        c1: String,
        #[arg(long, default_value = "0")]
        c2: String,
    },
    /// Effective Chebotarev bound from log d_L and [L:K]
    BachSorenson {
        #[arg(long)]
        log_dl: String,
        #[arg(long)]
        degree_lk: u64,
        #[command(flatten)]
        bs: BsOpts,
    },
    /// Upper bound for log d_L
    LogDisc {
        #[arg(long)]
        degree_lk: u64,
        #[arg(long)]
        degree_lq: u64,
        /// Radical of the relative discriminant
        #[arg(long)]
        rad: String,
        #[command(flatten)]
        field: FieldOpts,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Uniform,
    Diagonal,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// dim_1 criterion over every subgroup of Delta_2(F_l), l in {2, 3}
    Smallprimes {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=3))]
        ell: u32,
    },
    /// Sampled subgroups of Delta_2(F_l) against the three-case classification
    Propclass {
        #[arg(long, default_value_t = 5)]
        ell: u32,
        /// Number of random generating sets drawn
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
        mode: ModeArg,
    },
    /// Radial automorphism count against 2 phi(l-1)
    Ordrad {
        #[arg(long, value_delimiter = ',', default_value = "5,7,11,13")]
        ells: Vec<u32>,
    },
    /// |Delta_2(F_l)| (l-1) against |GL_2(F_l)|^2
    Orderdelta {
        #[arg(long, value_delimiter = ',', default_value = "3,5")]
        ells: Vec<u32>,
    },
}
