//! The `galprod` command: argument parsing, curve resolution and JSON output.
//! Exit status is 0 on success, 1 on domain errors (with an error document
//! on stderr) and 2 on usage errors.

pub mod args;
pub mod error;
pub mod resolve;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use galprod_core::bounds::{self, BSConstants, FieldInvariants};
use galprod_core::curves::{self, CurveJson};
use galprod_core::sieve::{sieve_product, SieveInput, DEFAULT_ELL_CEILING, DEFAULT_PMAX};
use galprod_core::verify::{self, SamplingMode, VerificationReport};
use galprod_core::CurveModel;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use args::{BoundCommand, BsOpts, Cli, Command, CurveArg, FieldOpts, GlobalOpts, ModeArg, VerifyCommand};
use error::{io_err, CliError, CliResult};
use resolve::{parse_biguint, parse_curve_arg, resolve_curve, resolve_label, CurveSpec, LmfdbClient, Mode};

/// What the process prints and returns.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match execute(&cli) {
        Ok(doc) => Outcome {
            code: 0,
            stdout: serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: e.to_json().to_string() + "\n",
        },
    }
}

pub fn default_cache_dir() -> PathBuf {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME").filter(|x| !x.is_empty()) {
        return PathBuf::from(x).join("galprod");
    }
    match std::env::var_os("HOME").filter(|x| !x.is_empty()) {
        Some(h) => PathBuf::from(h).join(".cache").join("galprod"),
        None => PathBuf::from(".galprod-cache"),
    }
}

struct Context {
    mode: Mode,
    cache_dir: PathBuf,
    client: LmfdbClient,
}

impl Context {
    fn new(g: &GlobalOpts) -> Self {
        Context {
            mode: if g.offline { Mode::Offline } else { Mode::Online },
            cache_dir: g.cache_dir.clone().unwrap_or_else(default_cache_dir),
            client: LmfdbClient::new(g.lmfdb_url.as_deref().unwrap_or(resolve::DEFAULT_BASE_URL)),
        }
    }

    fn curve(&self, spec: CurveSpec) -> CliResult<CurveModel> {
        resolve_curve(spec, self.mode, &self.cache_dir, &self.client)
    }

    fn curve_arg(&self, arg: &CurveArg) -> CliResult<CurveModel> {
        match (&arg.curve, &arg.label) {
            (Some(c), _) => self.curve(CurveSpec::Inline(parse_curve_arg(c)?)),
            (None, Some(l)) => self.curve(CurveSpec::Label(l.clone())),
            (None, None) => unreachable!("clap requires one of --curve, --label"),
        }
    }
}

fn execute(cli: &Cli) -> CliResult<Value> {
    let ctx = Context::new(&cli.global);
    let g = &cli.global;
    let pmax = g.pmax.unwrap_or(DEFAULT_PMAX);
    match &cli.command {
        Command::Ap(c) => {
            let e = ctx.curve_arg(c)?;
            let records = curves::trace_table(&e, pmax)?;
            Ok(json!({"curve": CurveJson::from(e), "pmax": pmax, "records": records}))
        }
        Command::TorsionDims(c) => {
            let e = ctx.curve_arg(c)?;
            let records: Vec<_> = curves::frobenius_table(&e, pmax)?
                .into_iter()
                .filter_map(|d| d.dims)
                .collect();
            Ok(json!({"curve": CurveJson::from(e), "pmax": pmax, "records": records}))
        }
        Command::Sieve { input, ell_ceiling } => {
            let sieve_input = read_sieve_input(&ctx, input, g.pmax, *ell_ceiling)?;
            Ok(to_value(&sieve_product(&sieve_input)?))
        }
        Command::Bound(b) => bounds::with_working_digits(g.precision, || bound(b))?,
        Command::Verify(v) => {
            let mut report = run_verify(v, g.seed)?;
            if !g.timing {
                report.elapsed_ms = None;
            }
            Ok(to_value(&report))
        }
        Command::Fetch { labels, refresh } => {
            let entries = labels
                .iter()
                .map(|l| resolve_label(l, ctx.mode, &ctx.cache_dir, &ctx.client, *refresh))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(json!({"entries": entries}))
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CurveEntry {
    Label(String),
    Inline(CurveJson),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SieveFile {
    curves: Vec<CurveEntry>,
    nonsurjective_sets: Vec<BTreeSet<u64>>,
    #[serde(default)]
    pmax: Option<u64>,
    #[serde(default)]
    ell_ceiling: Option<u64>,
}

/// Command-line values win over the file's, which win over the defaults.
fn read_sieve_input(
    ctx: &Context,
    path: &PathBuf,
    pmax: Option<u64>,
    ell_ceiling: Option<u64>,
) -> CliResult<SieveInput> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: SieveFile = serde_json::from_str(&text).map_err(|e| CliError::Json {
        what: path.display().to_string(),
        message: e.to_string(),
    })?;
    let curves = file
        .curves
        .into_iter()
        .map(|c| match c {
            CurveEntry::Label(l) => ctx.curve(CurveSpec::Label(l)),
            CurveEntry::Inline(j) => Ok(CurveModel::try_from(j)?),
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut input = SieveInput::new(
        curves,
        file.nonsurjective_sets,
        pmax.or(file.pmax).unwrap_or(DEFAULT_PMAX),
    );
    input.ell_ceiling = ell_ceiling.or(file.ell_ceiling).unwrap_or(DEFAULT_ELL_CEILING);
    Ok(input)
}

fn field(f: &FieldOpts) -> CliResult<FieldInvariants> {
    Ok(FieldInvariants::new(parse_biguint(&f.disc)?, f.degree)?)
}

fn bs(b: &BsOpts) -> CliResult<BSConstants> {
    Ok(BSConstants::new(&b.bs_a, &b.bs_b, &b.bs_c)?)
}

fn conductors(list: &[String]) -> CliResult<Vec<num_bigint::BigUint>> {
    list.iter().map(|s| parse_biguint(s)).collect()
}

fn bound(cmd: &BoundCommand) -> CliResult<Value> {
    let report = match cmd {
        BoundCommand::Mw20 { conductor } => bounds::mw20_bound(&parse_biguint(conductor)?)?,
        BoundCommand::Faltings { g, n1, n2, field: f, bs: b } => {
            bounds::faltings_bound(*g, &field(f)?, &parse_biguint(n1)?, &parse_biguint(n2)?, &bs(b)?)?
        }
        BoundCommand::ProductAv {
            g,
            conductors: list,
            c_individual,
            field: f,
            bs: b,
        } => {
            let c = if c_individual.is_empty() {
                vec!["0".to_string(); list.len()]
            } else {
                c_individual.clone()
            };
            bounds::product_av_bound(*g, &field(f)?, &conductors(list)?, &c, &bs(b)?)?
        }
        BoundCommand::ProductEc {
            conductors: list,
            constant,
            exact_constant,
        } => {
            let conds = conductors(list)?;
            if *exact_constant {
                let c = bounds::format_sig(&bounds::ec_constant_exact(120), 100);
                bounds::product_ec_bound_with_constant(&conds, &c)?
            } else if let Some(c) = constant {
                bounds::product_ec_bound_with_constant(&conds, c)?
            } else {
                bounds::product_ec_bound(&conds)?
            }
        }
        BoundCommand::Pair { g, b, c1, c2 } => bounds::pair_c_bound(*g, b, c1, c2)?,
        BoundCommand::BachSorenson { log_dl, degree_lk, bs: b } => {
            bounds::bach_sorenson(log_dl, *degree_lk, &bs(b)?)?
        }
        BoundCommand::LogDisc {
            degree_lk,
            degree_lq,
            rad,
            field: f,
        } => bounds::log_disc_upper(&field(f)?, *degree_lk, *degree_lq, &parse_biguint(rad)?)?,
    };
    Ok(to_value(&report))
}

fn run_verify(cmd: &VerifyCommand, seed: u64) -> CliResult<VerificationReport> {
    Ok(match cmd {
        VerifyCommand::Smallprimes { ell } => verify::verify_smallprimes_lemma(*ell)?,
        VerifyCommand::Propclass { ell, trials, mode } => {
            let mode = match mode {
                ModeArg::Uniform => SamplingMode::Uniform,
                ModeArg::Diagonal => SamplingMode::Diagonal,
            };
            verify::verify_propclass_sampling(*ell, *trials, seed, mode)?
        }
        VerifyCommand::Ordrad { ells } => verify::verify_ordrad(ells)?,
        VerifyCommand::Orderdelta { ells } => verify::verify_order_delta(ells)?,
    })
}
