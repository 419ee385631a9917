//! `twistcalc`: exact twisted-conjugacy computations for unitriangular
//! matrix groups from the command line.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when an
//! `--expect` assertion fails, 3 when a resource cap is exceeded.

mod commands;
mod inputs;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "twistcalc",
    version,
    about = "Reidemeister numbers, R-infinity sweeps, and twisted-conjugacy witnesses for UT_n(R)"
)]
struct Cli {
    /// Emit a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Assert a fact about the result and exit 2 if it does not hold.
    /// May be given several times.
    #[arg(long, global = true, value_name = "FACT")]
    expect: Vec<String>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One Reidemeister number with its layer breakdown.
    Reid(ReidArgs),
    /// Enumerate every diagonal-family automorphism and check R-infinity.
    Sweep(SweepArgs),
    /// Collect the set of attained Reidemeister numbers with witnesses.
    Spectrum(SpectrumArgs),
    /// Twisted class counts and proposition checks on a finite group.
    Oracle(OracleArgs),
    /// Classify and solve twisted conjugacy over the rational field.
    Solve(SolveArgs),
    /// The central boundary subgroup H, with optional conjugator lookup.
    Hsub(HsubArgs),
}

/// Flags describing one automorphism of `UT_n(R)`.
#[derive(Args)]
pub struct AutoArgs {
    /// Coefficient ring: Z, Q, Z[sqrt,d], or Z[isqrt,d].
    #[arg(long)]
    pub ring: Option<String>,

    /// Matrix size; inferred from --diag when omitted.
    #[arg(long)]
    pub n: Option<usize>,

    /// Unit diagonal d_1,...,d_n, comma separated (e.g. 1,-1,1 or 1,w,-1).
    #[arg(long)]
    pub diag: Option<String>,

    /// Entrywise ring automorphism: id or conj.
    #[arg(long, default_value = "id")]
    pub delta: String,

    /// Flip exponent: 0 or 1.
    #[arg(long, default_value_t = 0)]
    pub m: u8,

    /// Central map: a rational scalar over Q, or integer matrix rows
    /// "a,b;c,d" over a lattice ring.
    #[arg(long)]
    pub lambda: Option<String>,

    /// Inner twist: a unitriangular matrix as JSON, inline or a file name.
    #[arg(long)]
    pub inner: Option<String>,

    /// 2x2 automorphism matrix "p,q;r,s" acting on UT_3.
    #[arg(long)]
    pub heis: Option<String>,

    /// Complete automorphism as JSON (inline or a file name); replaces
    /// the flags above.
    #[arg(long)]
    pub auto_json: Option<String>,
}

#[derive(Args)]
pub struct ReidArgs {
    #[command(flatten)]
    pub auto: AutoArgs,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Coefficient ring: Z, Z[sqrt,d], or Z[isqrt,d].
    #[arg(long)]
    pub ring: String,

    /// Matrix size, at least 3.
    #[arg(long)]
    pub n: usize,

    /// Units per diagonal slot when the unit group is infinite.
    #[arg(long, default_value_t = 8)]
    pub units: usize,

    /// Worker threads for the sweep.
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Skip re-checking that predicted witness layers are singular.
    #[arg(long)]
    pub no_layer_check: bool,
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// Coefficient ring: Z, Z[sqrt,d], or Z[isqrt,d].
    #[arg(long)]
    pub ring: String,

    /// Matrix size, at least 3.
    #[arg(long)]
    pub n: usize,

    /// Also enumerate 2x2 matrix automorphisms of UT_3(Z) with entries
    /// bounded by this value.
    #[arg(long)]
    pub heis_bound: Option<i64>,

    /// Skip the diagonal normal-form family.
    #[arg(long)]
    pub no_diagonal: bool,

    /// Units per diagonal slot when the unit group is infinite.
    #[arg(long, default_value_t = 8)]
    pub units: usize,
}

#[derive(Args)]
pub struct OracleArgs {
    /// Finite group multiplication table as JSON (inline or a file name).
    #[arg(long)]
    pub group: Option<String>,

    /// Reduce the flag-described automorphism mod this residue instead of
    /// loading a table.
    #[arg(long = "mod")]
    pub modulus: Option<u32>,

    #[command(flatten)]
    pub auto: AutoArgs,

    /// Map to analyse: identity, inverse, inner:G, or ut (the reduced
    /// automorphism; default with --mod).
    #[arg(long = "auto")]
    pub map: Option<String>,

    /// Proposition checks to run: inn, zf, prod, ind. May be repeated.
    #[arg(long)]
    pub check: Vec<String>,

    /// Central subgroup for the zf check, as element indices "0,2".
    #[arg(long)]
    pub subgroup: Option<String>,

    /// Second factor for the prod check (defaults to the group itself).
    #[arg(long)]
    pub prod_group: Option<String>,

    /// Map on the second factor: identity, inverse, or inner:G.
    #[arg(long)]
    pub prod_auto: Option<String>,

    /// Random inner twists for the inn check.
    #[arg(long, default_value_t = 8)]
    pub twists: usize,

    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub auto: AutoArgs,

    /// Element to conjugate, as matrix JSON (inline or a file name).
    #[arg(long)]
    pub target: Option<String>,

    /// Conjugate the target into the center instead of to the identity.
    #[arg(long)]
    pub central: bool,
}

#[derive(Args)]
pub struct HsubArgs {
    #[command(flatten)]
    pub auto: AutoArgs,

    /// Corner value of the first central element.
    #[arg(long)]
    pub a: Option<String>,

    /// Corner value of the second central element.
    #[arg(long)]
    pub b: Option<String>,
}

/// How a run can end without producing a result.
pub enum Failure {
    /// Bad flags, unreadable input, or a computation the engine refuses.
    Usage(String),
    /// An `--expect` assertion did not hold.
    Expect(String),
    /// A case or size cap was exceeded.
    Cap(String),
}

impl From<twistcalc_core::Error> for Failure {
    fn from(e: twistcalc_core::Error) -> Self {
        match e {
            twistcalc_core::Error::CapExceeded { .. }
            | twistcalc_core::Error::PellCapExceeded { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Settings shared by every subcommand.
pub struct Global {
    pub json: bool,
    pub expects: Vec<String>,
    /// `TWISTCALC_CAP`, when set: overrides sweep and oracle size caps.
    pub cap: Option<u64>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let cap = match std::env::var("TWISTCALC_CAP") {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                eprintln!("error: TWISTCALC_CAP must be a nonnegative integer, got {s:?}");
                std::process::exit(1);
            }
        },
        Err(_) => None,
    };
    let global = Global {
        json: cli.json,
        expects: cli.expect,
        cap,
    };
    let outcome = match &cli.cmd {
        Cmd::Reid(a) => commands::reid(&global, a),
        Cmd::Sweep(a) => commands::sweep(&global, a),
        Cmd::Spectrum(a) => commands::spectrum(&global, a),
        Cmd::Oracle(a) => commands::oracle(&global, a),
        Cmd::Solve(a) => commands::solve(&global, a),
        Cmd::Hsub(a) => commands::hsub(&global, a),
    };
    match outcome {
        Ok(()) => {}
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(Failure::Expect(msg)) => {
            eprintln!("expectation failed: {msg}");
            std::process::exit(2);
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("cap exceeded: {msg}");
            std::process::exit(3);
        }
    }
}
