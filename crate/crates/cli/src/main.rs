use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wildsets::Error;

mod commands;
mod selftest;

#[derive(Parser, Debug)]
#[command(name = "wildsets", version, about = "Wild sets of global function fields: symbols, ranks, certificates")]
struct Cli {
    /// Size of the constant field (odd prime power).
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Cubic f of the curve y^2 = f(t); omit for the projective line.
    #[arg(long, global = true)]
    curve: Option<String>,
    /// Highest degree scanned in searches (default: $WILDSETS_DEGREE_CAP or 6).
    #[arg(long, global = true)]
    degree_cap: Option<u32>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RankArg {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
    General,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Hilbert symbol (a, b) at a place.
    Hilbert {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        place: String,
    },
    /// Product of all Hilbert symbols of (a, b).
    Reciprocity {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Ranks of Sing, Δ, G and Pic of the complement of a set of places.
    Ranks {
        #[arg(long)]
        places: String,
    },
    /// Whether two 2-divisible places are related by smile.
    Smile {
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Build a wild-set certificate.
    Construct {
        #[arg(long, value_enum)]
        rank: RankArg,
        #[arg(long)]
        places: String,
        /// The 2-divisible places for --rank general.
        #[arg(long)]
        aux: Option<String>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Verify a certificate file.
    Verify {
        #[arg(long)]
        cert: std::path::PathBuf,
    },
    /// Print the wild set of a verified certificate.
    Wild {
        #[arg(long)]
        cert: std::path::PathBuf,
    },
    /// Run the embedded invariant checks.
    Selftest,
}

pub struct Opts {
    pub q: Option<u32>,
    pub curve: Option<String>,
    pub cap: u32,
    pub seed: u64,
    pub format: Format,
}

impl Opts {
    pub fn q(&self) -> Result<u32, Error> {
        self.q.ok_or_else(|| Error::InvalidInput("--q is required".into()))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidInput(_) | Error::DimensionMismatch { .. } => 2,
        Error::Refused(_)
        | Error::NotPrincipal
        | Error::NotTwoDivisible
        | Error::BoundExceeded { .. }
        | Error::Unsupported(_) => 3,
        Error::SearchExhausted { .. } => 4,
        Error::Verification(_) | Error::Internal(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let opts = Opts {
        q: cli.q,
        curve: cli.curve,
        cap: cli.degree_cap.unwrap_or_else(wildsets::config::degree_cap_from_env),
        seed: cli.seed,
        format: cli.format,
    };
    let res = match cli.cmd {
        Cmd::Hilbert { a, b, place } => commands::hilbert(&opts, &a, &b, &place),
        Cmd::Reciprocity { a, b } => commands::reciprocity(&opts, &a, &b),
        Cmd::Ranks { places } => commands::ranks(&opts, &places),
        Cmd::Smile { first, second } => commands::smile(&opts, &first, &second),
        Cmd::Construct { rank, places, aux, out } => commands::construct(&opts, rank, &places, aux.as_deref(), out.as_deref()),
        Cmd::Verify { cert } => commands::verify(&opts, &cert, false),
        Cmd::Wild { cert } => commands::verify(&opts, &cert, true),
        Cmd::Selftest => selftest::run(&opts),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
