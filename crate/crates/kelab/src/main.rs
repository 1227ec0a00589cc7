use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kelab::{run_all, run_suite, RunError, SuiteConfig, SUITES};
use kelab_core::{DomainKind, DomainModel};

#[derive(Parser)]
#[command(name = "kelab", version, about = "Verification suites for Kähler–Einstein potentials on model domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and write its JSON report.
    Run(RunArgs),
    /// Run every suite from a TOML config and write a summary.
    RunAll {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the suites and the statement each one checks.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ball,
    Polydisc,
    Type1,
    Type2,
    Type3,
    Type4,
    HalfPlaneProduct,
}

#[derive(Args)]
struct RunArgs {
    suite: String,
    #[arg(long, value_enum)]
    domain: Option<Kind>,
    #[arg(long, requires = "q")]
    p: Option<usize>,
    #[arg(long, requires = "p")]
    q: Option<usize>,
    #[arg(long, conflicts_with_all = ["p", "q", "n"])]
    m: Option<usize>,
    #[arg(long, conflicts_with_all = ["p", "q"])]
    n: Option<usize>,
    #[arg(long)]
    ricci: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; side files are written beside it. Prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn need(value: Option<usize>, flag: &str, kind: &str) -> Result<usize, RunError> {
    value.ok_or_else(|| RunError::Config(format!("--domain {kind} needs --{flag}")))
}

fn domain_of(args: &RunArgs) -> Result<Option<DomainModel>, RunError> {
    let Some(kind) = args.domain else {
        return Ok(None);
    };
    let kind = match kind {
        Kind::Ball => DomainKind::Ball { n: need(args.n, "n", "ball")? },
        Kind::Polydisc => DomainKind::Polydisc { r: need(args.n, "n", "polydisc")? },
        Kind::HalfPlaneProduct => DomainKind::HalfPlaneProduct { r: need(args.n, "n", "half-plane-product")? },
        Kind::Type1 => DomainKind::TypeI { p: need(args.p, "p", "type1")?, q: need(args.q, "q", "type1")? },
        Kind::Type2 => DomainKind::TypeII { m: need(args.m, "m", "type2")? },
        Kind::Type3 => DomainKind::TypeIII { m: need(args.m, "m", "type3")? },
        Kind::Type4 => DomainKind::TypeIV { m: need(args.m, "m", "type4")? },
    };
    DomainModel::new(kind).map(Some).map_err(|e| RunError::Config(e.to_string()))
}

fn env_seed() -> Result<Option<u64>, RunError> {
    match std::env::var("KELAB_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| RunError::Config(format!("KELAB_SEED is not an integer: {s:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(RunError::Config(format!("KELAB_SEED: {e}"))),
    }
}

fn run(args: RunArgs) -> Result<u8, RunError> {
    let cfg = SuiteConfig {
        domain: domain_of(&args)?,
        n: args.n,
        ricci: args.ricci,
        samples: args.samples,
        seed: args.seed.or(env_seed()?),
        tol: args.tol,
    };
    let report = run_suite(&args.suite, &cfg)?;
    match &args.out {
        Some(path) => {
            for p in report.write(path)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => println!("{}", report.to_json()),
    }
    eprintln!(
        "{}: {} (max residual {:.3e})",
        report.suite,
        if report.pass { "pass" } else { "FAIL" },
        report.max_residual
    );
    Ok(if report.pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for s in &SUITES {
                println!("{:<16} {}", s.name, s.statement);
            }
            Ok(0)
        }
        Command::Run(args) => run(args),
        Command::RunAll { config, jobs } => env_seed().and_then(|seed| run_all(&config, jobs, seed)).map(|outcome| {
            for s in &outcome.suites {
                match &s.error {
                    Some(e) => eprintln!("{:<16} ERROR {e}", s.suite),
                    None => eprintln!(
                        "{:<16} {} (max residual {:.3e})",
                        s.suite,
                        if s.pass { "pass" } else { "FAIL" },
                        s.max_residual.unwrap_or(f64::NAN)
                    ),
                }
            }
            eprintln!("summary: {}", outcome.summary_path.display());
            outcome.exit_code
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
