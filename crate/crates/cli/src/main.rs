use std::process::ExitCode;

use bethe_gl3::verify::{run, OutputFormat, RunConfig, Suite, TwistMode};
use bethe_gl3::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact verification suites for GL(3) trigonometric Bethe vectors.
#[derive(Parser)]
#[command(name = "bethe-gl3", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// RTT relation for chains of 1–3 sites.
    VerifyRtt(Common),
    /// Triangularity and eigenvalues on the vacuum and dual vacuum.
    VerifyVacuum(Common),
    /// Izergin-determinant identities and the summation lemma.
    VerifyIzergin(Common),
    /// The three-term K₁ identity.
    VerifyThreeTerm(Common),
    /// Low-order Bethe vectors against closed forms; permutation symmetry.
    VerifyBethe(Common),
    /// Multiple-action formulas against direct matrix products.
    VerifyAction(Common),
    /// Sequential single actions against the two-point formula.
    VerifyInduction(Common),
    /// Agreement of the two denominator forms in the T₃₁ action.
    VerifyAct31(Common),
    /// Numerical eigenvector check at solutions of the Bethe equations.
    OnShell(Common),
    /// Every suite.
    All(Common),
    /// Re-run a serialized RunConfig.
    Replay {
        /// Path to a JSON RunConfig (e.g. the `config` field of a report).
        path: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// Number of sites N (default: suite grid).
    #[arg(long)]
    sites: Option<usize>,
    /// Size of ū.
    #[arg(long)]
    a: Option<usize>,
    /// Size of v̄.
    #[arg(long)]
    b: Option<usize>,
    /// Number of action points (Izergin suites: determinant size).
    #[arg(long)]
    n: Option<usize>,
    /// Monodromy entry "ij", or "all".
    #[arg(long, default_value = "all")]
    entry: String,
    /// Deformation parameter: "random" or an exact rational "p/r".
    #[arg(long, default_value = "random")]
    q: String,
    /// First seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of consecutive seeds (default: per suite).
    #[arg(long)]
    seeds: Option<u64>,
    /// Decimal digits for float suites.
    #[arg(long, default_value_t = 50)]
    digits: u32,
    /// off, on, both, or a fixed twist constant "p/r".
    #[arg(long, default_value = "both")]
    twist: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<String>,
}

impl Common {
    fn into_config(self, suites: Vec<Suite>) -> Result<RunConfig, Error> {
        Ok(RunConfig {
            suites,
            sites: self.sites,
            a: self.a,
            b: self.b,
            n: self.n,
            entry: self.entry,
            q: self.q,
            seed: self.seed,
            seeds: self.seeds,
            digits: self.digits,
            twist: self.twist.parse::<TwistMode>()?,
            format: match self.format {
                Format::Json => OutputFormat::Json,
                Format::Text => OutputFormat::Text,
            },
            output: self.output,
        })
    }
}

fn config(command: Command) -> Result<RunConfig, Error> {
    let (common, suites) = match command {
        Command::VerifyRtt(c) => (c, vec![Suite::Rtt]),
        Command::VerifyVacuum(c) => (c, vec![Suite::Vacuum]),
        Command::VerifyIzergin(c) => (c, vec![Suite::Izergin]),
        Command::VerifyThreeTerm(c) => (c, vec![Suite::ThreeTerm]),
        Command::VerifyBethe(c) => (c, vec![Suite::Bethe]),
        Command::VerifyAction(c) => (c, vec![Suite::Action]),
        Command::VerifyInduction(c) => (c, vec![Suite::Induction]),
        Command::VerifyAct31(c) => (c, vec![Suite::Act31]),
        Command::OnShell(c) => (c, vec![Suite::OnShell]),
        Command::All(c) => (c, Vec::new()),
        Command::Replay { path } => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
            return serde_json::from_str(&text).map_err(|e| Error::Config(format!("{path}: {e}")));
        }
    };
    common.into_config(suites)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match config(cli.command).and_then(|cfg| run(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("bethe-gl3: {e}");
            return ExitCode::from(2);
        }
    };
    let rendered = report.render();
    match &report.config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("bethe-gl3: {path}: {e}");
                return ExitCode::from(2);
            }
            let t = &report.totals;
            eprintln!("{} cases, {} passed, {} failed", t.cases, t.passed, t.failed);
        }
        None => print!("{rendered}"),
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
