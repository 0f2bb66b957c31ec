use std::path::PathBuf;
use std::process::ExitCode;

use ainf_cli::{parse_field, parse_pivot, CliResult, Options, Outcome};
use ainf_core::{Field, PivotRule};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ainf", version, about = "Exact A∞-structures: verification, transfer and lifting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Expected coefficient field: Q or Fp:<p>.
    #[arg(long, global = true, value_parser = parse_field)]
    field: Option<Field>,
    /// Arity bound for transfers and lifts.
    #[arg(long, global = true)]
    max_arity: Option<usize>,
    /// Pivot rule for every linear solve.
    #[arg(long, global = true, value_parser = parse_pivot, default_value = "first")]
    pivot: PivotRule,
    /// Use the strictly unital variants.
    #[arg(long, global = true)]
    unital: bool,
    /// Write the output document here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for selftest fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check every identity a document claims.
    Verify { input: PathBuf },
    /// Transfer an A∞-algebra along a quasi-isomorphism.
    Transfer {
        input: PathBuf,
        /// Map document for ε₁.
        #[arg(long, conflicts_with = "homology")]
        map: Option<PathBuf>,
        /// Transfer onto the homology along a cycle section.
        #[arg(long)]
        homology: bool,
        /// Force a strict quasi-isomorphism; ε₁ must be degreewise surjective.
        #[arg(long)]
        surjective_strict: bool,
    },
    /// Lift a morphism ψ along a quasi-isomorphism ε up to homotopy.
    Lift { eps: PathBuf, psi: PathBuf },
    /// Transfer an A∞-module along a quasi-isomorphism.
    TransferModule {
        input: PathBuf,
        #[arg(long, conflicts_with = "homology")]
        map: Option<PathBuf>,
        #[arg(long)]
        homology: bool,
        #[arg(long)]
        surjective_strict: bool,
        /// Also transfer the base algebra onto its homology and restrict.
        #[arg(long, requires = "homology")]
        pair: bool,
    },
    /// Certify that two transfers are homotopy equivalent.
    Uniqueness { first: PathBuf, second: PathBuf },
    /// Homology and a cycle section of a complex, algebra or module.
    Homology { input: PathBuf },
    /// Run the built-in fixtures through every algorithm.
    Selftest,
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let c = &cli.common;
    let mut opts = Options { field: c.field, max_arity: c.max_arity, pivot: c.pivot, unital: c.unital, seed: c.seed, ..Options::default() };
    match &cli.command {
        Command::Verify { input } => ainf_cli::cmd_verify(input, &opts),
        Command::Transfer { input, map, homology, surjective_strict } => {
            opts.homology = *homology;
            opts.surjective_strict = *surjective_strict;
            ainf_cli::cmd_transfer(input, map.as_deref(), &opts)
        }
        Command::Lift { eps, psi } => ainf_cli::cmd_lift(eps, psi, &opts),
        Command::TransferModule { input, map, homology, surjective_strict, pair } => {
            opts.homology = *homology;
            opts.surjective_strict = *surjective_strict;
            opts.pair = *pair;
            ainf_cli::cmd_transfer_module(input, map.as_deref(), &opts)
        }
        Command::Uniqueness { first, second } => ainf_cli::cmd_uniqueness(first, second, &opts),
        Command::Homology { input } => ainf_cli::cmd_homology(input, &opts),
        Command::Selftest => ainf_cli::cmd_selftest(&opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.common.output.clone();
    match run(cli) {
        Ok(outcome) => {
            for l in &outcome.lines {
                if outcome.document.is_some() && output.is_none() {
                    eprintln!("{l}");
                } else {
                    println!("{l}");
                }
            }
            if let Some(doc) = &outcome.document {
                let text = doc.to_canonical_string();
                match &output {
                    Some(p) => {
                        if let Err(e) = std::fs::write(p, text) {
                            eprintln!("error: {}: {e}", p.display());
                            return ExitCode::from(ainf_cli::EXIT_PRECONDITION as u8);
                        }
                    }
                    None => print!("{text}"),
                }
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
