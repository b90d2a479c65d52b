//! `mkernel`: kernelization, classification and test-data tooling.
//!
//! Exit codes: 0 on success, 1 when a checked property or verdict fails,
//! 2 on usage, input or resource errors.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mkernel",
    version,
    about = "Kernelize CSP instances through Maltsev and k-edge embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drop every constraint entailed by the ones kept before it.
    Kernelize {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        /// affine, generic, coset or kedge; defaults to affine for `op affine` and generic otherwise.
        #[arg(long)]
        engine: Option<String>,
        /// Process constraints in a seeded random order; reported indices refer to the input order.
        #[arg(long)]
        permute: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Decide which kernel bound the algebraic criteria give for a Boolean language.
    Classify {
        #[arg(long)]
        language: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long = "max-prime", default_value_t = 7)]
        max_prime: u32,
        #[arg(long = "max-degree", default_value_t = 2)]
        max_degree: usize,
        #[arg(long)]
        report: PathBuf,
    },
    /// Compare the solution sets of two instances by brute force.
    Verify {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Write a seeded random instance of one of the built-in families.
    Generate {
        /// one-in-k, nae-k, mod6-k or random-language.
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        constraints: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "out-language")]
        out_language: PathBuf,
        #[arg(long = "out-instance")]
        out_instance: PathBuf,
    },
    /// Close a relation under an operation and report its compact representation.
    Closure {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        relation: String,
        /// `affine:p=<prime>` or `table:<file>` with an `.emb`-style operation block.
        #[arg(long)]
        op: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rewrite an instance over its degree-c monomial variables.
    Extend {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        degree: usize,
        /// Leave the constant monomial out of the variable set.
        #[arg(long = "no-empty-monomial")]
        no_empty_monomial: bool,
        #[arg(long = "out-language")]
        out_language: PathBuf,
        #[arg(long = "out-instance")]
        out_instance: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
