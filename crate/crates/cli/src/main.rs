//! `nilwalk`: validate algebras, emit group laws, run the symbolic lemma
//! suites and Monte Carlo experiments.

mod commands;
mod failure;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "nilwalk", version, about = "Random walks on nilpotent Lie groups")]
struct Cli {
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the catalog of named groups.
    ListGroups,
    /// Check the algebra axioms, the group law and the matrix oracle.
    ///
    /// Exit 0 when everything holds, 1 on an axiom violation, 2 on a
    /// structural error.
    Validate {
        /// Catalog name or path to an algebra JSON file.
        group: String,
        /// Random rational pairs compared with the matrix oracle.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the group law polynomials as JSON.
    EmitLaw {
        /// Catalog name or path to an algebra JSON file.
        group: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the exact product-polynomial and rearrangement suites.
    ///
    /// Exit 0 when every identity holds, 1 with the first counterexample,
    /// 3 when the monomial budget is exceeded.
    VerifyLemmas {
        /// Catalog name or path to an algebra JSON file.
        group: String,
        /// Largest walk length for the product polynomials.
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// Largest level for the rearrangement identities (default: step).
        #[arg(long)]
        max_level: Option<usize>,
        /// Block lengths k.
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        block: Vec<usize>,
        /// Segment counts N'.
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        segments: Vec<usize>,
        /// Cap on stored monomials.
        #[arg(long, default_value_t = nilwalk::product::DEFAULT_MONOMIAL_CAP)]
        cap: usize,
    },
    /// Run an experiment config; writes CSV rows, a JSON report and a run
    /// manifest.
    Run {
        /// Experiment config JSON.
        config: PathBuf,
        /// Output directory (default: the config's `output`, else `.`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Keep rows already in the CSV and compute only missing walk lengths.
        #[arg(long)]
        resume: bool,
        /// Overrides the config seed.
        #[arg(long, env = "NILWALK_SEED")]
        seed: Option<u64>,
    },
    /// Shell scan of the characteristic function of a measure.
    Cramer {
        /// Measure JSON file.
        measure: PathBuf,
        /// Catalog name or algebra file fixing the coordinates.
        #[arg(long, default_value = "heisenberg3")]
        group: String,
        #[arg(long, default_value_t = 1.0)]
        r_min: f64,
        #[arg(long, default_value_t = 8.0)]
        r_max: f64,
        /// Grid points per unit radius.
        #[arg(long, default_value_t = 8.0)]
        density: f64,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    match cli.command {
        Command::ListGroups => commands::list_groups(),
        Command::Validate { group, samples, seed } => commands::validate(&group, samples, seed),
        Command::EmitLaw { group, output } => commands::emit_law(&group, output.as_deref()),
        Command::VerifyLemmas {
            group,
            max_n,
            max_level,
            block,
            segments,
            cap,
        } => commands::verify_lemmas(&group, max_n, max_level, &block, &segments, cap),
        Command::Run {
            config,
            out_dir,
            resume,
            seed,
        } => run::run(&config, out_dir.as_deref(), resume, seed),
        Command::Cramer {
            measure,
            group,
            r_min,
            r_max,
            density,
        } => commands::cramer(&measure, &group, r_min, r_max, density),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nilwalk: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
