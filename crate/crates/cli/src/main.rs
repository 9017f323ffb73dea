mod cache;
mod checks;
mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use cache::Cache;

#[derive(Parser, Debug)]
#[command(name = "perfect", version, about = "Perfect forms, Voronoi complexes, torsion bounds and cyclotomic tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Certified decimal digits for logarithmic quantities.
    #[arg(long, global = true, default_value_t = 20, value_parser = clap::value_parser!(u32).range(20..=2000))]
    pub digits: u32,
    /// Seed for the randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cache directory (default: $PERFECT_CACHE_DIR, else the user cache directory).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Also run the invariant checks for this subcommand.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Perfect forms and the Voronoi complex.
    #[command(subcommand)]
    Voronoi(VoronoiCmd),
    /// Smith normal form, homology and torsion bounds.
    #[command(subcommand)]
    Torsion(TorsionCmd),
    /// The explicit constants and their double-logarithmic checks.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Bernoulli numbers, irregular pairs and unit residue tests.
    #[command(subcommand)]
    Cyclo(CycloCmd),
}

#[derive(Subcommand, Debug)]
pub enum VoronoiCmd {
    /// Perfect forms of dimension N up to equivalence.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Allow N = 6 (slow).
        #[arg(long)]
        allow_six: bool,
    },
    /// The integral chain complex of the Voronoi cells.
    Complex {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "sl")]
        group: perfect_core::voronoi::Group,
    },
}

#[derive(Subcommand, Debug)]
pub enum TorsionCmd {
    /// Smith normal form of a matrix in the sparse text format.
    Snf { file: PathBuf },
    /// Homology and its torsion bound for a stored complex.
    Bound {
        #[arg(long)]
        complex: PathBuf,
        /// Degree; all degrees when omitted.
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoundsCmd {
    /// A(N), the coordinate bound on minimal vectors after reduction.
    A {
        #[arg(long)]
        n: u32,
        /// Use the known Hermite constant (N <= 8) instead of 1 + N/4.
        #[arg(long)]
        exact_hermite: bool,
    },
    /// h(k, N).
    H {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u32,
    },
    /// k(m) with its double-log inequalities.
    K {
        #[arg(long)]
        m: u64,
    },
    /// v(n) with its double-log inequalities.
    V {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum CycloCmd {
    /// Exact B_n.
    Bernoulli {
        #[arg(long)]
        n: usize,
    },
    /// Irregular pairs (p, k) for odd primes p <= max-p.
    Irregular {
        #[arg(long)]
        max_p: u64,
    },
    /// Residue test for one irregular pair, or for all pairs up to max-p.
    Vandiver {
        #[arg(long, requires = "k", conflicts_with = "max_p")]
        p: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, required_unless_present = "p")]
        max_p: Option<u64>,
        #[arg(long, default_value_t = 10)]
        q_budget: usize,
        /// Append certificates to this file as JSON lines.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// L(0, w^-n) mod p and the component verdict from B_{p-n}.
    L0 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u64,
    },
    /// Sum of 1/p over 37 <= p <= x.
    Heuristic {
        #[arg(long)]
        x: u64,
    },
}

/// Bad invocation detected after parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// An invariant check that did not hold.
#[derive(Debug, thiserror::Error)]
#[error("check failed: {0}")]
pub struct CheckFailed(pub String);

/// Rendered result: the JSON value, plus a preferred text form if the
/// generic rendering is not the right one.
pub struct Output {
    pub value: Value,
    pub text: Option<String>,
}

fn default_cache_dir() -> Option<PathBuf> {
    if let Some(d) = std::env::var_os("PERFECT_CACHE_DIR") {
        return Some(d.into());
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return Some(PathBuf::from(d).join("perfect"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("perfect"))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        64
    } else if e.downcast_ref::<CheckFailed>().is_some() {
        2
    } else if let Some(err) = e.downcast_ref::<perfect_core::Error>() {
        if err.is_assertion() {
            2
        } else {
            1
        }
    } else {
        1
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            return Err(UsageError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let cache = Cache::new(if g.no_cache { None } else { g.cache_dir.clone().or_else(default_cache_dir) });
    let out = commands::dispatch(&cli.command, g, &cache)?;
    let mut bytes = match (g.format, &out.text) {
        (Format::Text, Some(t)) => t.clone(),
        (Format::Text, None) => commands::render_text(&out.value),
        (Format::Json, _) => serde_json::to_string_pretty(&out.value)?,
    };
    if !bytes.ends_with('\n') {
        bytes.push('\n');
    }
    match &g.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes.as_bytes())?,
    }
    let failed = out.value.get("check").and_then(|c| c.get("passed")).and_then(Value::as_bool) == Some(false);
    if failed {
        return Err(CheckFailed(commands::check_summary(&out.value)).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
