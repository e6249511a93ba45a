//! The `berge` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use serde::Serialize;

use crate::adversary::{brute_force_cover_check, check_eq1, default_block_sizes, default_layout, SearchLimits};
use crate::combin::binomial;
use crate::error::{Error, Result};
use crate::hypergraph::{verify_family, Params};
use crate::oracle::{load_oracle, make_random_oracle, ColouringOracle};
use crate::partition::{cover_prefix, Certificate, CoverConfig};
use crate::ramsey::{build_clique_chain, default_q_schedule, ColourBlocks};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Largest number of edges the adversary subcommand enumerates when checking
/// its layout.
const EQ1_EDGE_CAP: u64 = 200_000;

#[derive(Parser, Debug)]
#[command(name = "berge", version, about = "Monochromatic t-tight Berge-path partitions and the colourings that defeat them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cover [prefix] by at most s monochromatic paths and write a certificate.
    Partition(PartitionArgs),
    /// Write the adversarial block colouring and check it.
    Adversary(AdversaryArgs),
    /// Check a certificate.
    Verify(VerifyArgs),
    /// Exhaustively decide whether [window] can be covered.
    Brutecheck(BruteArgs),
    /// Print per-anchor clique-chain diagnostics.
    Chain(ChainArgs),
}

#[derive(Args, Debug)]
struct Triple {
    #[arg(long)]
    s: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    t: u32,
}

#[derive(Args, Debug)]
struct Source {
    /// Seed of the random colouring.
    #[arg(long)]
    random_seed: Option<u64>,
    /// Colouring file.
    #[arg(long, conflicts_with = "random_seed")]
    colouring: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[command(flatten)]
    triple: Triple,
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 30)]
    prefix: u32,
    /// Starting window (default 8 * prefix * k).
    #[arg(long)]
    window: Option<u32>,
    #[arg(long, default_value_t = 1 << 14)]
    max_window: u32,
    /// Node budget per homogeneous-set search.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AdversaryArgs {
    #[command(flatten)]
    triple: Triple,
    /// Realised window of the layout (default: the smallest that fits).
    #[arg(long)]
    window: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    certificate: PathBuf,
    /// Check against this colouring instead of the embedded one.
    #[arg(long)]
    colouring: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BruteArgs {
    #[command(flatten)]
    triple: Triple,
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    window: u32,
    /// Search node budget.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[command(flatten)]
    triple: Triple,
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 30)]
    prefix: u32,
    /// Window (default 8 * prefix * k).
    #[arg(long)]
    window: Option<u32>,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.command {
        Command::Partition(a) => partition(a),
        Command::Adversary(a) => adversary(a),
        Command::Verify(a) => verify(a),
        Command::Brutecheck(a) => brutecheck(a),
        Command::Chain(a) => chain(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } | Error::Size(_) | Error::Inconclusive(_) | Error::WindowExhausted { .. } => EXIT_BUDGET,
        Error::Invariant(_) => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn oracle_from(source: &Source, k: u32, r: u32) -> Result<ColouringOracle> {
    let oracle = match (&source.colouring, source.random_seed) {
        (Some(path), _) => load_oracle(path)?,
        (None, Some(seed)) => make_random_oracle(r, k, seed),
        (None, None) => return Err(Error::Param("give --random-seed or --colouring".into())),
    };
    if oracle.k() != k || oracle.r() != r {
        return Err(Error::Param(format!(
            "colouring is {}-uniform with {} colours, expected k = {k}, r = {r}",
            oracle.k(),
            oracle.r()
        )));
    }
    Ok(oracle)
}

fn partition(a: PartitionArgs) -> Result<i32> {
    let params = Params::partition(a.triple.s, a.triple.k, a.triple.t)?;
    let oracle = oracle_from(&a.source, params.k, params.r)?;
    let config = CoverConfig { window: a.window, max_window: a.max_window, budget: a.budget, q_schedule: None };
    let cert = cover_prefix(&oracle, &params, a.prefix, &config)?;
    let report = verify_family(&cert.paths, cert.covered_prefix, &cert.params, &oracle);
    if !report.ok {
        eprintln!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(EXIT_FAILED);
    }
    info!(
        "covered [{}] with {} paths after {} steps at window {}",
        cert.covered_prefix,
        cert.paths.len(),
        cert.stats.steps,
        cert.stats.window
    );
    emit(&cert, a.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Eq1Summary {
    window: u32,
    blocks: usize,
    ok: bool,
    violations: usize,
    first: Option<String>,
}

fn adversary(a: AdversaryArgs) -> Result<i32> {
    let Triple { s, k, t } = a.triple;
    let layout = match a.window {
        Some(w) => default_block_sizes(s, k, t, w)?,
        None => default_layout(s, k, t)?,
    };
    let growth = layout.check_growth();
    let oracle = ColouringOracle::adversarial(layout.clone());
    emit(&oracle.spec(), a.out.as_deref())?;

    let mut window = u32::try_from(layout.window()).unwrap_or(u32::MAX);
    while window > k && binomial(u64::from(window), u64::from(k)) > EQ1_EDGE_CAP {
        window -= 1;
    }
    let mut violations = growth.violations.clone();
    for c in layout.order() {
        violations.extend(check_eq1(&layout, c, window).violations);
    }
    let summary = Eq1Summary {
        window,
        blocks: layout.order().len(),
        ok: violations.is_empty(),
        violations: violations.len(),
        first: violations.first().map(|v| format!("{}: {}", v.rule, v.detail)),
    };
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(if summary.ok { EXIT_OK } else { EXIT_FAILED })
}

fn verify(a: VerifyArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.certificate)?;
    let cert: Certificate = serde_json::from_str(&text)
        .map_err(|e| Error::Load(format!("{}: {e}", a.certificate.display())))?;
    let oracle = match &a.colouring {
        Some(path) => load_oracle(path)?,
        None => ColouringOracle::from_spec(&cert.colouring)?,
    };
    if oracle.k() != cert.params.k || oracle.r() != cert.params.r {
        return Err(Error::Param("certificate params do not match the colouring".into()));
    }
    let report = verify_family(&cert.paths, cert.covered_prefix, &cert.params, &oracle);
    emit(&report, a.out.as_deref())?;
    if !report.ok {
        for v in &report.violations {
            eprintln!("{}: {}", v.rule, v.detail);
        }
    }
    Ok(if report.ok { EXIT_OK } else { EXIT_FAILED })
}

fn brutecheck(a: BruteArgs) -> Result<i32> {
    let Triple { s, k, t } = a.triple;
    let oracle = if a.source.colouring.is_none() && a.source.random_seed.is_none() {
        ColouringOracle::adversarial(default_layout(s, k, t)?)
    } else if let Some(path) = &a.source.colouring {
        load_oracle(path)?
    } else {
        let r = Params::partition(s, k, t)?.r;
        oracle_from(&a.source, k, r)?
    };
    let params = Params::with_colours(s, k, t, oracle.r())?;
    let mut limits = SearchLimits::default();
    if let Some(b) = a.budget {
        limits.node_budget = b;
    }
    let result = brute_force_cover_check(&oracle, a.window, &params, limits)?;
    emit(&result, a.out.as_deref())?;
    eprintln!(
        "[{}] {} after {} nodes",
        a.window,
        if result.coverable { "coverable" } else { "not coverable" },
        result.nodes_explored
    );
    Ok(if result.coverable { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct ChainReport {
    window: u32,
    selected_block: usize,
    anchors: Vec<crate::ramsey::AnchorRecord>,
}

fn chain(a: ChainArgs) -> Result<i32> {
    let params = Params::partition(a.triple.s, a.triple.k, a.triple.t)?;
    let oracle = oracle_from(&a.source, params.k, params.r)?;
    let window = a.window.unwrap_or(8 * a.prefix * params.k);
    let blocks = ColourBlocks::default_for(&params)?;
    let chain = build_clique_chain(&oracle, window, &params, &blocks, &default_q_schedule(params.t, a.prefix), a.budget)?;
    let report = ChainReport { window, selected_block: chain.selected_block, anchors: chain.records() };
    emit(&report, a.out.as_deref())?;
    Ok(EXIT_OK)
}
