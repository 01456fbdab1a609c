//! The `landscape` command line.
//!
//! Exit statuses: 0 on success, 1 when a requested check fails, 2 on usage,
//! parse, or I/O errors.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ensemble::{run_ensemble, EnsembleSpec, EnsembleSummary};

pub use config::{Check, ConfigError, HoppingSpec, InstanceConfig, PotentialSpec, SolverSpec};
pub use report::{fmt_f64, write_instances_csv, NormReport, SolveReport, StructureReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "landscape",
    version,
    about = "Landscape functions and verified bounds for long-range lattice Schrödinger operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve H u = 1 for one configured instance and check the landscape bound.
    Solve(SolveArgs),
    /// Run a seeded random ensemble through the full pipeline.
    Ensemble(EnsembleArgs),
    /// Show the block reordering of A_j(n) and its spectral gap below 2.
    Structure(StructureArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "landscape-out")]
    pub out_dir: PathBuf,
    /// Solve even when the potential violates the dominance condition.
    #[arg(long)]
    pub override_violated: bool,
    /// Use the Neumann series truncated at this order instead of a direct solve.
    #[arg(long)]
    pub series_order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Ensemble specification (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "landscape-out")]
    pub out_dir: PathBuf,
    /// Override the seed in the specification.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the series certificate order in the specification.
    #[arg(long)]
    pub series_order: Option<usize>,
    /// Worker threads; results are identical for any value.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    /// Matrix size n.
    pub n: usize,
    /// Offset j, 1 <= j <= n-1.
    pub j: usize,
    /// Also write structure.json here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Ensemble(args) => cmd_ensemble(&args),
        Command::Structure(args) => cmd_structure(&args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

type CmdResult = Result<i32, String>;

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn exit_for(passed: bool) -> i32 {
    if passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

pub fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let text = read_text(&args.config)?;
    let mut config =
        InstanceConfig::from_json(&text).map_err(|e| format!("invalid config: {e}"))?;
    if args.override_violated {
        config.override_violated = true;
    }
    if let Some(order) = args.series_order {
        config.solver = SolverSpec::Series { order };
    }
    let op = config
        .operator()
        .map_err(|e| format!("invalid config: {e}"))?;

    let report = SolveReport::compute(&config, &op);
    write_json(&args.out_dir, "report.json", &report)?;
    report
        .write_sites_csv(create(&args.out_dir, "sites.csv")?)
        .map_err(|e| e.to_string())?;

    println!(
        "n = {}, regime = {}, margin = {}",
        report.lattice_size, report.regime, report.margin
    );
    if let Some(u) = &report.u {
        let min = u.iter().copied().fold(f64::INFINITY, f64::min);
        let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("landscape u: min {min:.6e}, max {max:.6e}");
    }
    if let Some(l) = report.eigenvalues.first() {
        println!("min eigenvalue: {l:.6e}");
    }
    if let Some(cert) = &report.certificate {
        println!(
            "series order {}: q = {:.6}, error bound {:.3e}",
            cert.truncation_order, cert.contraction_q, cert.error_bound
        );
    }
    for (name, ok) in &report.checks {
        println!("check {name}: {}", if *ok { "pass" } else { "FAIL" });
    }
    for e in &report.errors {
        println!("note: {e}");
    }
    Ok(exit_for(report.passed))
}

fn load_ensemble_spec(args: &EnsembleArgs) -> Result<EnsembleSpec, String> {
    let text = read_text(&args.config)?;
    let mut spec: EnsembleSpec =
        config::parse_json(&text).map_err(|e| format!("invalid ensemble spec: {e}"))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(order) = args.series_order {
        spec.series_order = order;
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

pub fn cmd_ensemble(args: &EnsembleArgs) -> CmdResult {
    let spec = load_ensemble_spec(args)?;
    let summary: EnsembleSummary = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?
            .install(|| run_ensemble(&spec)),
        None => run_ensemble(&spec),
    }
    .map_err(|e| e.to_string())?;

    write_json(&args.out_dir, "summary.json", &summary)?;
    write_instances_csv(&summary, create(&args.out_dir, "instances.csv")?)
        .map_err(|e| e.to_string())?;

    println!(
        "{} instances: positivity ok {}, bound ok {}, failures {}",
        summary.records.len(),
        summary.positivity_ok_count,
        summary.bound_ok_count,
        summary.failures.len()
    );
    for f in summary.failures.iter().take(10) {
        println!("  instance {}: {}", f.index, f.reason);
    }
    match summary.passed {
        Some(passed) => {
            println!("verdict: {}", if passed { "pass" } else { "FAIL" });
            Ok(exit_for(passed))
        }
        None => {
            println!("verdict: none (violated regime, observations only)");
            Ok(EXIT_OK)
        }
    }
}

pub fn cmd_structure(args: &StructureArgs) -> CmdResult {
    let report = StructureReport::compute(args.n, args.j).map_err(|e| e.to_string())?;
    let perm: Vec<String> = report.permutation.iter().map(usize::to_string).collect();
    let blocks: Vec<String> = report.block_sizes.iter().map(usize::to_string).collect();
    println!("A_{}({})", report.j, report.n);
    println!("permutation: ({})", perm.join(", "));
    println!("block sizes: ({})", blocks.join(", "));
    println!("exact block structure: {}", report.exact_block_structure);
    println!("norm before: {}", report.norm_before);
    println!("norm after:  {}", report.norm_after);
    match report.gap {
        Some(gap) => println!("gap 2 - norm: {gap}"),
        None => println!(
            "gap check failed: {}",
            report.error.as_deref().unwrap_or("")
        ),
    }
    if let Some(dir) = &args.out_dir {
        write_json(dir, "structure.json", &report)?;
    }
    Ok(exit_for(report.passed))
}
