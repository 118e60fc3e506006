use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zigfast::alias::AliasTable;
use zigfast::bench::run_bench;
use zigfast::format::{deserialize_tables, serialize_tables, TableFormat};
use zigfast::pathstats::run_pathstats;
use zigfast::quality::run_quality;
use zigfast::tables::{overhang_areas, verify_tables, DEFAULT_TOLERANCE};
use zigfast::uniform::{entropy_seed, seed_from_env};
use zigfast::{solve_layers, Algorithm, Distribution, Generator};

/// Exit status for a completed run whose statistics failed.
const EXIT_STATISTICAL: u8 = 1;
/// Exit status for bad arguments, I/O or construction failures.
const EXIT_OPERATIONAL: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "zigfast",
    version,
    about = "Ziggurat exponential and normal variates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build layer tables, print their summary and optionally write them.
    Tables(TablesArgs),
    /// Check a table file against independent quadrature.
    Verify(VerifyArgs),
    /// Stream variates.
    Gen(GenArgs),
    /// Compare the first five raw moments with their exact values.
    Quality(QualityArgs),
    /// Time modified against traditional sampling.
    Bench(BenchArgs),
    /// Count which branch each draw leaves through.
    Pathstats(PathArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    F64le,
    Json,
    Bin,
}

#[derive(Debug, Args)]
struct Common {
    /// exp or normal.
    #[arg(long, value_parser = parse_distribution, default_value = "exp")]
    dist: Distribution,
    /// Seed; falls back to ZIGFAST_SEED, then to an entropy seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TablesArgs {
    #[arg(long, value_parser = parse_distribution, default_value = "exp")]
    dist: Distribution,
    #[arg(long, default_value_t = 256)]
    imax: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or bin for the written file.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Table file, JSON or binary.
    path: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(short = 'n', long = "n", default_value_t = 10)]
    n: u64,
    #[arg(long, value_parser = parse_algorithm, default_value = "modified")]
    algo: Algorithm,
    /// text (17 significant digits per line) or f64le.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QualityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(short = 'n', long = "n", default_value_t = 100_000_000)]
    n: u64,
    #[arg(long, value_parser = parse_algorithm, default_value = "modified")]
    algo: Algorithm,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// text or json.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(short = 'n', long = "n", default_value_t = 100_000_000)]
    n: u64,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Algorithms to time; both by default.
    #[arg(long, value_parser = parse_algorithm, value_delimiter = ',')]
    algo: Vec<Algorithm>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PathArgs {
    #[command(flatten)]
    common: Common,
    #[arg(short = 'n', long = "n", default_value_t = 10_000_000)]
    n: u64,
    #[arg(long, value_parser = parse_algorithm, default_value = "modified")]
    algo: Algorithm,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_distribution(s: &str) -> Result<Distribution, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

/// A failure that maps to an exit status.
#[derive(Debug)]
enum Failure {
    Statistical(String),
    Operational(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Operational(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn operational(msg: impl Into<String>) -> Failure {
    Failure::Operational(msg.into())
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    if let Some(seed) = seed {
        return Ok(seed);
    }
    match seed_from_env() {
        Ok(Some(seed)) => Ok(seed),
        Ok(None) => Ok(entropy_seed()),
        Err(e) => Err(operational(e.to_string())),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(fs::File::create(p).map_err(|e| {
                operational(format!("cannot create {}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn report_format(format: Format) -> Result<Format, Failure> {
    match format {
        Format::Text | Format::Json => Ok(format),
        other => Err(operational(format!(
            "reports are text or json, not {other:?}"
        ))),
    }
}

fn write_report<T: serde::Serialize + ?Sized>(
    out: Option<&Path>,
    format: Format,
    text: &str,
    value: &T,
) -> Outcome {
    let mut w = output(out)?;
    match report_format(format)? {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, value).map_err(|e| operational(e.to_string()))?;
            writeln!(w)?;
        }
        _ => writeln!(w, "{text}")?,
    }
    w.flush()?;
    Ok(())
}

fn cmd_tables(args: &TablesArgs) -> Outcome {
    let kind = args.dist.density_kind();
    let tables = solve_layers(kind, args.imax, args.tol).map_err(|e| operational(e.to_string()))?;
    let alias = AliasTable::new(tables.a()).map_err(|e| operational(e.to_string()))?;
    let masses = overhang_areas(&kind, &tables.geometry(), args.tol)
        .map_err(|e| operational(e.to_string()))?;
    let quadrature_mass: f64 = masses.iter().sum();
    let total = tables.slot_area() * tables.i_max() as f64;
    println!("distribution {}", kind.name());
    println!("i_max {}", tables.i_max());
    println!("L_max {}", tables.l_max());
    println!("tail_start {:.17}", tables.tail_start());
    println!(
        "overhang_mass {:.17e} ({:.6} of total)",
        quadrature_mass,
        quadrature_mass / total
    );
    println!("epsilon_max {:.17}", tables.epsilon_max());
    println!("alias_slots {}", alias.len());
    if let Some(path) = &args.out {
        let format = match args.format {
            Format::Json => TableFormat::Json,
            Format::Bin => TableFormat::Binary,
            other => {
                return Err(operational(format!(
                    "table files are json or bin, not {other:?}"
                )))
            }
        };
        fs::write(path, serialize_tables(&tables, format))
            .map_err(|e| operational(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let bytes = fs::read(&args.path)
        .map_err(|e| operational(format!("cannot read {}: {e}", args.path.display())))?;
    let tables = deserialize_tables(&bytes).map_err(|e| operational(e.to_string()))?;
    let violations = verify_tables(&tables, args.tol);
    for v in &violations {
        println!("violation: {v}");
    }
    println!(
        "{} i_max {} L_max {}: {} violations",
        tables.kind().name(),
        tables.i_max(),
        tables.l_max(),
        violations.len()
    );
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Statistical(format!(
            "{} violations",
            violations.len()
        )))
    }
}

fn cmd_gen(args: &GenArgs) -> Outcome {
    let seed = resolve_seed(args.common.seed)?;
    let mut generator = Generator::new(args.common.dist, args.algo, seed);
    let mut w = output(args.out.as_deref())?;
    let mut buf = vec![0.0; 4096];
    let mut left = args.n;
    while left > 0 {
        let take = left.min(buf.len() as u64) as usize;
        let chunk = &mut buf[..take];
        generator.fill(chunk);
        match args.format {
            Format::Text => {
                for v in chunk.iter() {
                    writeln!(w, "{v:.16e}")?;
                }
            }
            Format::F64le => {
                for v in chunk.iter() {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            other => {
                return Err(operational(format!(
                    "gen writes text or f64le, not {other:?}"
                )))
            }
        }
        left -= take as u64;
    }
    w.flush()?;
    Ok(())
}

fn cmd_quality(args: &QualityArgs) -> Outcome {
    report_format(args.format)?;
    let seed = resolve_seed(args.common.seed)?;
    let report = run_quality(args.common.dist, args.algo, args.n, seed, args.jobs);
    write_report(
        args.out.as_deref(),
        args.format,
        &report.to_string(),
        &report,
    )?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Statistical(format!(
            "moment z-score {:.2} exceeds the limit",
            report.max_abs_z()
        )))
    }
}

fn cmd_bench(args: &BenchArgs) -> Outcome {
    report_format(args.format)?;
    let seed = resolve_seed(args.common.seed)?;
    let algorithms = if args.algo.is_empty() {
        vec![Algorithm::Modified, Algorithm::Traditional]
    } else {
        args.algo.clone()
    };
    let reports =
        run_bench(args.common.dist, &algorithms, args.n, args.trials, seed).map_err(operational)?;
    let mut text = String::new();
    for r in &reports {
        text += &format!(
            "{:<11} {:<11} n={} trials={} median={:.4}s throughput={:.3e}/s",
            r.algorithm.name(),
            r.distribution.name(),
            r.n,
            r.trials,
            r.median_seconds,
            r.throughput
        );
        if let Some(s) = r.speedup_vs_baseline {
            text += &format!(" speedup={s:.3}");
        }
        if let Some(t) = r.target_speedup {
            text += &format!(" target={t:.2}");
        }
        text += &format!(" checksum={:.6e}\n", r.checksum);
    }
    write_report(args.out.as_deref(), args.format, text.trim_end(), &reports)
}

fn cmd_pathstats(args: &PathArgs) -> Outcome {
    report_format(args.format)?;
    let seed = resolve_seed(args.common.seed)?;
    let r = run_pathstats(args.common.dist, args.algo, args.n, seed);
    let c = &r.counts;
    let mut text = format!(
        "{} {} n={} seed={}\n\
         common     {:.6} (expected {:.6})\n\
         exceptional {}\n\
         tail       {:.6e}",
        r.algorithm,
        r.distribution,
        r.n,
        r.seed,
        r.common_fraction,
        r.expected_common_fraction,
        c.exceptional,
        r.tail_fraction
    );
    if let Some(e) = r.expected_tail_fraction {
        text += &format!(" (expected {e:.6e})");
    }
    text += &format!(
        "\noverhang attempts {}\nfast accepts {:.6}\nband evaluations {:.6}",
        c.overhang_attempts(),
        r.fast_accept_fraction,
        r.band_fraction
    );
    if let Some(e) = r.expected_band_fraction {
        text += &format!(" (expected {e:.6})");
    }
    write_report(args.out.as_deref(), args.format, &text, &r)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Tables(a) => cmd_tables(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Quality(a) => cmd_quality(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Pathstats(a) => cmd_pathstats(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Statistical(msg)) => {
            eprintln!("zigfast: {msg}");
            ExitCode::from(EXIT_STATISTICAL)
        }
        Err(Failure::Operational(msg)) => {
            eprintln!("zigfast: error: {msg}");
            ExitCode::from(EXIT_OPERATIONAL)
        }
    }
}
