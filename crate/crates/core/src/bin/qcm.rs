use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcm_core::expr::{self, EvalOptions, EvalReport, Mode};
use qcm_core::qcm::{EnsembleStore, DEFAULT_DEN_FLOOR};
use qcm_core::selftest;
use qcm_core::{Scalar, Wide};

/// Evaluate arithmetic through simulated qubit-ensemble circuits.
#[derive(Debug, Parser)]
#[command(name = "qcm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an expression and compare it with the floating-point result.
    Eval(EvalArgs),
    /// Evaluate an expression and write its gate trace as JSON lines.
    Trace(EvalArgs),
    /// Evaluate an expression and estimate the result from finite samples.
    Estimate(EvalArgs),
    /// Run the acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F64,
    Wide,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Expression over numbers with + - * / ^ and parentheses.
    #[arg(allow_hyphen_values = true)]
    expr: String,
    /// Read out exact probabilities or sample them.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Measurements per ensemble in sampled mode.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    /// Seed of the ChaCha8 sampling generator; generated and reported on
    /// stderr when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Confidence level of the sampled interval.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Re-encode intermediate results.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    renorm: Switch,
    /// Write the gate trace (JSON lines) to this file.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Print a single JSON object instead of text.
    #[arg(long)]
    json: bool,
    /// Smallest denominator magnitude accepted when decoding.
    #[arg(long, default_value_t = DEFAULT_DEN_FLOOR)]
    den_floor: f64,
    /// Scalar type of the simulation.
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Run only this criterion.
    #[arg(long)]
    only: Option<u8>,
    /// Print results as a JSON array.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Eval(args) => eval(args, None),
        Command::Estimate(args) => eval(args, Some(ModeArg::Sampled)),
        Command::Trace(args) => trace(args),
        Command::Selftest(args) => return selftest(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn options(args: &EvalArgs, forced: Option<ModeArg>) -> EvalOptions {
    let mode = match forced.or(args.mode).unwrap_or(ModeArg::Exact) {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Sampled => {
            let seed = args.seed.unwrap_or_else(|| {
                let seed = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_nanos() as u64)
                    .unwrap_or_default();
                eprintln!("seed: {seed}");
                seed
            });
            Mode::Sampled {
                shots: args.shots,
                seed,
            }
        }
    };
    EvalOptions {
        mode,
        renorm: args.renorm == Switch::On,
        level: args.level,
    }
}

/// Evaluates on a fresh store of scalar `T`, returning the report and the
/// trace as JSON lines.
fn run<T: Scalar>(
    args: &EvalArgs,
    opts: &EvalOptions,
) -> Result<(EvalReport, String), Box<dyn std::error::Error>> {
    let e = expr::parse(&args.expr)?;
    let mut store = EnsembleStore::<T>::with_den_floor(args.den_floor)?;
    let report = expr::evaluate(&e, &mut store, opts)?;
    Ok((report, store.trace_jsonl()))
}

fn run_any(
    args: &EvalArgs,
    opts: &EvalOptions,
) -> Result<(EvalReport, String), Box<dyn std::error::Error>> {
    match args.precision {
        Precision::F64 => run::<f64>(args, opts),
        Precision::Wide => run::<Wide>(args, opts),
    }
}

fn write_trace_file(path: &PathBuf, jsonl: &str) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(jsonl.as_bytes())?;
    out.flush()
}

fn eval(args: EvalArgs, forced: Option<ModeArg>) -> CliResult {
    let opts = options(&args, forced);
    let (report, jsonl) = run_any(&args, &opts)?;
    if let Some(path) = &args.trace {
        write_trace_file(path, &jsonl)?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string(&report)?)?;
    } else {
        print_report(&mut out, &report)?;
    }
    Ok(())
}

fn print_report(out: &mut impl Write, r: &EvalReport) -> io::Result<()> {
    writeln!(out, "expression      {}", r.expr)?;
    writeln!(out, "exact           {}", r.exact)?;
    writeln!(out, "circuit         {}", r.circuit)?;
    writeln!(out, "abs error       {:.3e}", r.abs_err)?;
    writeln!(out, "rel error       {:.3e}", r.rel_err)?;
    writeln!(out, "physical gates  {}", r.physical_gates)?;
    writeln!(out, "clones          {}", r.clones)?;
    writeln!(out, "renormalized    {}", r.renorms)?;
    writeln!(
        out,
        "|num|, |den|    {:.6e}, {:.6e}",
        r.num_magnitude, r.den_magnitude
    )?;
    if let Some(est) = &r.estimate {
        writeln!(
            out,
            "estimate        {} ({}% CI [{}, {}], {} shots, seed {})",
            est.point,
            est.level * 100.0,
            est.ci[0],
            est.ci[1],
            est.shots,
            est.seed
        )?;
    }
    Ok(())
}

fn trace(args: EvalArgs) -> CliResult {
    let opts = options(&args, None);
    let (_, jsonl) = run_any(&args, &opts)?;
    match &args.trace {
        Some(path) => write_trace_file(path, &jsonl)?,
        None => io::stdout().lock().write_all(jsonl.as_bytes())?,
    }
    Ok(())
}

fn selftest(args: SelftestArgs) -> ExitCode {
    let results = match args.only {
        Some(id) => match selftest::run(id) {
            Some(r) => vec![r],
            None => {
                eprintln!(
                    "error: no criterion {id} (1..={})",
                    selftest::CRITERIA.len()
                );
                return ExitCode::from(2);
            }
        },
        None => selftest::run_all(),
    };
    if args.json {
        match serde_json::to_string(&results) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    } else {
        for r in &results {
            println!("{r}");
        }
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if !args.json {
        println!("{} passed, {failed} failed", results.len() - failed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
