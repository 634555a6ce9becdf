use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use hyperpath::campaign::{enumerate_check_with_progress, CampaignConfig, Mode};
use hyperpath::io::{instance_to_json, parse_instance, parse_result, ResultFile};
use hyperpath::router::route_with_budget;
use hyperpath::solvers::SolverBudget;
use hyperpath::Error;

const EXIT_PARSE: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_BUDGET: u8 = 4;

/// Disjoint fault-free path routing in hypercubes.
#[derive(Parser)]
#[command(name = "hyperpath", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route an instance file and write the result file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check a result file against its instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        result: PathBuf,
    },
    /// Route and verify many instances.
    Campaign {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "randomized")]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// 0 picks one per CPU.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Fault count in randomized mode; defaults to 2n-2k-3.
        #[arg(long)]
        faults: Option<usize>,
        /// Summary file; defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Where a failing instance is written.
        #[arg(long, default_value = "counterexample.json")]
        counterexample: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = SolverBudget::default().node_limit)]
    node_limit: u64,
    #[arg(long, default_value_t = SolverBudget::default().max_dimension)]
    max_base_dim: u32,
}

impl BudgetArgs {
    fn budget(&self) -> SolverBudget {
        SolverBudget {
            max_dimension: self.max_base_dim,
            node_limit: self.node_limit,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::InvalidDimension(_)
        | Error::VertexOutOfRange { .. } => EXIT_PARSE,
        Error::Precondition(_) | Error::ExceptionCase | Error::NoValidDimension => EXIT_HYPOTHESIS,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_VERIFY,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(
    input: &PathBuf,
    output: Option<&PathBuf>,
    budget: SolverBudget,
) -> Result<ExitCode, Error> {
    let inst = parse_instance(&read(input)?)?;
    let (ps, trace) = route_with_budget(&inst, &budget)?;
    let result = ResultFile::new(&inst, &ps, &trace);
    write(output, &result.to_json())?;
    Ok(if result.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}

fn verify(input: &PathBuf, result: &PathBuf) -> Result<ExitCode, Error> {
    let inst = parse_instance(&read(input)?)?;
    let res = parse_result(&read(result)?)?;
    let report = res.verify(&inst);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable")
    );
    for f in &report.failures {
        eprintln!("violation: {f}");
    }
    Ok(if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}

fn campaign(
    cfg: &CampaignConfig,
    output: Option<&PathBuf>,
    counterexample: &PathBuf,
) -> Result<ExitCode, Error> {
    let start = Instant::now();
    eprintln!(
        "campaign n={} k={} mode={} seed={}",
        cfg.n, cfg.k, cfg.mode, cfg.seed
    );
    let summary = enumerate_check_with_progress(cfg, &|done, total| eprintln!("  {done}/{total}"))?;
    eprintln!(
        "pass={} fail={} fallback={} ({:.2}%) in {:.2}s",
        summary.pass,
        summary.fail,
        summary.fallback,
        100.0 * summary.fallback_rate(),
        start.elapsed().as_secs_f64()
    );
    write(
        output,
        &(serde_json::to_string_pretty(&summary).expect("serializable") + "\n"),
    )?;
    if let Some(failure) = &summary.first_failure {
        eprintln!("instance {} failed: {}", failure.index, failure.error);
        if let Some(inst) = &failure.instance {
            write(Some(counterexample), &instance_to_json(inst))?;
            eprintln!("counterexample written to {}", counterexample.display());
        }
        return Ok(ExitCode::from(EXIT_VERIFY));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.command {
        Command::Solve {
            input,
            output,
            budget,
        } => solve(input, output.as_ref(), budget.budget()),
        Command::Verify { input, result } => verify(input, result),
        Command::Campaign {
            n,
            k,
            mode,
            samples,
            seed,
            workers,
            faults,
            output,
            counterexample,
            budget,
        } => {
            let cfg = CampaignConfig {
                n: *n,
                k: *k,
                mode: *mode,
                samples: *samples,
                seed: *seed,
                workers: *workers,
                faults: *faults,
                oracle: false,
                budget: budget.budget(),
            };
            campaign(&cfg, output.as_ref(), counterexample)
        }
    };
    res.unwrap_or_else(fail)
}
