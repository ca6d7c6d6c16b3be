use std::fs::{self, File};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use cstar_modular::harness::{
    run_demo, run_integral_demo, run_integral_scenario, run_scenario, Demo, Kind, Overrides, Report, Scenario,
    Solution, EXIT_CONFIG,
};
use cstar_modular::integral_solver::write_solution_csv;
use cstar_modular::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cstar-mm",
    version,
    about = "Checks and solvers for C*-algebra-valued modular metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config of any kind.
    Run(RunArgs),
    CheckAxioms(RunArgs),
    CheckClass(RunArgs),
    CheckContraction(RunArgs),
    FindFixedPoint(RunArgs),
    SolveIntegral(RunArgs),
    /// Run a prepackaged scenario with seed 0.
    Demo {
        name: String,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit wall-clock time and timestamp so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
    /// Write the solution grid function as `t,x` rows (integral scenarios).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn load(args: &RunArgs, expected: Option<Kind>) -> Result<Scenario> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let scenario = Scenario::parse(&text)?.apply(Overrides {
        seed: args.seed,
        samples: args.samples,
        tol: args.tol,
    })?;
    if let Some(k) = expected {
        if scenario.kind != k {
            return Err(Error::Config(format!(
                "kind: this command runs '{k}', config has '{}'",
                scenario.kind
            )));
        }
    }
    Ok(scenario)
}

fn execute(command: &Command) -> Result<(Report, Solution, &OutputArgs)> {
    let (args, kind) = match command {
        Command::Demo { name, out } => {
            let demo: Demo = name.parse()?;
            if demo == Demo::IntegralCanonical {
                let (report, grid, x) = run_integral_demo();
                return Ok((report, x.map(|x| (grid, x)), out));
            }
            return Ok((run_demo(demo), None, out));
        }
        Command::Run(a) => (a, None),
        Command::CheckAxioms(a) => (a, Some(Kind::Axioms)),
        Command::CheckClass(a) => (a, Some(Kind::CstarClass)),
        Command::CheckContraction(a) => (a, Some(Kind::Contraction)),
        Command::FindFixedPoint(a) => (a, Some(Kind::FixedPoint)),
        Command::SolveIntegral(a) => (a, Some(Kind::Integral)),
    };
    let scenario = load(args, kind)?;
    if scenario.kind == Kind::Integral {
        let (report, x) = run_integral_scenario(&scenario)?;
        return Ok((report, x, &args.out));
    }
    Ok((run_scenario(&scenario)?, None, &args.out))
}

fn emit(mut report: Report, solution: Solution, out: &OutputArgs, started: Instant) -> std::io::Result<()> {
    if !out.no_timestamp {
        report.wall_clock_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        report.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    let text = report.to_json();
    match &out.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let (Some(path), Some((grid, x))) = (&out.csv, solution) {
        write_solution_csv(File::create(path)?, &grid, &x).map_err(std::io::Error::other)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match execute(&cli.command) {
        Ok((report, solution, out)) => {
            let code = report.exit_code();
            if let Err(e) = emit(report, solution, out, started) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
