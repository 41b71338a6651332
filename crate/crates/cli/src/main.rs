use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use heurstop::diagnostics::{
    jacobian_svd, muckenhoupt_constant, regularity_constant, tcc_ratio, FilterSpec,
};
use heurstop::experiment::{
    emit_csv, emit_series, run_experiment_with, summarize, summary_table, ExperimentConfig,
};
use heurstop::noise::add_noise;
use heurstop::par::Execution;
use heurstop::problems::PROBLEM_NAMES;
use heurstop::{operator_gates, problem_by_name, Error};

/// Environment variable overriding the configured output directory.
const OUT_DIR_ENV: &str = "HEURSTOP_OUT_DIR";

const TCC_RADIUS: f64 = 0.1;
const TCC_SAMPLES: usize = 200;
const SIGMA_HEAD: usize = 8;

#[derive(Parser)]
#[command(name = "heurstop", version, about = "Heuristic stopping rules for nonlinear Landweber iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the report plus per-run series files.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and $HEURSTOP_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep and write only the report.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print spectral and tangential-cone diagnostics as JSON.
    Diagnose {
        problem: String,
        #[arg(long, value_enum, default_value_t = At::Dagger)]
        at: At,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the adjoint and finite-difference gates.
    Check {
        problem: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// List the registered problems.
    ListProblems,
}

#[derive(Clone, Copy, ValueEnum)]
enum At {
    Dagger,
    X0,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownProblem(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn output_dir(cfg: &ExperimentConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.clone())
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::from_file(path).map_err(|e| Failure::Config(e.to_string()))
}

fn sweep(config: &Path, out: Option<PathBuf>, series: bool) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let dir = output_dir(&cfg, out);
    let report = run_experiment_with(&cfg, |cell| {
        if series {
            let name = format!("{}_d{}_s{}.csv", cfg.problem, cell.delta_index, cell.seed);
            emit_series(&cell.trace, cell.delta_abs, cell.tau, &dir.join("series").join(name))?;
        }
        Ok(())
    })?;
    let csv = dir.join(format!("{}.csv", cfg.problem));
    emit_csv(&report, &csv)?;
    print!("{}", summary_table(&summarize(&report)));
    println!("report: {}", csv.display());
    for f in &report.failures {
        eprintln!("failed cell delta_rel={} seed={}: {}", f.delta_rel, f.seed, f.message);
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{} cell(s) failed", report.failures.len())))
    }
}

fn diagnose(problem: &str, at: At, n: Option<usize>) -> Result<(), Failure> {
    let p = problem_by_name(problem, n)?;
    let b = p.benchmark();
    let x = match at {
        At::Dagger => &b.x_dagger,
        At::X0 => &b.x0,
    };
    let svd = jacobian_svd(p.as_ref(), x, Execution::Parallel)?;
    let y = p.exact_data()?;
    let (y_delta, _) = add_noise(&y, b.delta_rel_list[0], 0)?;
    let ss = svd.singular_system(&y_delta.sub(&y), &b.x_dagger.sub(&b.x0))?.normalized();
    let mc = |p| muckenhoupt_constant(&ss, p, &ss.muckenhoupt_grid());
    let rc = |p| regularity_constant(&ss, p, FilterSpec::Landweber, &ss.regularity_grid());
    let tcc = tcc_ratio(p.as_ref(), x, TCC_RADIUS, TCC_SAMPLES, 0, Execution::Parallel)?;
    let report = json!({
        "problem": p.name(),
        "at": match at { At::Dagger => "dagger", At::X0 => "x0" },
        "eta_max": tcc.eta_max,
        "muckenhoupt": { "p1": mc(1)?.constant, "p2": mc(2)?.constant },
        "regularity": { "p1": rc(1)?.constant, "p2": rc(2)?.constant },
        "sigma_head": &svd.sigma[..svd.rank().min(SIGMA_HEAD)],
        "condition_number": svd.condition_number(),
        "rank": svd.rank(),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
    Ok(())
}

fn check(problem: &str, n: Option<usize>) -> Result<(), Failure> {
    let p = problem_by_name(problem, n)?;
    let g = operator_gates(p.as_ref(), 5, 0)?;
    println!("{:<12} {:>14} {:>14}", "point", "adjoint", "fd");
    for pt in &g.points {
        println!("{:<12} {:>14.3e} {:>14.3e}", pt.label, pt.adjoint_mismatch, pt.fd_rel_err);
    }
    println!("tolerances: adjoint {:e}, fd {:e}", g.adjoint_tolerance, g.fd_tolerance);
    if g.passed() {
        println!("{problem}: PASS");
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{problem}: gates failed")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => sweep(&config, out, true),
        Command::Sweep { config, out } => sweep(&config, out, false),
        Command::Diagnose { problem, at, n } => diagnose(&problem, at, n),
        Command::Check { problem, n } => check(&problem, n),
        Command::ListProblems => {
            for name in PROBLEM_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
