use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use sse_core::baselines::DEFAULT_CAP;
use sse_core::experiment::{run_experiments, run_method, to_csv, write_outputs, ExperimentSpec, Method, Row, Status};
use sse_core::pbvi::{exploitability_bound, SolverConfig};
use sse_core::{benchmarks, Game, SseError};

#[derive(Parser)]
#[command(name = "sse", version, about = "Strong Stackelberg equilibria in leader-follower stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one game with one method.
    Solve {
        /// Game JSON file, or the name of a built-in benchmark.
        #[arg(long)]
        game: String,
        #[arg(long, default_value = "H")]
        method: Method,
        /// Overrides the horizon stored in the game.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Wall-clock budget in seconds for the point-based solvers.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Cap on enumerated deterministic policies for LP and MILP.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
    },
    /// Run a benchmark suite and write results.csv, manifest.json and policies/.
    Bench {
        #[arg(long, default_value = "table1")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset of benchmarks.
        #[arg(long, value_delimiter = ',')]
        benchmarks: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Write wall-clock times into the CSV (makes it non-reproducible).
        #[arg(long)]
        record_times: bool,
    },
    /// Evaluate the exploitability bound for a truncated discounted game.
    Bound {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        sigma: f64,
    },
    /// Write a built-in benchmark as a game JSON file.
    Export {
        #[arg(long)]
        benchmark: String,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_game(spec: &str, horizon: Option<usize>) -> anyhow::Result<Game> {
    if horizon == Some(0) {
        bail!("horizon must be at least 1");
    }
    let path = Path::new(spec);
    if path.exists() {
        let g = Game::load(path).with_context(|| format!("loading {spec}"))?;
        return Ok(match horizon {
            Some(h) => g.with_horizon(h),
            None => g,
        });
    }
    if !benchmarks::NAMES.contains(&spec) && spec != "tiger" {
        bail!("'{spec}' is neither a game file nor one of {:?}", benchmarks::NAMES);
    }
    // Centipede's state space grows with the horizon, so builtins are rebuilt.
    Ok(benchmarks::build(spec, horizon.unwrap_or(1))?)
}

fn exit_for(status: Status) -> ExitCode {
    match status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Capacity => ExitCode::from(2),
        Status::Budget => ExitCode::from(3),
        Status::Error => ExitCode::FAILURE,
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve {
            game,
            method,
            horizon,
            seed,
            out,
            budget,
            threads,
            cap,
        } => {
            let g = load_game(&game, horizon)?;
            let cfg = SolverConfig {
                seed,
                pool_size: threads,
                budget: budget.map(Duration::from_secs_f64),
                ..SolverConfig::default()
            };
            cfg.validate()?;
            let outcome = run_method(&g, method, &cfg, cap);
            if let Some(msg) = &outcome.message {
                log::warn!("{msg}");
            }
            let status = outcome.status;
            let rows = vec![Row {
                benchmark: g.name.clone(),
                horizon: g.horizon,
                outcome,
            }];
            print!("{}", to_csv(&rows, true)?);
            if let Some(dir) = out {
                let spec = ExperimentSpec {
                    benchmarks: vec![g.name.clone()],
                    horizons: vec![g.horizon],
                    methods: vec![method],
                    config: cfg,
                    out: Some(dir.clone()),
                    repetitions: 1,
                    record_times: true,
                    enumeration_cap: cap,
                };
                write_outputs(&dir, &spec, &rows)?;
                g.save(dir.join("game.json"))?;
            }
            Ok(exit_for(status))
        }
        Command::Bench {
            suite,
            seed,
            out,
            benchmarks,
            horizons,
            methods,
            repetitions,
            threads,
            record_times,
        } => {
            if suite != "table1" {
                bail!("unknown suite '{suite}'; available: table1");
            }
            let mut spec = ExperimentSpec::table1(seed);
            if let Some(b) = benchmarks {
                spec.benchmarks = b;
            }
            if let Some(h) = horizons {
                spec.horizons = h;
            }
            if let Some(m) = methods {
                spec.methods = m;
            }
            spec.repetitions = repetitions;
            spec.record_times = record_times;
            spec.config.pool_size = threads;
            spec.out = Some(out.clone());
            let rows = run_experiments(&spec)?;
            let failed = rows.iter().filter(|r| r.outcome.status != Status::Ok).count();
            eprintln!("{} rows written to {} ({failed} marked ---)", rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bound { m, gamma, horizon, sigma } => {
            println!("{:.12e}", exploitability_bound(m, gamma, horizon, sigma)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Export { benchmark, horizon, out } => {
            benchmarks::build(&benchmark, horizon)?.save(&out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Exit code 2 is reserved for capacity errors, so usage errors exit with 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::FAILURE;
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<SseError>() {
                Some(SseError::Capacity(_)) => ExitCode::from(2),
                Some(SseError::Budget(_)) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
