use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggdp::aggregate::solve_r_star_from;
use aggdp::bound::audit;
use aggdp::generators::{counterexample, GeneratorSpec};
use aggdp::io::{
    aggregation_to_json, mdp_to_json, parse_aggregation, parse_mdp, round12, to_json,
    AggregateSolutionJson, BoundAuditJson, SolveReportJson,
};
use aggdp::mdp::{value_iteration_with_limit, DEFAULT_MAX_ITERATIONS};
use aggdp::suite::{run_suite, SuiteConfig, SuiteSummary};
use aggdp::{AggregationArchitecture, BoundAudit, DiscountedMdp};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_INPUT: u8 = 1;
const EXIT_CONVERGENCE: u8 = 2;
const EXIT_BOUND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "aggdp",
    version,
    about = "Aggregation error bounds for discounted MDPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an MDP by value iteration.
    Solve {
        #[arg(long)]
        mdp: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        max_iter: usize,
    },
    /// Solve the aggregate problem for an MDP and an aggregation architecture.
    AggSolve {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        agg: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        max_iter: usize,
    },
    /// Compare the aggregate solution with the exact optimum and the error bound.
    Audit {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        agg: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Exit with status 3 when the observed error exceeds the bound.
        #[arg(long)]
        assert_bound: bool,
    },
    /// Build and audit the two-state counterexample.
    Counterexample {
        #[arg(long, default_value_t = 0.9)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Directory receiving mdp.json, agg.json and audit.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Audit the counterexample over a grid of delta values (CSV output).
    SweepDelta {
        #[arg(long, default_value_t = 0.9)]
        alpha: f64,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
        )]
        grid: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Audit many seeded random instances against the bound.
    Suite {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        max_n: usize,
        /// Also generate instances that may violate the support condition;
        /// they are tallied separately.
        #[arg(long)]
        allow_violations: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Write a generated instance (mdp.json and, when available, agg.json).
    Generate(GenerateArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Counterexample,
    Random,
    Gridworld,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator specification as a JSON document; overrides the flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    kind: Kind,
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    #[arg(long, default_value_t = 3)]
    branching: usize,
    #[arg(long, default_value_t = 3)]
    num_aggregate: usize,
    #[arg(long, default_value_t = 5)]
    width: usize,
    #[arg(long, default_value_t = 5)]
    height: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long)]
    spacing: Option<usize>,
}

impl GenerateArgs {
    fn spec(&self) -> Result<GeneratorSpec, Failure> {
        if let Some(path) = &self.spec {
            return serde_json::from_str(&read(path)?).map_err(|e| Failure::input(path, e));
        }
        Ok(match self.kind {
            Kind::Counterexample => GeneratorSpec::Counterexample {
                alpha: self.alpha,
                delta: self.delta,
            },
            Kind::Random => GeneratorSpec::Random {
                seed: self.seed,
                n: self.n,
                actions_per_state: self.actions,
                branching: self.branching,
                cost_range: (0.0, 10.0),
                alpha: self.alpha,
                num_aggregate: self.num_aggregate,
                enforce_condition: true,
                max_overlap: 1,
            },
            Kind::Gridworld => GeneratorSpec::Gridworld {
                width: self.width,
                height: self.height,
                alpha: self.alpha,
                noise: self.noise,
                target: (self.width, self.height),
                spacing: self.spacing,
            },
        })
    }
}

/// A message for stderr plus the process exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(path: &Path, err: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<aggdp::Error> for Failure {
    fn from(err: aggdp::Error) -> Self {
        let code = match err {
            aggdp::Error::NotConverged { .. } => EXIT_CONVERGENCE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_mdp(path: &Path) -> Result<DiscountedMdp, Failure> {
    parse_mdp(&read(path)?).map_err(|e| Failure::input(path, e))
}

fn load_pair(mdp: &Path, agg: &Path) -> Result<(DiscountedMdp, AggregationArchitecture), Failure> {
    let model = load_mdp(mdp)?;
    let arch =
        parse_aggregation(&read(agg)?, model.num_states()).map_err(|e| Failure::input(agg, e))?;
    let report = arch.validate(model.num_states());
    if !report.is_valid() {
        return Err(Failure::input(agg, report.describe(&arch)));
    }
    Ok((model, arch))
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INPUT,
            message: format!("--tol must be positive, got {tol}"),
        })
    }
}

fn audit_table(audit: &BoundAudit) -> String {
    let mut table = String::from("state        J*          J~       |error|\n");
    for (i, ((j, t), e)) in audit
        .j_star
        .iter()
        .zip(&audit.j_tilde)
        .zip(&audit.per_state_errors)
        .enumerate()
    {
        let _ = writeln!(table, "{:>5} {:>11.6} {:>11.6} {:>11.6}", i + 1, j, t, e);
    }
    let _ = writeln!(
        table,
        "condition {}  epsilon {}  bound {}  actual error {} (state {})  bound satisfied {}",
        if audit.condition_holds {
            "holds"
        } else {
            "violated"
        },
        round12(audit.epsilon),
        round12(audit.bound),
        round12(audit.actual_error),
        audit.worst_state + 1,
        audit.bound_satisfied,
    );
    table
}

fn summary_line(audit: &BoundAudit) -> String {
    format!(
        "epsilon={} bound={} actual_error={} condition_holds={} bound_satisfied={}",
        round12(audit.epsilon),
        round12(audit.bound),
        round12(audit.actual_error),
        audit.condition_holds,
        audit.bound_satisfied
    )
}

fn suite_outcome(summary: &SuiteSummary) -> Result<(), Failure> {
    if summary.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_BOUND,
            message: format!("{} instance(s) exceed the bound", summary.violations.len()),
        })
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve {
            mdp,
            common,
            max_iter,
        } => {
            check_tol(common.tol)?;
            let model = load_mdp(&mdp)?;
            let zero = vec![0.0; model.num_states()];
            let report = value_iteration_with_limit(&model, &zero, common.tol, max_iter)?;
            emit(
                common.out.as_deref(),
                &to_json(&SolveReportJson::new(&model, &report)),
            )
        }
        Command::AggSolve {
            mdp,
            agg,
            common,
            max_iter,
        } => {
            check_tol(common.tol)?;
            let (model, arch) = load_pair(&mdp, &agg)?;
            let zero = vec![0.0; arch.num_aggregate()];
            let sol = solve_r_star_from(&model, &arch, &zero, common.tol, max_iter)?;
            emit(
                common.out.as_deref(),
                &to_json(&AggregateSolutionJson::from(&sol)),
            )
        }
        Command::Audit {
            mdp,
            agg,
            common,
            assert_bound,
        } => {
            check_tol(common.tol)?;
            let (model, arch) = load_pair(&mdp, &agg)?;
            let result = audit(&model, &arch, common.tol)?;
            emit(
                common.out.as_deref(),
                &to_json(&BoundAuditJson::from(&result)),
            )?;
            eprint!("{}", audit_table(&result));
            if assert_bound && !result.bound_satisfied {
                return Err(Failure {
                    code: EXIT_BOUND,
                    message: "observed error exceeds the bound".into(),
                });
            }
            Ok(())
        }
        Command::Counterexample {
            alpha,
            delta,
            out,
            tol,
        } => {
            check_tol(tol)?;
            let (model, arch) = counterexample(alpha, delta)?;
            let result = audit(&model, &arch, tol)?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| Failure::input(&dir, e))?;
                write(&dir.join("mdp.json"), &mdp_to_json(&model))?;
                write(&dir.join("agg.json"), &aggregation_to_json(&arch))?;
                write(
                    &dir.join("audit.json"),
                    &to_json(&BoundAuditJson::from(&result)),
                )?;
            }
            println!("{}", summary_line(&result));
            Ok(())
        }
        Command::SweepDelta {
            alpha,
            grid,
            common,
        } => {
            check_tol(common.tol)?;
            let mut csv =
                String::from("delta,epsilon,bound,actual_error,condition_holds,bound_satisfied\n");
            for delta in grid {
                let (model, arch) = counterexample(alpha, delta)?;
                let a = audit(&model, &arch, common.tol)?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    round12(delta),
                    round12(a.epsilon),
                    round12(a.bound),
                    round12(a.actual_error),
                    a.condition_holds,
                    a.bound_satisfied
                );
            }
            emit(common.out.as_deref(), &csv)
        }
        Command::Suite {
            count,
            seed,
            max_n,
            allow_violations,
            common,
        } => {
            check_tol(common.tol)?;
            let summary = run_suite(&SuiteConfig {
                count,
                seed,
                max_n,
                tol: common.tol,
                allow_violations,
            })?;
            emit(common.out.as_deref(), &to_json(&summary))?;
            suite_outcome(&summary)
        }
        Command::Generate(args) => {
            let (model, arch) = args.spec()?.generate()?;
            fs::create_dir_all(&args.out).map_err(|e| Failure::input(&args.out, e))?;
            write(&args.out.join("mdp.json"), &mdp_to_json(&model))?;
            if let Some(arch) = arch {
                write(&args.out.join("agg.json"), &aggregation_to_json(&arch))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
