use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use smc_lab::experiments::{
    builtin, builtins, design_report, emit_plot_data, export_csv, parse_scenario, run_counterexample, run_scenario,
    CoupledBase, PlotLayout, Scenario, BUILTIN_NAMES,
};
use smc_lab::{CraneParams, Error, IntegratorConfig, StateVector, Status};

const EXIT_OTHER: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_SINGULAR_GAIN: u8 = 3;
const EXIT_UNDERFLOW: u8 = 4;
const EXIT_CONFIG: u8 = 5;
const EXIT_DESIGN: u8 = 6;

#[derive(Parser)]
#[command(name = "smc-lab", version, about = "Sliding-mode control verification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the builtin scenarios.
    List,
    /// Run one builtin scenario, or a scenario file with --config.
    Run {
        scenario: Option<String>,
        #[arg(long, conflicts_with = "scenario")]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run every builtin scenario concurrently.
    RunAll {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Solve the sliding-surface parameters for a target cubic s^3 + d1 s^2 + d2 s + d3.
    Design {
        #[arg(allow_negative_numbers = true)]
        d1: f64,
        #[arg(allow_negative_numbers = true)]
        d2: f64,
        #[arg(allow_negative_numbers = true)]
        d3: f64,
    },
    /// Drive the coupled two-chain plant and report how well x1 - k x3 is conserved.
    Counterexample {
        #[arg(allow_negative_numbers = true)]
        k: f64,
        /// zero | sin | cos | const:<v> | ihssmc
        profile: String,
        /// Initial state as four comma-separated numbers.
        #[arg(long, default_value = "1,0,0,0", allow_hyphen_values = true)]
        y0: String,
        #[arg(long, value_enum, default_value_t = BaseArg::Degenerate)]
        base: BaseArg,
        #[command(flatten)]
        tol: TolOpts,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Degenerate,
    Crane,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Four,
    Six,
}

#[derive(Args, Clone, Default)]
struct TolOpts {
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    diverge_norm: Option<f64>,
}

impl TolOpts {
    fn apply(&self, cfg: &mut IntegratorConfig) {
        if let Some(v) = self.rtol {
            cfg.rtol = v;
        }
        if let Some(v) = self.atol {
            cfg.atol = v;
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.h_max {
            cfg.h_max = v;
            cfg.h_init = cfg.h_init.min(v);
        }
        if let Some(v) = self.diverge_norm {
            cfg.diverge_norm = v;
        }
    }
}

#[derive(Args, Clone)]
struct RunOpts {
    #[command(flatten)]
    tol: TolOpts,
    /// Directory for CSV and plot files.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write plot data files and a gnuplot script.
    #[arg(long)]
    plot: bool,
    /// Plot layout; defaults to six panels for the aggregated law, four otherwise.
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParams(_) => EXIT_CONFIG,
        Error::SingularGain { .. } => EXIT_SINGULAR_GAIN,
        Error::SingularDesign(_)
        | Error::Uncontrollable { .. }
        | Error::PolesNotConjugate
        | Error::DegenerateRouth { .. }
        | Error::ZeroCoupling => EXIT_DESIGN,
        _ => EXIT_OTHER,
    }
}

fn status_code(s: &Status) -> u8 {
    match s {
        Status::Completed => 0,
        Status::Diverged { .. } => EXIT_DIVERGED,
        Status::SingularGain { .. } => EXIT_SINGULAR_GAIN,
        Status::StepUnderflow { .. } => EXIT_UNDERFLOW,
    }
}

fn parse_y0(text: &str) -> Result<StateVector, Error> {
    let v: Vec<f64> = text
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad initial state `{text}`")))?;
    let arr: [f64; 4] = v.try_into().map_err(|_| Error::Config("initial state needs four components".into()))?;
    Ok(StateVector::from_array(arr))
}

fn run_one(mut scenario: Scenario, opts: &RunOpts) -> Result<Status, Error> {
    opts.tol.apply(&mut scenario.integrator);
    let (traj, metrics) = run_scenario(&scenario)?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let csv = opts.out_dir.join(format!("{}.csv", scenario.name));
    export_csv(&traj, &csv)?;
    if opts.plot {
        let layout = match opts.layout {
            Some(LayoutArg::Four) => PlotLayout::FourPanel,
            Some(LayoutArg::Six) => PlotLayout::SixPanel,
            None => PlotLayout::for_controller(&scenario.controller),
        };
        emit_plot_data(&traj, layout, &opts.out_dir, &scenario.name)?;
    }
    let mut text =
        format!("scenario = {}\nstatus = {}\nsamples = {}\n", scenario.name, traj.status.token(), traj.len());
    text.push_str(&metrics.to_text(&scenario.metrics));
    text.push_str(&format!("csv = {}\n", csv.display()));
    print!("{text}");
    info!("{}: {} accepted, {} rejected steps", scenario.name, traj.stats.accepted, traj.stats.rejected);
    Ok(traj.status)
}

fn load(name: Option<&str>, config: Option<&Path>) -> Result<Scenario, Error> {
    match (name, config) {
        (_, Some(path)) => parse_scenario(&std::fs::read_to_string(path)?),
        (Some(n), None) => builtin(n).ok_or_else(|| Error::Config(format!("unknown scenario `{n}`"))),
        (None, None) => Err(Error::Config("give a scenario name or --config".into())),
    }
}

fn execute(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::List => {
            for s in builtins() {
                println!("{:<22} {} / {}", s.name, s.plant.name(), s.controller.name());
            }
            Ok(0)
        }
        Command::Run { scenario, config, opts } => {
            let s = load(scenario.as_deref(), config.as_deref())?;
            Ok(status_code(&run_one(s, &opts)?))
        }
        Command::RunAll { opts } => {
            let results: Vec<(&str, Result<Status, Error>)> = std::thread::scope(|scope| {
                let handles: Vec<_> = BUILTIN_NAMES
                    .iter()
                    .map(|&n| {
                        let opts = &opts;
                        (n, scope.spawn(move || run_one(builtin(n).expect("builtin exists"), opts)))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|(n, h)| (n, h.join().unwrap_or_else(|_| Err(Error::Config("worker panicked".into())))))
                    .collect()
            });
            let mut code = 0;
            for (name, r) in results {
                let c = match r {
                    Ok(s) => status_code(&s),
                    Err(e) => {
                        warn!("{name}: {e}");
                        eprintln!("{name}: {e}");
                        error_code(&e)
                    }
                };
                code = code.max(c);
            }
            Ok(code)
        }
        Command::Design { d1, d2, d3 } => {
            print!("{}", design_report(d1, d2, d3)?);
            Ok(0)
        }
        Command::Counterexample { k, profile, y0, base, tol, out_dir } => {
            let base = match base {
                BaseArg::Degenerate => CoupledBase::Degenerate,
                BaseArg::Crane => CoupledBase::Crane(CraneParams::default()),
            };
            let mut cfg = IntegratorConfig::default();
            tol.apply(&mut cfg);
            let report = run_counterexample(k, parse_y0(&y0)?, &profile, base, &cfg)?;
            print!("{report}");
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)?;
                export_csv(&report.trajectory, &dir.join("counterexample.csv"))?;
            }
            Ok(status_code(&report.trajectory.status))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
