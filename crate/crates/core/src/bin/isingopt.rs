use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isingopt::annealer::{ScheduleKind, SweepOrder, UpdateRule};
use isingopt::cim::DEFAULT_RAMP_STEPS;
use isingopt::cli::formats::{write_bilp_json, write_ising_json, write_lp_text};
use isingopt::cli::{
    generate, run, Engine, GeneratorSpec, Instance, InstanceFormat, InstanceSource, ReportFormat,
    RunConfig, RunError,
};
use isingopt::{AnnealSchedule, NoiseConfig, PenaltyWeights};

#[derive(Parser)]
#[command(
    name = "isingopt",
    version,
    about = "Solve Ising and binary integer programs with stochastic spin engines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file or a generated instance.
    Solve(Box<SolveArgs>),
    /// Write a generated instance to a file.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "anneal")]
    engine: Engine,
    /// Instance file.
    #[arg(
        long,
        conflicts_with = "generate",
        required_unless_present = "generate"
    )]
    input: Option<PathBuf>,
    /// Generator spec, e.g. `knapsack:items=5,seed=3`.
    #[arg(long)]
    generate: Option<String>,
    #[arg(long, value_enum, default_value = "bilp-json")]
    format: InstanceFormat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    report: ReportFormat,
    /// Best-energy trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,

    #[arg(long, default_value_t = 500)]
    sweeps: usize,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 2.0)]
    t_start: f64,
    #[arg(long, default_value_t = 0.05)]
    t_end: f64,
    #[arg(long, value_enum, default_value = "geometric")]
    schedule: ScheduleKind,
    #[arg(long, value_enum, default_value = "gibbs")]
    rule: UpdateRule,
    #[arg(long, value_enum, default_value = "sequential")]
    order: SweepOrder,
    #[arg(long, default_value_t = 0.0)]
    p_input_invert: f64,
    #[arg(long, default_value_t = 0.0)]
    p_output_invert: f64,

    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pump_start: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pump_end: f64,
    #[arg(long, default_value_t = DEFAULT_RAMP_STEPS)]
    ramp_steps: usize,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Injection strength; defaults to 0.5/(sqrt(V) * largest |J| or |h|).
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 10.0)]
    saturation: f64,
    #[arg(long, default_value_t = 10)]
    readout_interval: usize,

    /// Constraint penalty A; requires --penalty-b.
    #[arg(long, requires = "penalty_b")]
    penalty_a: Option<f64>,
    /// Objective weight B; requires --penalty-a.
    #[arg(long, requires = "penalty_a")]
    penalty_b: Option<f64>,
    /// Largest spin count the oracle engine will enumerate.
    #[arg(long, default_value_t = 24)]
    cap: u32,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec, e.g. `maxcut-random:n=12,p=0.5`.
    spec: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format; `ising-json` for max-cut generators, `bilp-json` otherwise.
    #[arg(long, value_enum)]
    format: Option<InstanceFormat>,
    #[arg(long)]
    out: PathBuf,
}

fn solve_config(args: SolveArgs) -> Result<RunConfig, RunError> {
    let config_err = |e: &dyn std::fmt::Display| RunError::Config(e.to_string());
    let source = match (args.input, args.generate) {
        (Some(path), _) => InstanceSource::File {
            path,
            format: args.format,
        },
        (None, Some(spec)) => InstanceSource::Generator {
            spec: GeneratorSpec::parse(&spec, args.seed)?,
        },
        (None, None) => {
            return Err(RunError::Config(
                "one of --input or --generate is required".into(),
            ))
        }
    };
    let mut config = RunConfig::new(args.engine, source, args.seed);
    config.anneal.schedule =
        AnnealSchedule::new(args.t_start, args.t_end, args.sweeps, args.schedule)
            .map_err(|e| config_err(&e))?;
    config.anneal.noise =
        NoiseConfig::new(args.p_input_invert, args.p_output_invert).map_err(|e| config_err(&e))?;
    config.anneal.restarts = args.restarts;
    config.anneal.update_rule = args.rule;
    config.anneal.sweep_order = args.order;
    config.cim.pump_start = args.pump_start;
    config.cim.pump_end = args.pump_end;
    config.cim.ramp_steps = args.ramp_steps;
    config.cim.dt = args.dt;
    config.cim.coupling_strength = args.coupling;
    config.cim.noise_amplitude = args.noise;
    config.cim.saturation = args.saturation;
    config.cim.readout_interval = args.readout_interval;
    if let (Some(a), Some(b)) = (args.penalty_a, args.penalty_b) {
        config.weights = Some(PenaltyWeights::new(a, b).map_err(|e| config_err(&e))?);
    }
    config.oracle_cap = args.cap;
    config.out = args.out;
    config.report_format = args.report;
    config.trace = args.trace;
    Ok(config)
}

fn write_generated(args: GenerateArgs) -> Result<(), RunError> {
    let spec = GeneratorSpec::parse(&args.spec, args.seed)?;
    let instance = generate(&spec)?;
    let format = args.format.unwrap_or(match instance {
        Instance::Ising(_) => InstanceFormat::IsingJson,
        Instance::Bilp(_) => InstanceFormat::BilpJson,
    });
    let text = match (instance, format) {
        (Instance::Ising(model), InstanceFormat::IsingJson) => write_ising_json(&model),
        (Instance::Bilp(bilp), InstanceFormat::BilpJson) => write_bilp_json(&bilp),
        (Instance::Bilp(bilp), InstanceFormat::LpText) => write_lp_text(&bilp),
        (instance, format) => {
            let kind = if matches!(instance, Instance::Ising(_)) {
                "an Ising model"
            } else {
                "a BILP"
            };
            return Err(RunError::Config(format!(
                "generator produces {kind}, which cannot be written as {}",
                format.name()
            )));
        }
    };
    std::fs::write(&args.out, text).map_err(|source| RunError::Io {
        path: args.out.clone(),
        source,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve_config(*args).and_then(|config| run(&config).map(|_| ())),
        Command::Generate(args) => write_generated(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_record());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
