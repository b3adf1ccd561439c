//! The batch pipeline: load or generate → reduce (BILP only) → engine →
//! decode → report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::formats::{parse_instance, Instance, InstanceFormat, ParseError, FORMAT_VERSION};
use super::generate::{generate, GeneratorSpec};
use crate::annealer::{anneal, multistart_greedy, AnnealError, AnnealParams, SolveReport};
use crate::cim::{cim_solve, CimError, CimParams};
use crate::ising::{IsingModel, SpinState};
use crate::oracle::{enumerate_ising, OracleError, DEFAULT_CAP};
use crate::reduction::{
    reduce, BitEncoding, Decoded, PenaltyWeights, ReductionArtifact, ReductionError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Anneal,
    Cim,
    Greedy,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum InstanceSource {
    File {
        path: PathBuf,
        format: InstanceFormat,
    },
    Generator {
        spec: GeneratorSpec,
    },
}

/// One pipeline invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: Engine,
    pub source: InstanceSource,
    pub seed: u64,
    pub anneal: AnnealParams,
    pub cim: CimParams,
    pub oracle_cap: u32,
    pub weights: Option<PenaltyWeights>,
    pub out: Option<PathBuf>,
    pub report_format: ReportFormat,
    pub trace: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(engine: Engine, source: InstanceSource, seed: u64) -> Self {
        Self {
            engine,
            source,
            seed,
            anneal: AnnealParams::default(),
            cim: CimParams::default(),
            oracle_cap: DEFAULT_CAP,
            weights: None,
            out: None,
            report_format: ReportFormat::Json,
            trace: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("reduction error: {0}")]
    Reduction(#[from] ReductionError),
    #[error("engine diverged: {0}")]
    Divergence(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 parse or configuration, 3 reduction, 4 divergence, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) | RunError::Config(_) => 2,
            RunError::Reduction(_) => 3,
            RunError::Divergence(_) => 4,
            RunError::Io { .. } => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Parse(_) => "parse",
            RunError::Config(_) => "config",
            RunError::Reduction(_) => "reduction",
            RunError::Divergence(_) => "divergence",
            RunError::Io { .. } => "io",
        }
    }

    /// One-line JSON record for standard error.
    pub fn to_record(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl From<AnnealError> for RunError {
    fn from(e: AnnealError) -> Self {
        match e {
            AnnealError::NonFiniteEnergy { .. } => RunError::Divergence(e.to_string()),
            other => RunError::Config(other.to_string()),
        }
    }
}

impl From<CimError> for RunError {
    fn from(e: CimError) -> Self {
        match e {
            CimError::Divergence { .. } => RunError::Divergence(e.to_string()),
            other => RunError::Config(other.to_string()),
        }
    }
}

impl From<OracleError> for RunError {
    fn from(e: OracleError) -> Self {
        RunError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    #[serde(flatten)]
    pub source: InstanceSource,
    pub kind: &'static str,
    pub num_vars: Option<usize>,
    pub num_constraints: Option<usize>,
    pub num_spins: usize,
    pub num_couplings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionSummary {
    pub weights: PenaltyWeights,
    pub constant_shift: f64,
    pub num_spins: usize,
    pub num_slack_bits: usize,
    pub bit_map: Vec<BitEncoding>,
    pub slack_map: Vec<BitEncoding>,
}

impl ReductionSummary {
    fn from_artifact(art: &ReductionArtifact) -> Self {
        Self {
            weights: art.weights(),
            constant_shift: art.constant_shift(),
            num_spins: art.num_spins(),
            num_slack_bits: art.num_slack_bits(),
            bit_map: art.bit_map().to_vec(),
            slack_map: art.slack_map().iter().map(|s| s.encoding.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultSummary {
    pub best_state: SpinState,
    pub best_energy: f64,
    pub accepted_flips: u64,
    pub trace_length: usize,
}

/// Everything written for one run. `wall_time_seconds` is the only field
/// that varies between identical invocations.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub engine: Engine,
    pub seed: u64,
    pub instance: InstanceSummary,
    pub params: Value,
    pub reduction: Option<ReductionSummary>,
    pub result: ResultSummary,
    pub decoded: Option<Decoded>,
    pub wall_time_seconds: f64,
    #[serde(skip)]
    pub energy_trace: Vec<f64>,
}

fn json_number(v: f64) -> String {
    serde_json::to_string(&v).expect("finite floats serialize")
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Header plus one row of the scalar fields, numbers printed exactly as
    /// in the JSON report.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(json_number).unwrap_or_default();
        let d = self.decoded.as_ref();
        let mut out = String::from(
            "format_version,engine,seed,num_spins,best_energy,accepted_flips,objective,feasible,violation,wall_time_seconds\n",
        );
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            self.format_version,
            serde_json::to_value(self.engine)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            self.seed,
            self.instance.num_spins,
            json_number(self.result.best_energy),
            self.result.accepted_flips,
            opt(d.map(|d| d.objective)),
            d.map(|d| d.feasible.to_string()).unwrap_or_default(),
            opt(d.map(|d| d.violation)),
            json_number(self.wall_time_seconds),
        );
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }

    /// `step,best_energy` rows for plotting.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,best_energy\n");
        for (k, e) in self.energy_trace.iter().enumerate() {
            let _ = writeln!(out, "{k},{}", json_number(*e));
        }
        out
    }
}

fn read_file(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_instance(source: &InstanceSource) -> Result<Instance, RunError> {
    match source {
        InstanceSource::File { path, format } => Ok(parse_instance(&read_file(path)?, *format)?),
        InstanceSource::Generator { spec } => Ok(generate(spec)?),
    }
}

fn run_engine(model: &IsingModel, config: &RunConfig) -> Result<(SolveReport, Value), RunError> {
    let seed = config.seed;
    Ok(match config.engine {
        Engine::Anneal => {
            let params = AnnealParams {
                seed,
                ..config.anneal
            };
            (anneal(model, &params)?, to_value(&params))
        }
        Engine::Cim => {
            let params = CimParams { seed, ..config.cim };
            let mut value = to_value(&params);
            value["effective_coupling"] = params.effective_coupling(model).into();
            (cim_solve(model, &params)?, value)
        }
        Engine::Greedy => {
            let restarts = config.anneal.restarts;
            (
                multistart_greedy(model, restarts, seed)?,
                serde_json::json!({ "restarts": restarts, "seed": seed }),
            )
        }
        Engine::Oracle => {
            let started = Instant::now();
            let r = enumerate_ising(model, config.oracle_cap)?;
            let best_state = r
                .best_states
                .first()
                .cloned()
                .expect("oracle returns at least one state");
            let report = SolveReport {
                best_state,
                best_energy: r.best_value,
                energy_trace: vec![r.best_value],
                accepted_flips: 0,
                seed,
                wall_time: started.elapsed(),
            };
            let value = serde_json::json!({
                "cap": config.oracle_cap,
                "states_examined": r.states_examined,
                "num_optima": r.best_states.len(),
            });
            (report, value)
        }
    })
}

fn to_value<T: Serialize>(params: &T) -> Value {
    serde_json::to_value(params).expect("parameters serialize")
}

/// Runs the pipeline and returns the report without writing anything.
pub fn execute(config: &RunConfig) -> Result<Report, RunError> {
    let started = Instant::now();
    let instance = load_instance(&config.source)?;
    let (model, artifact, num_vars, num_constraints) = match instance {
        Instance::Ising(model) => (model, None, None, None),
        Instance::Bilp(bilp) => {
            let art = reduce(&bilp, config.weights)?;
            (
                art.ising().clone(),
                Some(art),
                Some(bilp.num_vars()),
                Some(bilp.constraints().len()),
            )
        }
    };

    let (solve, params) = run_engine(&model, config)?;
    let decoded = artifact
        .as_ref()
        .map(|a| a.decode(&solve.best_state))
        .transpose()?;

    Ok(Report {
        format_version: FORMAT_VERSION,
        engine: config.engine,
        seed: config.seed,
        instance: InstanceSummary {
            source: config.source.clone(),
            kind: if artifact.is_some() { "bilp" } else { "ising" },
            num_vars,
            num_constraints,
            num_spins: model.num_spins(),
            num_couplings: model.num_couplings(),
        },
        params,
        reduction: artifact.as_ref().map(ReductionSummary::from_artifact),
        result: ResultSummary {
            best_energy: solve.best_energy,
            accepted_flips: solve.accepted_flips,
            trace_length: solve.energy_trace.len(),
            best_state: solve.best_state,
        },
        decoded,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        energy_trace: solve.energy_trace,
    })
}

/// Runs the pipeline and writes the report (standard output when `out` is
/// unset) and optional trace. Nothing is written if any stage fails.
pub fn run(config: &RunConfig) -> Result<Report, RunError> {
    let report = execute(config)?;
    let text = report.render(config.report_format);
    match &config.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &config.trace {
        write_file(path, &report.trace_csv())?;
    }
    Ok(report)
}
