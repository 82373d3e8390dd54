//! The `qsynth` command line. Every command prints one JSON document on
//! stdout; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed input or any
//! other error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qsynth_core::grover::{
    build_reverse_grover, format_bits, parse_bits, run_exact_grover, MarkedReflectionOracle,
};
use qsynth_core::linalg::Matrix;
use qsynth_core::qram::{functional_qram, implement_via_qram};
use qsynth_core::sim::{
    expanded_resources, implementation_distance, run_circuit, BoundCircuit, SimConfig, SparseState,
    StateVector,
};
use qsynth_core::statesynth::{
    beta_oracle, build_qacf0_state_circuit, build_qnc_state_circuit, oracle_state_synth,
};
use qsynth_core::unitsynth::{lowered_gate_level_qram, Method, SynthesisJob, SynthesisOutput};
use serde::Serialize;

use crate::bench::{bench, render_table, BenchMethod};
use crate::json::{
    bound_to_doc, parse_circuit, parse_state, parse_unitary, state_doc, table_doc, to_string,
    FormatError, ReportDoc, StateDoc, TableDoc, FORMAT_VERSION,
};

pub const SIM_CAP_ENV: &str = "QSYNTH_SIM_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "qsynth",
    version,
    about = "Circuit synthesis, simulation and resource reports"
)]
pub struct Cli {
    /// Indented JSON; `bench` prints an aligned table instead.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateMethod {
    Qacf0,
    Qnc,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitaryMethod {
    Oracle,
    Depth,
    Teleport,
    QramGrover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QramKind {
    /// The unitary itself behind an oracle call.
    Functional,
    /// The gate-level qRAM built from the unitary.
    Circuit,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Circuit preparing a state from |0...0>.
    SynthesizeState {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        method: StateMethod,
        #[arg(long, default_value_t = 20)]
        precision_bits: u32,
    },
    /// Circuit (or teleportation trace) implementing a unitary.
    SynthesizeUnitary {
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long, value_enum)]
        method: UnitaryMethod,
        #[arg(long, value_enum, default_value_t = QramKind::Functional)]
        qram: QramKind,
        #[arg(long, default_value_t = 20)]
        precision_bits: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// State to teleport (teleport method only).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Runs a circuit on a state.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        /// Initial state; a state narrower than the circuit is loaded into
        /// the `input` register (or the leading qubits) with the rest |0>.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Report only this register's amplitudes, other qubits projected on |0>.
        #[arg(long)]
        register: Option<String>,
    },
    /// Exit 0 iff the circuit's implementation distance is within tolerance.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long)]
        tol: f64,
    },
    /// Resource report with oracle bodies expanded.
    Stats {
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Exact search for a single marked string.
    Grover {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        marked: String,
        /// Run the reversed circuit from |marked, 0>.
        #[arg(long)]
        reverse: bool,
    },
    /// Resource table over a range of sizes.
    Bench {
        /// Comma separated; empty gives an empty table.
        #[arg(long, default_value = "")]
        methods: String,
        /// `N` or inclusive `A..B`.
        #[arg(long, default_value = "1..4")]
        n: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        precision_bits: u32,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error(transparent)]
    Core(#[from] qsynth_core::Error),
    #[error("{0}")]
    Usage(String),
    /// Not an error in the input: the check ran and failed.
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> Result<T, FormatError>) -> Result<T, CliError> {
    parse(&read(path)?).map_err(|source| CliError::Format {
        path: path.display().to_string(),
        source,
    })
}

/// Simulation limits, with the qubit cap taken from `QSYNTH_SIM_CAP` if set.
pub fn sim_config_from(var: Option<String>) -> Result<SimConfig, CliError> {
    let mut cfg = SimConfig::default();
    if let Some(v) = var {
        cfg.qubit_cap = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SIM_CAP_ENV}: `{v}` is not a qubit count")))?;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct GroverOut {
    format: u32,
    found: String,
    queries: u64,
    fidelity: f64,
}

#[derive(Serialize)]
struct TeleportOut {
    format: u32,
    rounds: usize,
    corrections: Vec<String>,
    fidelity: f64,
}

#[derive(Serialize)]
struct StateTableOut {
    format: u32,
    table: TableDoc,
    queries: u64,
    trace_distance: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    format: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    register: Option<String>,
    state: StateDoc,
    /// Squared norm lost by the projection onto |0> outside the register.
    residual: f64,
    queries: u64,
}

#[derive(Serialize)]
struct VerifyOut {
    format: u32,
    distance: f64,
    tolerance: f64,
    ok: bool,
}

#[derive(Serialize)]
struct StatsOut {
    format: u32,
    #[serde(flatten)]
    report: ReportDoc,
}

fn circuit_json(
    bc: &BoundCircuit,
    distance: Option<f64>,
    pretty: bool,
) -> Result<String, CliError> {
    let mut d = bound_to_doc(bc).map_err(|source| CliError::Format {
        path: "<output>".into(),
        source,
    })?;
    d.distance = distance;
    Ok(to_string(&d, pretty))
}

fn distance_if_simulable(
    bc: &BoundCircuit,
    u: &Matrix,
    cfg: &SimConfig,
) -> Result<Option<f64>, CliError> {
    match implementation_distance(&bc.circuit, &bc.bindings, u, cfg) {
        Ok(d) => Ok(Some(d)),
        Err(qsynth_core::Error::TooManyQubits { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn synthesize_state(
    path: &Path,
    method: StateMethod,
    b: u32,
    pretty: bool,
) -> Result<String, CliError> {
    let psi = load(path, parse_state)?;
    let bare = |c| BoundCircuit {
        circuit: c,
        bindings: Default::default(),
    };
    match method {
        StateMethod::Qacf0 => circuit_json(&bare(build_qacf0_state_circuit(&psi)?), None, pretty),
        StateMethod::Qnc => circuit_json(&bare(build_qnc_state_circuit(&psi)?), None, pretty),
        StateMethod::Oracle => {
            let table = beta_oracle(&psi, b)?;
            let r = oracle_state_synth(psi.num_qubits(), &table)?;
            let out = StateTableOut {
                format: FORMAT_VERSION,
                table: table_doc(&table),
                queries: r.queries,
                trace_distance: (1.0 - r.state.fidelity(&psi)).max(0.0).sqrt(),
            };
            Ok(to_string(&out, pretty))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn synthesize_unitary(
    path: &Path,
    method: UnitaryMethod,
    qram: QramKind,
    b: u32,
    seed: u64,
    input: Option<&Path>,
    cfg: &SimConfig,
    pretty: bool,
) -> Result<String, CliError> {
    let u = load(path, parse_unitary)?;
    if method == UnitaryMethod::QramGrover {
        let a = match qram {
            QramKind::Functional => functional_qram(&u)?,
            QramKind::Circuit => lowered_gate_level_qram(&u)?,
        };
        let bc = implement_via_qram(&a)?;
        let d = distance_if_simulable(&bc, &u, cfg)?;
        return circuit_json(&bc, d, pretty);
    }
    let method = match method {
        UnitaryMethod::Oracle => Method::Oracle,
        UnitaryMethod::Depth => Method::Depth,
        _ => Method::Teleport,
    };
    let input = input.map(|p| load(p, parse_state)).transpose()?;
    let job = SynthesisJob {
        u: u.clone(),
        method,
        precision_bits: b,
        seed,
        input: input.clone(),
    };
    match job.run(cfg)? {
        SynthesisOutput::Circuit { circuit, distance } => circuit_json(&circuit, distance, pretty),
        SynthesisOutput::Teleport(trace) => {
            let n = trace.final_state.num_qubits();
            let psi = input.unwrap_or_else(|| StateVector::zero(n));
            let v = &u * Matrix::from_column_slice(1 << n, 1, psi.amps());
            let want = StateVector::from_amps_unchecked(v.iter().copied().collect());
            let out = TeleportOut {
                format: FORMAT_VERSION,
                rounds: trace.rounds,
                corrections: trace.labels(),
                fidelity: trace.final_state.fidelity(&want),
            };
            Ok(to_string(&out, pretty))
        }
    }
}

fn simulate(
    circuit: &Path,
    state: Option<&Path>,
    register: Option<&str>,
    cfg: &SimConfig,
    pretty: bool,
) -> Result<String, CliError> {
    let bc = load(circuit, parse_circuit)?;
    let m = bc.circuit.num_qubits();
    let mut s = match state {
        None => SparseState::zero(m),
        Some(p) => {
            let psi = load(p, parse_state)?;
            let k = psi.num_qubits();
            let qubits: Vec<usize> = match bc.circuit.register("input") {
                Some(r) if r.len() == k => r.collect(),
                _ if k <= m => (0..k).collect(),
                _ => {
                    return Err(CliError::Usage(format!(
                        "state has {k} qubits, circuit has {m}"
                    )))
                }
            };
            SparseState::from_register(m, &qubits, psi.amps())
        }
    }
    .with_max_support(cfg.max_support);
    let log = run_circuit(&mut s, &bc.circuit, &bc.bindings)?;
    let qubits: Vec<usize> = match register {
        Some(name) => bc
            .circuit
            .register(name)
            .ok_or_else(|| CliError::Usage(format!("circuit has no register `{name}`")))?
            .collect(),
        None => (0..m).collect(),
    };
    if qubits.len() > cfg.qubit_cap {
        return Err(qsynth_core::Error::TooManyQubits {
            requested: qubits.len(),
            cap: cfg.qubit_cap,
        }
        .into());
    }
    let amps = s.project_register(&qubits);
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let out = SimulateOut {
        format: FORMAT_VERSION,
        register: register.map(str::to_string),
        state: state_doc(&StateVector::from_amps_unchecked(amps)),
        residual: (s.norm_sqr() - kept).max(0.0),
        queries: log.total(),
    };
    Ok(to_string(&out, pretty))
}

fn grover(n: usize, marked: &str, reverse: bool, pretty: bool) -> Result<String, CliError> {
    let x = parse_bits(marked)
        .filter(|_| marked.len() == n)
        .ok_or_else(|| {
            CliError::Usage(format!("--marked must be a {n}-bit string, got `{marked}`"))
        })?;
    let mut oracle = MarkedReflectionOracle::new(n, x)?;
    let (found, queries, fidelity) = if reverse {
        let c = build_reverse_grover(n)?;
        let mut s = StateVector::basis(n + 1, (x as usize) << 1);
        let log = run_circuit(&mut s, &c, &oracle.bindings())?;
        ((s.most_likely() >> 1) as u64, log.total(), s.probability(0))
    } else {
        let r = run_exact_grover(n, &mut oracle)?;
        (r.found, r.queries, r.fidelity)
    };
    let out = GroverOut {
        format: FORMAT_VERSION,
        found: format_bits(found, n),
        queries,
        fidelity,
    };
    Ok(to_string(&out, pretty))
}

fn parse_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--n: expected `N` or `A..B`, got `{s}`"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn run_command(cli: &Cli, cfg: &SimConfig) -> Result<String, CliError> {
    let pretty = cli.pretty;
    match &cli.command {
        Command::SynthesizeState {
            state,
            method,
            precision_bits,
        } => synthesize_state(state, *method, *precision_bits, pretty),
        Command::SynthesizeUnitary {
            unitary,
            method,
            qram,
            precision_bits,
            seed,
            input,
        } => synthesize_unitary(
            unitary,
            *method,
            *qram,
            *precision_bits,
            *seed,
            input.as_deref(),
            cfg,
            pretty,
        ),
        Command::Simulate {
            circuit,
            state,
            register,
        } => simulate(circuit, state.as_deref(), register.as_deref(), cfg, pretty),
        Command::Verify {
            circuit,
            unitary,
            tol,
        } => {
            let bc = load(circuit, parse_circuit)?;
            let u = load(unitary, parse_unitary)?;
            let distance = implementation_distance(&bc.circuit, &bc.bindings, &u, cfg)?;
            let ok = distance <= *tol;
            let out = to_string(
                &VerifyOut {
                    format: FORMAT_VERSION,
                    distance,
                    tolerance: *tol,
                    ok,
                },
                pretty,
            );
            if ok {
                Ok(out)
            } else {
                println!("{out}");
                Err(CliError::Verification(format!(
                    "distance {distance:e} exceeds {tol:e}"
                )))
            }
        }
        Command::Stats { circuit } => {
            let bc = load(circuit, parse_circuit)?;
            let report = expanded_resources(&bc.circuit, &bc.bindings)?;
            Ok(to_string(
                &StatsOut {
                    format: FORMAT_VERSION,
                    report: report.into(),
                },
                pretty,
            ))
        }
        Command::Grover { n, marked, reverse } => grover(*n, marked, *reverse, pretty),
        Command::Bench {
            methods,
            n,
            seed,
            precision_bits,
        } => {
            let methods = methods
                .split(',')
                .map(str::trim)
                .filter(|m| !m.is_empty())
                .map(|m| {
                    BenchMethod::parse(m)
                        .ok_or_else(|| CliError::Usage(format!("--methods: unknown method `{m}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (lo, hi) = parse_range(n)?;
            let table = bench(&methods, lo..=hi, *seed, *precision_bits, cfg)?;
            if pretty {
                Ok(render_table(&table))
            } else {
                Ok(to_string(&table, false))
            }
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result =
        sim_config_from(std::env::var(SIM_CAP_ENV).ok()).and_then(|cfg| run_command(&cli, &cfg));
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
