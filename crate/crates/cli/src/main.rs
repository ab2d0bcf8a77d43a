//! Command-line front end for the qfork simulator.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use serde_json::{json, Value};

use qfork::channel::{self, Channel};
use qfork::config::{parse_spec, pauli_string};
use qfork::fork::{run_sampled_stream, run_with, Backend};
use qfork::format::{fmt_num, round12};
use qfork::gates;
use qfork::oracle;
use qfork::protocols::{self, Axis, PurityMode};
use qfork::random::{random_density, random_pure_state, random_unitary, stream_rng};
use qfork::sampler::{complexity_sweep, ComplexityInstance, DEFAULT_EPSILONS};
use qfork::state::DimensionCaps;
use qfork::tensor::{ComplexMatrix, ComplexVector};
use qfork::QforkError;

const PURE_CAP_VAR: &str = "QFORK_PURE_DIM_CAP";
const DENSITY_CAP_VAR: &str = "QFORK_DENSITY_DIM_CAP";

#[derive(Parser)]
#[command(
    name = "qfork",
    version,
    about = "Quantum forking-based sampling simulator"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Up,
    Down,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Dense,
    Blocks,
}

#[derive(Clone, Copy, ValueEnum)]
enum TwirlSet {
    Pauli,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Rotation-axis discrimination over a θ grid (CSV).
    AxisSweep {
        #[arg(long)]
        axis: String,
        /// Grid points from 0 to 2π inclusive.
        #[arg(long, default_value_t = 17)]
        steps: usize,
        /// Add a sampled column with this many shots per point.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "up")]
        direction: Direction,
    },
    /// Teleportation witness on a named two-qubit state (JSON).
    Witness {
        /// phi+, psi-, 00, or random
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Single-qubit purity through a channel (JSON).
    Purity {
        /// identity, dephasing, depolarizing, amplitude_damping, or a gate name
        #[arg(long, default_value = "identity")]
        channel: String,
        #[arg(long)]
        param: Option<f64>,
        /// qutrit or two-qubit
        #[arg(long, default_value = "qutrit")]
        mode: String,
        /// 0, 1, +, or random
        #[arg(long, default_value = "0")]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Twirled channel expectation against its direct evaluation (JSON).
    Twirl {
        #[arg(long, value_enum, default_value = "pauli")]
        set: TwirlSet,
        /// Unitaries in a random twirl set.
        #[arg(long, default_value_t = 2)]
        size: usize,
        #[arg(long, default_value = "amplitude_damping")]
        channel: String,
        #[arg(long)]
        param: Option<f64>,
        /// Pauli observable
        #[arg(long, default_value = "Z")]
        observable: String,
        #[arg(long, default_value = "0")]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs a JSON fork specification; prints the value and the circuit IR.
    RunSpec {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        backend: BackendArg,
    },
    /// Preparation budgets of naive and forking estimation (CSV).
    Complexity {
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Seed for the random branch unitaries.
        #[arg(long, default_value_t = 0)]
        instance_seed: u64,
        /// Comma-separated tolerances.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn caps_from_env() -> anyhow::Result<DimensionCaps> {
    let mut caps = DimensionCaps::default();
    let read = |var: &str| -> anyhow::Result<Option<usize>> {
        match std::env::var(var) {
            Ok(v) => {
                Ok(Some(v.trim().parse().with_context(|| {
                    format!("{var} must be a positive integer")
                })?))
            }
            Err(_) => Ok(None),
        }
    };
    if let Some(c) = read(PURE_CAP_VAR)? {
        caps.max_pure = c;
    }
    if let Some(c) = read(DENSITY_CAP_VAR)? {
        caps.max_density = c;
    }
    Ok(caps)
}

fn num(x: f64) -> Value {
    json!(round12(x))
}

fn qubit_state(name: &str, seed: u64) -> anyhow::Result<ComplexMatrix> {
    Ok(match name {
        "0" => ComplexVector::basis(2, 0).projector(),
        "1" => ComplexVector::basis(2, 1).projector(),
        "+" => ComplexVector::real(&[1.0, 1.0])?.normalized().projector(),
        "random" => random_density(2, 2, &mut stream_rng(seed, 0)),
        other => return Err(QforkError::param("state", format!("unknown state '{other}'")).into()),
    })
}

fn named_channel(name: &str, param: Option<f64>) -> anyhow::Result<Channel> {
    let need = || {
        param.ok_or_else(|| QforkError::param("param", format!("channel '{name}' needs --param")))
    };
    Ok(match name {
        "identity" => Channel::identity(2),
        "dephasing" => channel::dephasing(need()?)?,
        "depolarizing" => channel::depolarizing(need()?)?,
        "amplitude_damping" => channel::amplitude_damping(need()?)?,
        "hadamard" => channel::unitary_channel(&gates::hadamard())?.with_label("H"),
        "x" => channel::unitary_channel(&gates::pauli_x())?.with_label("X"),
        "z" => channel::unitary_channel(&gates::pauli_z())?.with_label("Z"),
        other => {
            return Err(QforkError::param("channel", format!("unknown channel '{other}'")).into())
        }
    })
}

fn axis_sweep(
    axis: &str,
    steps: usize,
    shots: Option<usize>,
    seed: u64,
    direction: Direction,
) -> anyhow::Result<String> {
    let axis: Axis = axis.parse()?;
    if steps < 2 {
        return Err(QforkError::param("steps", "must be at least 2").into());
    }
    let mut thetas = protocols::theta_grid(steps);
    match direction {
        Direction::Up => {}
        Direction::Down => thetas.reverse(),
        Direction::Random => thetas.shuffle(&mut stream_rng(seed, u64::MAX)),
    }
    let mut out = String::from(if shots.is_some() {
        "theta,exact,sampled,theory\n"
    } else {
        "theta,exact,theory\n"
    });
    for (row, &theta) in thetas.iter().enumerate() {
        let exact = protocols::axis_discrimination(axis, theta)?;
        let theory = protocols::theory_value(axis, theta);
        match shots {
            Some(n) => {
                let spec = protocols::axis_spec(axis, theta)?;
                let est = run_sampled_stream(&spec, n, seed, row as u64)?;
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_num(theta),
                    fmt_num(exact),
                    fmt_num(est.mean),
                    fmt_num(theory)
                ));
            }
            None => out.push_str(&format!(
                "{},{},{}\n",
                fmt_num(theta),
                fmt_num(exact),
                fmt_num(theory)
            )),
        }
    }
    Ok(out)
}

fn witness(state: &str, seed: u64) -> anyhow::Result<String> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rho = match state {
        "phi+" => ComplexVector::real(&[s, 0.0, 0.0, s])?.projector(),
        "psi-" => ComplexVector::real(&[0.0, s, -s, 0.0])?.projector(),
        "00" => ComplexVector::basis(4, 0).projector(),
        "random" => random_pure_state(4, &mut stream_rng(seed, 0)).projector(),
        other => return Err(QforkError::param("state", format!("unknown state '{other}'")).into()),
    };
    let r = protocols::teleportation_witness_qfs(&rho)?;
    let v = json!({
        "state": state,
        "qfs_measured": num(r.qfs_measured),
        "witness_value": num(r.witness_value),
        "entangled_flag": r.entangled_flag,
        "oracle_value": num(oracle::oracle_witness(&rho)?),
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn purity(
    channel: &str,
    param: Option<f64>,
    mode: &str,
    state: &str,
    seed: u64,
) -> anyhow::Result<String> {
    let mode: PurityMode = mode.parse()?;
    let ch = named_channel(channel, param)?;
    let rho = qubit_state(state, seed)?;
    let r = protocols::purity_qfs(&ch, &rho, mode)?;
    let v = json!({
        "channel": ch.label(),
        "mode": mode.to_string(),
        "state": state,
        "qfs_measured": num(r.qfs_measured),
        "purity_sum": num(r.purity_sum),
        "trace_purity": num(r.trace_purity),
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

#[allow(clippy::too_many_arguments)]
fn twirl(
    set: TwirlSet,
    size: usize,
    channel: &str,
    param: Option<f64>,
    observable: &str,
    state: &str,
    seed: u64,
) -> anyhow::Result<String> {
    let inner = named_channel(channel, param)?;
    let obs = pauli_string(observable)?;
    let rho = qubit_state(state, seed)?;
    let unitaries: Vec<ComplexMatrix> = match set {
        TwirlSet::Pauli => vec![
            gates::identity(2),
            gates::pauli_x(),
            gates::pauli_y(),
            gates::pauli_z(),
        ],
        TwirlSet::Random => {
            let mut rng = stream_rng(seed, 1);
            (0..size.max(1))
                .map(|_| random_unitary(2, &mut rng))
                .collect()
        }
    };
    let weights = vec![1.0 / unitaries.len() as f64; unitaries.len()];
    let qfs = protocols::twirl_qfs(&unitaries, &weights, &inner, &obs, &rho)?;
    let direct = obs
        .trace_product(&oracle::oracle_twirl(&unitaries, &weights, &inner, &rho)?)?
        .re;
    let v = json!({
        "channel": inner.label(),
        "twirl_set": match set { TwirlSet::Pauli => "pauli", TwirlSet::Random => "random" },
        "size": unitaries.len(),
        "observable": observable,
        "qfs_value": num(qfs),
        "oracle_value": num(direct),
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn run_spec(path: &PathBuf, backend: BackendArg) -> anyhow::Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = parse_spec(&text, caps_from_env()?)?;
    let backend = match backend {
        BackendArg::Auto => Backend::Auto,
        BackendArg::Dense => Backend::Dense,
        BackendArg::Blocks => Backend::Blocks,
    };
    let out = run_with(&spec, backend)?;
    let v = json!({
        "value": num(out.value),
        "backend": match out.backend() { Backend::Blocks => "blocks", _ => "dense" },
        "ir": out.ir,
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn complexity(
    d: usize,
    q: usize,
    instance_seed: u64,
    epsilons: Option<Vec<f64>>,
    delta: f64,
    reps: usize,
    seed: u64,
) -> anyhow::Result<String> {
    if d == 0 || q == 0 {
        return Err(QforkError::param("d, q", "must be at least 1").into());
    }
    let inst = ComplexityInstance::haar(d, q, instance_seed);
    let eps = epsilons.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
    let report = complexity_sweep(&inst, &eps, delta, reps, seed)?;
    eprintln!(
        "median ratio {}, rmse slope {}",
        fmt_num(report.median_ratio()),
        fmt_num(report.qfs_rmse_slope)
    );
    Ok(report.to_csv())
}

fn execute(cli: &Cli) -> anyhow::Result<String> {
    match &cli.command {
        Command::AxisSweep {
            axis,
            steps,
            shots,
            seed,
            direction,
        } => axis_sweep(axis, *steps, *shots, *seed, *direction),
        Command::Witness { state, seed } => witness(state, *seed),
        Command::Purity {
            channel,
            param,
            mode,
            state,
            seed,
        } => purity(channel, *param, mode, state, *seed),
        Command::Twirl {
            set,
            size,
            channel,
            param,
            observable,
            state,
            seed,
        } => twirl(*set, *size, channel, *param, observable, state, *seed),
        Command::RunSpec { path, backend } => run_spec(path, *backend),
        Command::Complexity {
            d,
            q,
            instance_seed,
            epsilons,
            delta,
            reps,
            seed,
        } => complexity(
            *d,
            *q,
            *instance_seed,
            epsilons.clone(),
            *delta,
            *reps,
            *seed,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|text| match &cli.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let cap = matches!(
                e.downcast_ref::<QforkError>(),
                Some(QforkError::DimensionCap { .. })
            );
            ExitCode::from(if cap { 3 } else { 2 })
        }
    }
}
