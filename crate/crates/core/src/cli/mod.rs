//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for argument or configuration errors, 3 for
//! simulation failures such as an input that can never be encoded.

mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use table::{Cell, Table};

use crate::codec::{
    average_performance, conditional_performance, decode_joint, decode_single, encode, f1_analytic,
    optimal_joint_fidelity, p1_analytic, QubitIndex,
};
use crate::config::{ExperimentConfig, OutputFormat, SimulationMode};
use crate::error::Error;
use crate::ladder::{decode_qutrit, encode_two_qutrits, LadderCode};
use crate::optics::{
    hom::{hom_dip_scan, overlap_for_visibility, symmetric_delays},
    optimal_splitting_ratio, run_experiment, ExperimentRow, ImperfectionParams,
};
use crate::optimizer::{
    evaluate_decoder, gap_to_optimum, optimize_decoder, OptimizeOptions, SearchSpace,
};
use crate::statekit::{fidelity, BlochAngles, PureState};

#[derive(Debug, Parser)]
#[command(name = "qutrit-codec", version, about = "Probabilistic encoding of two qubits into a qutrit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode and decode states with the abstract codec.
    #[command(allow_negative_numbers = true)]
    Codec(CodecArgs),
    /// Hong-Ou-Mandel dip on the variable-ratio coupler.
    #[command(allow_negative_numbers = true)]
    Hom(HomArgs),
    /// Sweep input states through the optical setup.
    #[command(allow_negative_numbers = true)]
    Experiment(ExperimentArgs),
    /// Numerical search for the best joint decoder and splitting ratio.
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    /// Polar angle of qubit 1, degrees.
    #[arg(long, default_value_t = 90.0)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi1: f64,
    #[arg(long, default_value_t = 90.0)]
    pub theta2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi2: f64,
    /// 1, 2 or joint; with --n, the index of the qubit to decode.
    #[arg(long, default_value = "joint")]
    pub decode: String,
    /// Monte Carlo average over Bloch-uniform inputs.
    #[arg(long)]
    pub average: bool,
    /// Conditional success probability and fidelity against the polar
    /// angle of qubit 1.
    #[arg(long)]
    pub curve: bool,
    /// Step of the --curve grid, degrees.
    #[arg(long, default_value_t = 10.0)]
    pub curve_step: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of qubits for the ladder code.
    #[arg(long)]
    pub n: Option<usize>,
    /// Polar angles of the --n qubits, degrees (one value is broadcast).
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub phi: Vec<f64>,
    /// Real amplitudes of the first qutrit; selects the two-qutrit code.
    #[arg(long, value_delimiter = ',')]
    pub qutrit1: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub qutrit2: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HomArgs {
    #[arg(long, default_value_t = 0.25)]
    pub reflectance: f64,
    /// Squared mode overlap of the photons.
    #[arg(long, conflicts_with = "visibility")]
    pub overlap: Option<f64>,
    /// Use the mode overlap that gives this dip visibility on a balanced
    /// coupler.
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Start from the lab imperfection preset instead of ideal parameters.
    #[arg(long, conflicts_with = "params")]
    pub lab: bool,
    /// JSON file with imperfection parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Largest delay in seconds; defaults to six coherence times.
    #[arg(long)]
    pub delay_max: Option<f64>,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// expected or shot-noise; overrides the config.
    #[arg(long)]
    pub mode: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of operation elements (1 to 4).
    #[arg(long, default_value_t = 4)]
    pub elements: usize,
    /// Restrict the search to a|00⟩⟨0| + b|01⟩⟨1| + c|11⟩⟨2|.
    #[arg(long)]
    pub diagonal: bool,
    #[arg(long, default_value_t = 10.0)]
    pub penalty: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iterations: usize,
    /// Monte Carlo samples for re-checking the best decoder (0 skips it).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Grid step of the splitting-ratio scan.
    #[arg(long, default_value_t = 1e-4)]
    pub resolution: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Simulation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Simulation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Simulation(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::AngleOutOfRange { .. }
            | Error::IndexOutOfRange { .. }
            | Error::UnknownMode(_)
            | Error::BalancedCoupler
            | Error::InfeasibleDamping { .. }
            | Error::DimensionMismatch { .. }
            | Error::DimensionTooSmall(_) => CliError::Usage(e.to_string()),
            _ => CliError::Simulation(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Rendered output and its destination.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub path: Option<PathBuf>,
}

fn render(table: &Table, output: &OutputArgs, fallback: Option<OutputFormat>) -> Output {
    let format = output.format.or(fallback).unwrap_or_default();
    Output {
        text: table.render(format),
        path: output.out.clone(),
    }
}

enum DecodeTarget {
    Qubit(usize),
    Joint,
}

fn parse_decode(s: &str) -> CliResult<DecodeTarget> {
    if s.eq_ignore_ascii_case("joint") {
        return Ok(DecodeTarget::Joint);
    }
    s.parse::<usize>()
        .map(DecodeTarget::Qubit)
        .map_err(|_| CliError::Usage(format!("--decode expects 1, 2, joint or a qubit index, got `{s}`")))
}

fn qubit_index(k: usize) -> CliResult<QubitIndex> {
    Ok(QubitIndex::from_number(k)?)
}

fn amplitude_cells(state: &PureState) -> (Vec<String>, Vec<Cell>) {
    let mut names = Vec::new();
    let mut cells = Vec::new();
    for (k, a) in state.amplitudes().iter().enumerate() {
        names.push(format!("amp{k}_re"));
        names.push(format!("amp{k}_im"));
        cells.push(a.re.into());
        cells.push(a.im.into());
    }
    (names, cells)
}

fn cmd_codec(args: &CodecArgs) -> CliResult<Table> {
    let target = parse_decode(&args.decode)?;
    if args.curve {
        return codec_curve(args);
    }
    if args.average {
        return codec_average(args);
    }
    if let Some(n) = args.n {
        let DecodeTarget::Qubit(k) = target else {
            return Err(CliError::Usage("--n needs a numeric --decode".into()));
        };
        return codec_ladder(args, n, k);
    }
    if !args.qutrit1.is_empty() || !args.qutrit2.is_empty() {
        let DecodeTarget::Qubit(k) = target else {
            return Err(CliError::Usage("qutrit decoding needs --decode 1 or 2".into()));
        };
        return codec_qutrits(args, k);
    }

    let a1 = BlochAngles::from_degrees(args.theta1, args.phi1)?;
    let a2 = BlochAngles::from_degrees(args.theta2, args.phi2)?;
    let (q1, q2) = (a1.state(), a2.state());
    let enc = encode(&q1, &q2)?;
    let (amp_names, amp_cells) = amplitude_cells(&enc.qutrit);
    let mut columns: Vec<String> = ["theta1", "phi1", "theta2", "phi2", "decode"].map(String::from).to_vec();
    columns.extend(amp_names);
    columns.extend(["encode_probability", "decode_probability", "success_probability"].map(String::from));
    let mut row: Vec<Cell> = vec![
        args.theta1.into(),
        args.phi1.into(),
        args.theta2.into(),
        args.phi2.into(),
        args.decode.to_lowercase().as_str().into(),
    ];
    row.extend(amp_cells);
    match target {
        DecodeTarget::Qubit(k) => {
            let which = qubit_index(k)?;
            let dec = decode_single(&enc.qutrit, which)?;
            let original = if which == QubitIndex::First { &q1 } else { &q2 };
            let f = match &dec.qubit {
                Some(q) => q.overlap(original)?,
                None => return Err(CliError::Simulation(format!("qubit {k} cannot be decoded from this input"))),
            };
            columns.push("fidelity".into());
            row.extend([
                enc.success_probability.into(),
                dec.success_probability.into(),
                (enc.success_probability * dec.success_probability).into(),
                f.into(),
            ]);
        }
        DecodeTarget::Joint => {
            let dec = decode_joint(&enc.qutrit)?;
            columns.extend(["fidelity1", "fidelity2"].map(String::from));
            row.extend([
                enc.success_probability.into(),
                dec.success_probability.into(),
                (enc.success_probability * dec.success_probability).into(),
                fidelity(&q1, &dec.per_qubit_states[0])?.into(),
                fidelity(&q2, &dec.per_qubit_states[1])?.into(),
            ]);
        }
    }
    let mut table = Table::with_columns("codec", columns);
    table.push(row);
    Ok(table)
}

fn codec_average(args: &CodecArgs) -> CliResult<Table> {
    let perf = average_performance(args.samples, args.seed)?;
    let mut table = Table::new("codec", &["quantity", "value", "stderr", "reference"]);
    table.meta("samples", args.samples);
    table.meta("seed", args.seed as usize);
    let f = optimal_joint_fidelity();
    let rows: [(&str, f64, f64, f64); 8] = [
        ("joint_fidelity", perf.symmetric_fidelity(), 0.5 * (perf.joint_fidelity_stderr[0] + perf.joint_fidelity_stderr[1]), f),
        ("joint_fidelity1", perf.joint_fidelity[0], perf.joint_fidelity_stderr[0], f),
        ("joint_fidelity2", perf.joint_fidelity[1], perf.joint_fidelity_stderr[1], f),
        ("joint_fidelity_unweighted1", perf.joint_fidelity_unweighted[0], f64::NAN, f64::NAN),
        ("joint_fidelity_unweighted2", perf.joint_fidelity_unweighted[1], f64::NAN, f64::NAN),
        ("joint_probability", perf.joint_probability, perf.joint_probability_stderr, 0.5),
        ("single_probability1", perf.single_probability[0], perf.single_probability_stderr[0], 0.5),
        ("single_probability2", perf.single_probability[1], perf.single_probability_stderr[1], 0.5),
    ];
    for (name, v, se, r) in rows {
        table.push(vec![name.into(), v.into(), se.into(), r.into()]);
    }
    Ok(table)
}

fn codec_curve(args: &CodecArgs) -> CliResult<Table> {
    if !(args.curve_step > 0.0) {
        return Err(CliError::Usage("--curve-step must be positive".into()));
    }
    let mut table = Table::new(
        "codec",
        &["theta_deg", "p1", "p1_stderr", "p1_analytic", "f1", "f1_stderr", "f1_analytic"],
    );
    table.meta("samples", args.samples);
    table.meta("seed", args.seed as usize);
    let n = (180.0 / args.curve_step + 1e-9).floor() as usize;
    for k in 0..=n {
        let deg = k as f64 * args.curve_step;
        let theta = deg.to_radians();
        let est = conditional_performance(theta, args.samples, args.seed.wrapping_add(k as u64))?;
        table.push(vec![
            deg.into(),
            est.p1.into(),
            est.p1_stderr.into(),
            p1_analytic(theta).into(),
            est.f1.into(),
            est.f1_stderr.into(),
            f1_analytic(theta).into(),
        ]);
    }
    Ok(table)
}

fn broadcast(values: &[f64], n: usize, default: f64, name: &str) -> CliResult<Vec<f64>> {
    match values.len() {
        0 => Ok(vec![default; n]),
        1 => Ok(vec![values[0]; n]),
        m if m == n => Ok(values.to_vec()),
        m => Err(CliError::Usage(format!("--{name} has {m} values, expected 1 or {n}"))),
    }
}

fn codec_ladder(args: &CodecArgs, n: usize, k: usize) -> CliResult<Table> {
    let code = LadderCode::qubits(n)?;
    let thetas = broadcast(&args.theta, n, 90.0, "theta")?;
    let phis = broadcast(&args.phi, n, 0.0, "phi")?;
    let qubits = thetas
        .iter()
        .zip(&phis)
        .map(|(&t, &p)| Ok(BlochAngles::from_degrees(t, p)?.state()))
        .collect::<CliResult<Vec<_>>>()?;
    let enc = code.encode(&qubits)?;
    let dec = code.decode(&enc.state, k)?;
    let original = &qubits[k - 1];
    let f = match &dec.system {
        Some(q) => q.overlap(original)?,
        None => return Err(CliError::Simulation(format!("qubit {k} cannot be decoded from this input"))),
    };
    let (amp_names, amp_cells) = amplitude_cells(&enc.state);
    let mut columns: Vec<String> = vec!["n".into(), "decode".into()];
    columns.extend(amp_names);
    columns.extend(["encode_probability", "decode_probability", "success_probability", "fidelity"].map(String::from));
    let mut row: Vec<Cell> = vec![n.into(), k.into()];
    row.extend(amp_cells);
    row.extend([
        enc.success_probability.into(),
        dec.success_probability.into(),
        (enc.success_probability * dec.success_probability).into(),
        f.into(),
    ]);
    let mut table = Table::with_columns("codec", columns);
    table.meta("theta", Cell::Text(join(&thetas)));
    table.meta("phi", Cell::Text(join(&phis)));
    table.push(row);
    Ok(table)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn codec_qutrits(args: &CodecArgs, k: usize) -> CliResult<Table> {
    let which = qubit_index(k)?;
    let t1 = PureState::from_real(&args.qutrit1)?;
    let t2 = PureState::from_real(&args.qutrit2)?;
    let enc = encode_two_qutrits(&t1, &t2)?;
    let dec = decode_qutrit(&enc.state, which)?;
    let original = if which == QubitIndex::First { &t1 } else { &t2 };
    let f = match &dec.system {
        Some(q) => q.overlap(original)?,
        None => return Err(CliError::Simulation(format!("qutrit {k} cannot be decoded from this input"))),
    };
    let (amp_names, amp_cells) = amplitude_cells(&enc.state);
    let mut columns: Vec<String> = vec!["decode".into()];
    columns.extend(amp_names);
    columns.extend(["encode_probability", "decode_probability", "success_probability", "fidelity"].map(String::from));
    let mut row: Vec<Cell> = vec![k.into()];
    row.extend(amp_cells);
    row.extend([
        enc.success_probability.into(),
        dec.success_probability.into(),
        (enc.success_probability * dec.success_probability).into(),
        f.into(),
    ]);
    let mut table = Table::with_columns("codec", columns);
    table.push(row);
    Ok(table)
}

fn load_params(path: &PathBuf) -> CliResult<ImperfectionParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let params: ImperfectionParams =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    params.validate()?;
    Ok(params)
}

fn cmd_hom(args: &HomArgs) -> CliResult<Table> {
    let mut params = match (&args.params, args.lab) {
        (Some(path), _) => load_params(path)?,
        (None, true) => ImperfectionParams::lab(),
        (None, false) => ImperfectionParams::ideal(),
    };
    if let Some(v) = args.overlap {
        params.mode_overlap = v;
    }
    if let Some(vis) = args.visibility {
        params.mode_overlap = overlap_for_visibility(0.5, vis)?;
    }
    params.validate()?;
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let half = args.delay_max.unwrap_or(6.0 * params.coherence_time);
    if !(half > 0.0 && half.is_finite()) {
        return Err(CliError::Usage("--delay-max must be positive".into()));
    }
    let scan = hom_dip_scan(args.reflectance, &symmetric_delays(half, args.points), &params)?;
    let mut table = Table::new("hom", &["delay", "rate"]);
    table.meta("reflectance", args.reflectance);
    table.meta("mode_overlap", params.mode_overlap);
    table.meta("visibility", scan.visibility());
    table.meta("visibility_relative_to_max", scan.visibility_relative_to_max());
    for p in &scan.points {
        table.push(vec![p.delay.into(), p.rate.into()]);
    }
    Ok(table)
}

fn cmd_experiment(args: &ExperimentArgs) -> CliResult<(Table, Option<OutputFormat>, Option<PathBuf>)> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mode) = &args.mode {
        config.mode = match mode.as_str() {
            "expected" => SimulationMode::Expected,
            "shot-noise" | "shot_noise" => SimulationMode::ShotNoise,
            other => return Err(CliError::Usage(format!("--mode expects expected or shot-noise, got `{other}`"))),
        };
    }
    let rows = run_experiment(&config)?;
    let mut table = Table::new("experiment", &ExperimentRow::COLUMNS);
    table.meta("reflectance", config.reflectance);
    table.meta(
        "mode",
        match config.mode {
            SimulationMode::Expected => "expected",
            SimulationMode::ShotNoise => "shot_noise",
        },
    );
    table.meta("seed", config.seed as usize);
    for r in &rows {
        let mut cells: Vec<Cell> = vec![r.qubit.into()];
        cells.extend(r.values().map(Cell::from));
        table.push(cells);
    }
    Ok((table, config.format, config.output.map(PathBuf::from)))
}

fn cmd_optimize(args: &OptimizeArgs) -> CliResult<Output> {
    let space = if args.diagonal {
        SearchSpace::Diagonal
    } else {
        SearchSpace::Full {
            n_elements: args.elements,
        }
    };
    let options = OptimizeOptions {
        space,
        penalty: args.penalty,
        max_iterations: args.max_iterations,
        ..OptimizeOptions::new(args.restarts, args.tolerance, args.seed)
    };
    let result = optimize_decoder(&options)?;
    let ratio = optimal_splitting_ratio(args.resolution)?;
    let monte_carlo = if args.samples > 0 {
        Some(evaluate_decoder(&result.best, args.samples, args.seed)?)
    } else {
        None
    };
    let elements: Vec<Vec<Vec<[f64; 2]>>> = result
        .best
        .operation()
        .elements()
        .iter()
        .map(|k| {
            (0..k.nrows())
                .map(|r| (0..k.ncols()).map(|c| [k[(r, c)].re, k[(r, c)].im]).collect())
                .collect()
        })
        .collect();
    let format = args.output.format.unwrap_or(OutputFormat::Json);
    let text = match format {
        OutputFormat::Json => {
            let report = json!({
                "schema_version": crate::config::SCHEMA_VERSION,
                "command": "optimize",
                "seed": args.seed,
                "restarts": args.restarts,
                "search_space": space,
                "fidelity": result.fidelity,
                "f1": result.evaluation.f1,
                "f2": result.evaluation.f2,
                "success_probability": result.evaluation.success_probability,
                "reference_fidelity": optimal_joint_fidelity(),
                "fidelity_gap": gap_to_optimum(result.fidelity),
                "monte_carlo": monte_carlo,
                "elements": elements,
                "restart_reports": result.restarts,
                "splitting_ratio": {
                    "r_star": ratio,
                    "gap": ratio - 0.25,
                    "resolution": args.resolution,
                },
            });
            let mut s = serde_json::to_string_pretty(&report).expect("serializable report");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut table = Table::new("optimize", &["quantity", "value"]);
            table.meta("seed", args.seed as usize);
            table.meta("restarts", args.restarts);
            let mut rows = vec![
                ("fidelity", result.fidelity),
                ("f1", result.evaluation.f1),
                ("f2", result.evaluation.f2),
                ("success_probability", result.evaluation.success_probability),
                ("fidelity_gap", gap_to_optimum(result.fidelity)),
            ];
            if let Some(mc) = monte_carlo {
                rows.extend([
                    ("mc_f1", mc.f1),
                    ("mc_f1_stderr", mc.f1_stderr),
                    ("mc_f2", mc.f2),
                    ("mc_f2_stderr", mc.f2_stderr),
                    ("mc_success_probability", mc.success_probability),
                ]);
            }
            rows.extend([("r_star", ratio), ("r_star_gap", ratio - 0.25)]);
            for (k, v) in rows {
                table.push(vec![k.into(), v.into()]);
            }
            table.to_csv()
        }
    };
    Ok(Output {
        text,
        path: args.output.out.clone(),
    })
}

/// Runs a parsed command and returns its rendered output.
pub fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Codec(a) => Ok(render(&cmd_codec(a)?, &a.output, None)),
        Command::Hom(a) => Ok(render(&cmd_hom(a)?, &a.output, None)),
        Command::Experiment(a) => {
            let (table, format, path) = cmd_experiment(a)?;
            let mut out = render(&table, &a.output, format);
            out.path = out.path.or(path);
            Ok(out)
        }
        Command::Optimize(a) => cmd_optimize(a),
    }
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliResult<Output>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli)
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let output = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return e.exit_code();
        }
    };
    match &output.path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output.text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{}", output.text),
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> String {
        let mut full = vec!["qutrit-codec"];
        full.extend_from_slice(args);
        run(full).unwrap().text
    }

    fn run_err(args: &[&str]) -> i32 {
        let mut full = vec!["qutrit-codec"];
        full.extend_from_slice(args);
        run(full).unwrap_err().exit_code()
    }

    fn column(csv: &str, name: &str) -> Vec<f64> {
        let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let idx = header.iter().position(|h| *h == name).unwrap();
        lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
    }

    #[test]
    fn negative_angles_parse() {
        let out = run_ok(&["codec", "--phi1", "-20", "--phi2", "-45.5"]);
        assert_eq!(column(&out, "phi1"), [-20.0]);
        assert_eq!(column(&out, "phi2"), [-45.5]);
    }

    #[test]
    fn single_decode_row() {
        let out = run_ok(&["codec", "--theta1", "90", "--phi1", "0", "--theta2", "90", "--phi2", "0", "--decode", "1"]);
        assert!((column(&out, "fidelity")[0] - 1.0).abs() < 1e-12);
        assert!((column(&out, "success_probability")[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ladder_and_qutrit_rows() {
        let out = run_ok(&["codec", "--n", "3", "--decode", "2"]);
        assert!((column(&out, "fidelity")[0] - 1.0).abs() < 1e-12);
        let out = run_ok(&["codec", "--qutrit1", "1,2,2", "--qutrit2", "2,-1,2", "--decode", "2"]);
        assert!((column(&out, "fidelity")[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hom_header_visibility() {
        let out = run_ok(&["hom", "--reflectance", "0.25"]);
        let vis: f64 = out
            .lines()
            .find_map(|l| l.strip_prefix("# visibility="))
            .unwrap()
            .parse()
            .unwrap();
        assert!((vis - 3.0 / 7.0).abs() < 1e-3);
        let out = run_ok(&["hom", "--reflectance", "0.5", "--visibility", "0.98", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["visibility"].as_f64().unwrap() - 0.98).abs() < 1e-6);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_err(&["codec", "--theta1", "200"]), 2);
        assert_eq!(run_err(&["codec", "--decode", "x"]), 2);
        assert_eq!(run_err(&["hom", "--reflectance", "1.5"]), 2);
        assert_eq!(run_err(&["nope"]), 2);
        // |1⟩ ⊗ |0⟩ is never encoded
        assert_eq!(run_err(&["codec", "--theta1", "180", "--theta2", "0", "--decode", "1"]), 3);
        assert_eq!(run_err(&["experiment", "--config", "/nonexistent.json"]), 2);
    }
}
