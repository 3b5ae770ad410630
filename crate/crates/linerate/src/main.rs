//! Command-line front end: reproduction runs, sweeps and machine-readable
//! export for the line-network analyzer.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use linerate::approx;
use linerate::delay::{self, ThetaMode};
use linerate::error::Error;
use linerate::exact;
use linerate::model::NetworkConfig;
use linerate::planner;
use linerate::sim;

#[derive(Parser)]
#[command(
    name = "linerate",
    version,
    about = "Throughput, blocking and delay analysis for finite-buffer erasure line networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterative fixed-point estimate of rates, blocking and capacity.
    Solve(SolveCmd),
    /// Exact joint-chain stationary distribution and throughput.
    Exact(ExactCmd),
    /// Seeded Monte Carlo simulation of the ACK scheme.
    Simulate(SimulateCmd),
    /// Analytic end-to-end delay distribution.
    Delay(DelayCmd),
    /// Capacity tables over hop count or buffer size.
    Sweep(SweepCmd),
    /// Congestion classification of the intermediate nodes.
    Classify(ClassifyCmd),
    /// Greedy buffer-memory allocation under a budget.
    Allocate(AllocateCmd),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file ('-' for stdin); keys hops, erasures, buffers,
    /// optional packet_size_bytes. Mutually exclusive with inline flags.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of links (inline config).
    #[arg(long)]
    hops: Option<usize>,

    /// Per-link erasure probabilities, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps_uniform")]
    eps: Option<Vec<f64>>,

    /// Same erasure probability on every link.
    #[arg(long)]
    eps_uniform: Option<f64>,

    /// Per-node buffer sizes, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "buffers_uniform")]
    buffers: Option<Vec<u32>>,

    /// Same buffer size on every intermediate node.
    #[arg(long)]
    buffers_uniform: Option<u32>,

    /// Packet size in bytes (inert metadata).
    #[arg(long)]
    packet_size: Option<u64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,

    /// Output path; '-' writes to standard output.
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Args)]
struct SolverArgs {
    /// Max-norm convergence tolerance on the (R, P) fixed point.
    #[arg(long, default_value_t = approx::DEFAULT_TOLERANCE)]
    tolerance: f64,

    /// Iteration cap for the fixed point.
    #[arg(long, default_value_t = approx::DEFAULT_MAX_ITERATIONS)]
    max_iterations: u64,
}

#[derive(Args)]
struct SimArgs {
    /// Epochs per replication.
    #[arg(long, default_value_t = 1_000_000)]
    epochs: u64,

    /// Warmup epochs excluded from statistics;
    /// default max(10 * total buffer, 10^4), capped below epochs.
    #[arg(long)]
    warmup: Option<u64>,

    /// RNG seed; the fixed default keeps unseeded runs reproducible.
    #[arg(long, default_value_t = sim::DEFAULT_SEED)]
    seed: u64,

    /// Independent replications pooled into one report.
    #[arg(long, default_value_t = 1)]
    replications: u32,
}

impl SimArgs {
    fn settings(&self, config: &NetworkConfig) -> sim::SimSettings {
        sim::SimSettings {
            epochs: self.epochs,
            warmup_epochs: self
                .warmup
                .unwrap_or_else(|| sim::default_warmup(config).min(self.epochs / 2)),
            seed: self.seed,
            replications: self.replications,
        }
    }
}

#[derive(Args)]
struct SolveCmd {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ExactCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Refuse joint chains with more states than this.
    #[arg(long, default_value_t = exact::DEFAULT_STATE_CAP)]
    state_cap: usize,
    /// Write the transition matrix as `row col prob` lines.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    /// Write the stationary vector as `state,probability` lines.
    #[arg(long)]
    dump_stationary: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DelayCmd {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Truncation budget per elementary PMF.
    #[arg(long, default_value_t = linerate::pmf::DEFAULT_TAIL_BUDGET)]
    tail_budget: f64,
    /// Occupancy mode assumed for an arriving packet.
    #[arg(long, value_enum, default_value_t = ThetaModeArg::Arrival)]
    theta_mode: ThetaModeArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThetaModeArg {
    /// Occupancy left after the node's same-epoch departure.
    Arrival,
    /// Raw time-stationary occupancy.
    Stationary,
}

impl From<ThetaModeArg> for ThetaMode {
    fn from(arg: ThetaModeArg) -> Self {
        match arg {
            ThetaModeArg::Arrival => ThetaMode::Arrival,
            ThetaModeArg::Stationary => ThetaMode::Stationary,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VaryAxis {
    Hops,
    Buffer,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Which parameter the sweep varies.
    #[arg(long, value_enum)]
    vary: VaryAxis,
    /// Inclusive range `a:b` of swept values.
    #[arg(long)]
    range: Option<String>,
    /// Explicit list of swept values.
    #[arg(long, value_delimiter = ',', conflicts_with = "range")]
    values: Option<Vec<u64>>,
    /// Restrict a buffer sweep to one node (1-based); default all nodes.
    #[arg(long)]
    node: Option<usize>,
    /// Add a simulated capacity column.
    #[arg(long)]
    simulate: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ClassifyCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Rate-comparison tolerance separating the three types.
    #[arg(long, default_value_t = planner::DEFAULT_DELTA)]
    delta: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AllocateCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// Extra buffer packets to distribute.
    #[arg(long)]
    budget: u32,
    /// Rate-comparison tolerance for the reported classification.
    #[arg(long, default_value_t = planner::DEFAULT_DELTA)]
    delta: f64,
    /// Re-check the final plan with a simulation run.
    #[arg(long)]
    simulate_verify: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 0 success, 2 usage, 3 non-convergence, 4 infeasible, 1 anything else.
fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Io(_) => 1,
        CliError::Lib(lib) => match lib {
            Error::InvalidConfig(_) | Error::InvalidSettings(_) | Error::InvalidArgument(_) => 2,
            Error::NonConvergence { .. } | Error::FlowConservation { .. } => 3,
            Error::StateCapExceeded { .. }
            | Error::ReducibleChain
            | Error::InfiniteDelay
            | Error::NodePermanentlyFull
            | Error::ZeroThroughput
            | Error::TailBudgetUnreachable { .. } => 4,
        },
    }
}

enum CliError {
    Usage(String),
    Lib(Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(err) => write!(f, "{err}"),
            CliError::Io(err) => write!(f, "{err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Lib(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(cmd) => cmd_solve(cmd),
        Command::Exact(cmd) => cmd_exact(cmd),
        Command::Simulate(cmd) => cmd_simulate(cmd),
        Command::Delay(cmd) => cmd_delay(cmd),
        Command::Sweep(cmd) => cmd_sweep(cmd),
        Command::Classify(cmd) => cmd_classify(cmd),
        Command::Allocate(cmd) => cmd_allocate(cmd),
    }
}

fn load_config(args: &ConfigArgs) -> Result<NetworkConfig, CliError> {
    let inline_given = args.hops.is_some()
        || args.eps.is_some()
        || args.eps_uniform.is_some()
        || args.buffers.is_some()
        || args.buffers_uniform.is_some()
        || args.packet_size.is_some();

    if let Some(path) = &args.config {
        if inline_given {
            return Err(CliError::Usage(
                "--config conflicts with inline config flags".into(),
            ));
        }
        let text = if path.as_os_str() == "-" {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        } else {
            fs::read_to_string(path)?
        };
        let config: NetworkConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("cannot parse config: {e}")))?;
        return Ok(config);
    }

    let hops = args
        .hops
        .ok_or_else(|| CliError::Usage("missing --hops (or use --config)".into()))?;
    let erasures = match (&args.eps, args.eps_uniform) {
        (Some(list), None) => list.clone(),
        (None, Some(eps)) => vec![eps; hops],
        (None, None) => return Err(CliError::Usage("missing --eps or --eps-uniform".into())),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let buffers = match (&args.buffers, args.buffers_uniform) {
        (Some(list), None) => list.clone(),
        (None, Some(m)) => vec![m; hops.saturating_sub(1)],
        (None, None) => {
            return Err(CliError::Usage(
                "missing --buffers or --buffers-uniform".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    Ok(NetworkConfig::new(erasures, buffers, args.packet_size)?)
}

fn write_output(out: &OutputArgs, content: &str) -> Result<(), CliError> {
    if out.output == "-" {
        print!("{content}");
    } else {
        fs::write(&out.output, content)?;
    }
    Ok(())
}

fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn render_occupancies(text: &mut String, pmfs: &[linerate::approx::OccupancyPmf]) {
    for (j, pmf) in pmfs.iter().enumerate() {
        let masses: Vec<String> = pmf.masses().iter().map(|p| format!("{p:.6}")).collect();
        let _ = writeln!(text, "  v{}: [{}]", j + 1, masses.join(", "));
    }
}

fn cmd_solve(cmd: SolveCmd) -> Result<(), CliError> {
    let config = load_config(&cmd.config)?;
    let solution = approx::solve(&config, cmd.solver.tolerance, cmd.solver.max_iterations)?;
    let capacity = approx::capacity(&solution)?;

    let content = match cmd.out.format {
        Format::Json => to_json_pretty(&json!({
            "config": config,
            "solution": solution,
        })),
        Format::Csv => {
            let mut text = String::new();
            let _ = writeln!(text, "# capacity = {capacity}");
            let _ = writeln!(
                text,
                "# iterations = {}, residual = {:e}",
                solution.iterations, solution.residual
            );
            let _ = writeln!(text, "link,r,pb");
            for i in 0..config.hops() {
                let _ = writeln!(
                    text,
                    "{},{},{}",
                    i + 1,
                    solution.arrival_rates[i],
                    solution.blocking_probs[i]
                );
            }
            text
        }
        Format::Pretty => {
            let mut text = String::new();
            let _ = writeln!(text, "capacity: {capacity:.10} packets/epoch");
            let _ = writeln!(
                text,
                "converged in {} rounds (residual {:.3e}, tolerance {:.1e})",
                solution.iterations, solution.residual, solution.tolerance
            );
            let _ = writeln!(text, "{:>4}  {:>12}  {:>12}", "link", "r", "pb");
            for i in 0..config.hops() {
                let _ = writeln!(
                    text,
                    "{:>4}  {:>12.8}  {:>12.8}",
                    i + 1,
                    solution.arrival_rates[i],
                    solution.blocking_probs[i]
                );
            }
            let _ = writeln!(text, "occupancy distributions:");
            render_occupancies(&mut text, &solution.occupancies);
            text
        }
    };
    write_output(&cmd.out, &content)
}

fn cmd_exact(cmd: ExactCmd) -> Result<(), CliError> {
    let config = load_config(&cmd.config)?;
    let matrix = exact::build_transition_matrix(&config, cmd.state_cap)?;
    if let Some(path) = &cmd.dump_matrix {
        let mut buf = Vec::new();
        matrix.dump_coordinate(&mut buf)?;
        fs::write(path, buf)?;
    }
    let result = exact::solve_exact(&config, cmd.state_cap)?;
    if let Some(path) = &cmd.dump_stationary {
        let mut text = String::from("state,probability\n");
        for (s, p) in result.stationary.iter().enumerate() {
            let _ = writeln!(text, "{s},{p:e}");
        }
        fs::write(path, text)?;
    }

    let content = match cmd.out.format {
        Format::Json => to_json_pretty(&json!({
            "config": config,
            "state_count": result.state_count,
            "throughput": result.throughput,
            "marginals": result.marginals,
        })),
        Format::Csv => {
            let mut text = String::new();
            let _ = writeln!(text, "# throughput = {}", result.throughput);
            let _ = writeln!(text, "# states = {}", result.state_count);
            let _ = writeln!(text, "node,occupancy,probability");
            for (j, pmf) in result.marginals.iter().enumerate() {
                for (k, &p) in pmf.masses().iter().enumerate() {
                    let _ = writeln!(text, "{},{},{}", j + 1, k, p);
                }
            }
            text
        }
        Format::Pretty => {
            let mut text = String::new();
            let _ = writeln!(text, "states: {}", result.state_count);
            let _ = writeln!(text, "throughput: {:.10} packets/epoch", result.throughput);
            let _ = writeln!(text, "marginal occupancy distributions:");
            render_occupancies(&mut text, &result.marginals);
            text
        }
    };
    write_output(&cmd.out, &content)
}

fn cmd_simulate(cmd: SimulateCmd) -> Result<(), CliError> {
    let config = load_config(&cmd.config)?;
    let settings = cmd.sim.settings(&config);
    let report = if settings.replications > 1 {
        sim::replicate(&config, &settings)?
    } else {
        sim::simulate(&config, &settings)?
    };

    let content = match cmd.out.format {
        Format::Json => to_json_pretty(&json!({
            "config": config,
            "settings": settings,
            "report": report,
        })),
        Format::Csv => {
            let mut text = String::new();
            let _ = writeln!(text, "# throughput = {}", report.throughput);
            if let Some(stderr) = report.stderr_throughput {
                let _ = writeln!(text, "# stderr_throughput = {stderr}");
            }
            let _ = writeln!(text, "# delivered = {}", report.delivered);
            let _ = writeln!(text, "# mean_delay = {}", report.mean_delay());
            let _ = writeln!(text, "delay_epochs,count");
            for (d, c) in &report.delay_histogram {
                let _ = writeln!(text, "{d},{c}");
            }
            text
        }
        Format::Pretty => {
            let mut text = String::new();
            let _ = writeln!(text, "throughput: {:.6} packets/epoch", report.throughput);
            if let Some(stderr) = report.stderr_throughput {
                let _ = writeln!(text, "stderr: {stderr:.6}");
            }
            let _ = writeln!(text, "delivered: {}", report.delivered);
            let _ = writeln!(
                text,
                "delay: mean {:.4}, variance {:.4}",
                report.mean_delay(),
                report.delay_variance()
            );
            let _ = writeln!(text, "blocked events per node: {:?}", report.blocked_events);
            let _ = writeln!(text, "occupancy frequencies:");
            render_occupancies(&mut text, &report.occupancy_freq);
            text
        }
    };
    write_output(&cmd.out, &content)
}

fn cmd_delay(cmd: DelayCmd) -> Result<(), CliError> {
    let config = load_config(&cmd.config)?;
    let mode: ThetaMode = cmd.theta_mode.into();
    let solution = approx::solve(&config, cmd.solver.tolerance, cmd.solver.max_iterations)?;
    let pmf = delay::total_delay(&config, &solution, cmd.tail_budget, mode)?;
    let summary = delay::summarize(&pmf);

    let content = match cmd.out.format {
        Format::Json => to_json_pretty(&json!({
            "config": config,
            "theta_mode": mode,
            "tail_budget": cmd.tail_budget,
            "summary": summary,
            "pmf": pmf,
        })),
        Format::Csv => {
            let mut text = String::new();
            let _ = writeln!(text, "# mean = {}", summary.mean);
            let _ = writeln!(text, "# variance = {}", summary.variance);
            let _ = writeln!(
                text,
                "# p50 = {}, p90 = {}, p99 = {}",
                summary.p50, summary.p90, summary.p99
            );
            let _ = writeln!(text, "# tail_mass = {:e}", summary.tail_mass);
            let _ = writeln!(text, "delay_epochs,probability");
            for (i, &p) in pmf.masses().iter().enumerate() {
                let _ = writeln!(text, "{},{}", pmf.min_support() + i as u64, p);
            }
            text
        }
        Format::Pretty => {
            let mut text = String::new();
            let _ = writeln!(text, "delay mean: {:.6} epochs", summary.mean);
            let _ = writeln!(text, "delay variance: {:.6}", summary.variance);
            let _ = writeln!(
                text,
                "quantiles: p50 {}, p90 {}, p99 {}",
                summary.p50, summary.p90, summary.p99
            );
            let _ = writeln!(
                text,
                "support: {}..{} ({} entries), truncated tail {:.3e}",
                pmf.min_support(),
                pmf.min_support() + pmf.masses().len() as u64 - 1,
                pmf.masses().len(),
                pmf.tail_mass()
            );
            text
        }
    };
    write_output(&cmd.out, &content)
}

#[derive(Serialize)]
struct SweepRow {
    x: u64,
    capacity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sim_stderr: Option<f64>,
}

fn parse_range(range: &str) -> Result<Vec<u64>, CliError> {
    let (a, b) = range
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("bad --range '{range}', want a:b")))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad range start '{a}'")))?;
    let b: u64 = b
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad range end '{b}'")))?;
    if a > b {
        return Err(CliError::Usage(format!(
            "empty range {a}:{b}; start must not exceed end"
        )));
    }
    Ok((a..=b).collect())
}

fn cmd_sweep(cmd: SweepCmd) -> Result<(), CliError> {
    let mut values = match (&cmd.range, &cmd.values) {
        (Some(range), None) => parse_range(range)?,
        (None, Some(values)) if !values.is_empty() => values.clone(),
        _ => {
            return Err(CliError::Usage(
                "sweep needs exactly one of --range a:b or --values v1,v2,...".into(),
            ))
        }
    };
    values.sort_unstable();
    values.dedup();

    let rows: Vec<SweepRow> = match cmd.vary {
        VaryAxis::Hops => {
            let eps = cmd
                .config
                .eps_uniform
                .ok_or_else(|| CliError::Usage("--vary hops needs --eps-uniform".into()))?;
            let m = cmd
                .config
                .buffers_uniform
                .ok_or_else(|| CliError::Usage("--vary hops needs --buffers-uniform".into()))?;
            if values.first().is_some_and(|&h| h < 2) {
                return Err(CliError::Usage("hop counts below 2 are invalid".into()));
            }
            values
                .iter()
                .map(|&h| {
                    let config = NetworkConfig::uniform(h as usize, eps, m)?;
                    sweep_row(&cmd, &config, h)
                })
                .collect::<Result<_, CliError>>()?
        }
        VaryAxis::Buffer => {
            let base = load_config(&cmd.config)?;
            if values.first().is_some_and(|&m| m < 1) {
                return Err(CliError::Usage("buffer sizes below 1 are invalid".into()));
            }
            if let Some(node) = cmd.node {
                if node == 0 || node >= base.hops() {
                    return Err(CliError::Usage(format!(
                        "--node {node} out of 1..={}",
                        base.hops() - 1
                    )));
                }
            }
            values
                .iter()
                .map(|&m| {
                    let buffers: Vec<u32> = match cmd.node {
                        Some(node) => {
                            let mut buffers = base.buffers().to_vec();
                            buffers[node - 1] = m as u32;
                            buffers
                        }
                        None => vec![m as u32; base.hops() - 1],
                    };
                    let config = NetworkConfig::new(
                        base.erasures().to_vec(),
                        buffers,
                        base.packet_size_bytes(),
                    )?;
                    sweep_row(&cmd, &config, m)
                })
                .collect::<Result<_, CliError>>()?
        }
    };

    let x_label = match cmd.vary {
        VaryAxis::Hops => "hops",
        VaryAxis::Buffer => "m",
    };
    let content = match cmd.out.format {
        Format::Json => to_json_pretty(&json!({ "vary": x_label, "rows": rows })),
        Format::Csv | Format::Pretty => {
            let mut text = String::new();
            if cmd.simulate {
                let _ = writeln!(text, "{x_label},capacity,simulated,sim_stderr");
                for row in &rows {
                    let _ = writeln!(
                        text,
                        "{},{},{},{}",
                        row.x,
                        row.capacity,
                        row.simulated.unwrap_or(f64::NAN),
                        row.sim_stderr.map_or(String::new(), |s| s.to_string())
                    );
                }
            } else {
                let _ = writeln!(text, "{x_label},capacity");
                for row in &rows {
                    let _ = writeln!(text, "{},{}", row.x, row.capacity);
                }
            }
            text
        }
    };
    write_output(&cmd.out, &content)
}

fn sweep_row(cmd: &SweepCmd, config: &NetworkConfig, x: u64) -> Result<SweepRow, CliError> {
    let solution = approx::solve(config, cmd.solver.tolerance, cmd.solver.max_iterations)?;
    let capacity = approx::capacity(&solution)?;
    let (simulated, sim_stderr) = if cmd.simulate {
        let settings = cmd.sim.settings(config);
        let report = if settings.replications > 1 {
            sim::replicate(config, &settings)?
        } else {
            sim::simulate(config, &settings)?
        };
        (Some(report.throughput), report.stderr_throughput)
    } else {
        (None, None)
    };
    Ok(SweepRow {
        x,
        capacity,
        simulated,
        sim_stderr,
    })
}

fn cmd_classify(cmd: ClassifyCmd) -> Result<(), CliError> {
    let config = load_config(&cmd.config)?;
    let solution = approx::solve(&config, cmd.solver.tolerance, cmd.solver.max_iterations)?;
    let classes = planner::classify(&config, &solution, cmd.delta);

    let content = match cmd.out.format {
        Format::Json => to_json_pretty(&json!({
            "config": config,
            "delta": cmd.delta,
            "classes": classes,
        })),
        Format::Csv => {
            let mut text = String::from("node,type,in_rate,out_rate\n");
            for class in &classes {
                let _ = writeln!(
                    text,
                    "{},{},{},{}",
                    class.node,
                    class.kind.type_index(),
                    class.in_rate,
                    class.out_rate
                );
            }
            text
        }
        Format::Pretty => {
            let mut text = String::new();
            let _ = writeln!(text, "{:>4}  {:>6}  {:>10}  {:>10}", "node", "type", "in", "out");
            for class in &classes {
                let _ = writeln!(
                    text,
                    "{:>4}  {:>6}  {:>10.6}  {:>10.6}",
                    format!("v{}", class.node),
                    class.kind.to_string(),
                    class.in_rate,
                    class.out_rate
                );
            }
            text
        }
    };
    write_output(&cmd.out, &content)
}

fn cmd_allocate(cmd: AllocateCmd) -> Result<(), CliError> {
    let config = load_config(&cmd.config)?;
    let opts = planner::PlannerOptions {
        tolerance: cmd.solver.tolerance,
        max_iterations: cmd.solver.max_iterations,
        delta: cmd.delta,
        ..planner::PlannerOptions::default()
    };
    let plan = planner::allocate(&config, cmd.budget, &opts)?;

    let verified = if cmd.simulate_verify {
        let mut buffers = config.buffers().to_vec();
        for (slot, &inc) in buffers.iter_mut().zip(&plan.increments) {
            *slot += inc;
        }
        let final_config = NetworkConfig::new(
            config.erasures().to_vec(),
            buffers,
            config.packet_size_bytes(),
        )?;
        let settings = cmd.sim.settings(&final_config);
        let report = if settings.replications > 1 {
            sim::replicate(&final_config, &settings)?
        } else {
            sim::simulate(&final_config, &settings)?
        };
        Some(report.throughput)
    } else {
        None
    };

    let content = match cmd.out.format {
        Format::Json => to_json_pretty(&json!({
            "config": config,
            "budget": cmd.budget,
            "plan": plan,
            "simulated_capacity": verified,
        })),
        Format::Csv => {
            let mut text = String::new();
            let increments: Vec<String> = plan.increments.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(text, "# increments = [{}]", increments.join(","));
            let _ = writeln!(
                text,
                "# capacity {} -> {}",
                plan.baseline_capacity, plan.predicted_capacity
            );
            if let Some(thr) = verified {
                let _ = writeln!(text, "# simulated_capacity = {thr}");
            }
            let _ = writeln!(text, "step,node,capacity,mean_delay");
            for (i, step) in plan.steps.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "{},{},{},{}",
                    i + 1,
                    step.node,
                    step.capacity,
                    step.mean_delay
                );
            }
            text
        }
        Format::Pretty => {
            let mut text = String::new();
            let _ = writeln!(text, "budget: {} packets", cmd.budget);
            for (j, &inc) in plan.increments.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "  v{}: {} -> {} (+{inc})",
                    j + 1,
                    config.buffers()[j],
                    config.buffers()[j] + inc
                );
            }
            let _ = writeln!(
                text,
                "capacity: {:.6} -> {:.6}",
                plan.baseline_capacity, plan.predicted_capacity
            );
            let _ = writeln!(
                text,
                "mean delay: {:.4} -> {:.4}",
                plan.baseline_mean_delay, plan.predicted_mean_delay
            );
            if let Some(thr) = verified {
                let _ = writeln!(text, "simulated capacity of final plan: {thr:.6}");
            }
            text
        }
    };
    write_output(&cmd.out, &content)
}
