use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ringdd::bench::{
    bitstring, dense_oracle, fidelity, shor_postprocess, CircuitSpec, ReportConfig, RunReport, ShorReport,
    REPORT_SCHEMA_VERSION,
};
use ringdd::circuits::{parse_qasm, to_qasm, Circuit};
use ringdd::engine::{run_circuit, Comm, RunConfig, Scheduler, SwapMode, TransportKind};
use ringdd::partition::PartitionPlan;

const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;
const SHOR_ATTEMPTS: usize = 10;
const SHOR_DEFAULT_SHOTS: usize = 1024;

#[derive(Parser)]
#[command(
    name = "ringdd",
    version,
    about = "Distributed decision-diagram quantum circuit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a circuit.
    Run(RunArgs),
    /// Execute a circuit and check it against the dense simulator.
    Verify(RunArgs),
    /// Sweep rank counts, schedules and swap modes.
    Bench(BenchArgs),
    /// Write a generated circuit as OpenQASM.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CommArg {
    Ring,
    Bcast,
}

#[derive(Clone, Copy, ValueEnum)]
enum SwapArg {
    None,
    V1,
    V2,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Inproc,
    Socket,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Threaded,
    Sequential,
}

impl From<CommArg> for Comm {
    fn from(c: CommArg) -> Self {
        match c {
            CommArg::Ring => Comm::Ring,
            CommArg::Bcast => Comm::Broadcast,
        }
    }
}

impl From<SwapArg> for SwapMode {
    fn from(s: SwapArg) -> Self {
        match s {
            SwapArg::None => SwapMode::None,
            SwapArg::V1 => SwapMode::V1,
            SwapArg::V2 => SwapMode::V2,
        }
    }
}

fn parse_ranks(s: &str) -> Result<usize, String> {
    let p: usize = s.parse().map_err(|_| format!("`{s}` is not a rank count"))?;
    if !p.is_power_of_two() {
        return Err(format!("rank count must be a power of two, got {p}"));
    }
    Ok(p)
}

#[derive(Args, Clone)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// OpenQASM 2.0 input file.
    #[arg(long, group = "source")]
    qasm: Option<PathBuf>,
    /// Generated circuit, e.g. `shor:n=15,a=7` or `qcbm:q=12,layers=8`.
    #[arg(long, group = "source")]
    circuit: Option<CircuitSpec>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "1", value_parser = parse_ranks)]
    ranks: usize,
    #[arg(long, value_enum, default_value = "ring")]
    comm: CommArg,
    #[arg(long, value_enum, default_value = "none")]
    swap: SwapArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample this many measurement outcomes.
    #[arg(long)]
    shots: Option<usize>,
    /// Write a JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "inproc")]
    transport: TransportArg,
    #[arg(long, value_enum, default_value = "threaded")]
    scheduler: SchedulerArg,
    /// Swap qubits back to their original positions after the last gate.
    #[arg(long)]
    restore_layout: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated rank counts to sweep.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4", value_parser = parse_ranks)]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON array of reports here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    circuit: CircuitSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.to_string())
    }
}

fn load(source: &Source, seed: u64) -> Result<(Circuit, String), Failure> {
    match (&source.qasm, &source.circuit) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
            let c = parse_qasm(&text).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
            Ok((c, path.display().to_string()))
        }
        (None, Some(spec)) => Ok((spec.build(seed)?, spec.to_string())),
        (None, None) => Err(Failure::Usage("one of --qasm or --circuit is required".into())),
    }
}

struct Job<'a> {
    circuit: &'a Circuit,
    label: String,
    shor: Option<(u64, u64)>,
    cfg: RunConfig,
    shots: Option<usize>,
    verify: bool,
}

fn execute(job: Job<'_>) -> Result<RunReport, Failure> {
    let mut wall = BTreeMap::new();
    let t = Instant::now();
    let out = run_circuit(job.circuit, &job.cfg)?;
    wall.insert("simulate".to_string(), t.elapsed().as_secs_f64());

    let mut fid = None;
    if job.verify {
        let t = Instant::now();
        let oracle = dense_oracle(job.circuit)?;
        fid = Some(fidelity(&out, &oracle));
        wall.insert("oracle".to_string(), t.elapsed().as_secs_f64());
    }

    let mut histogram = None;
    let mut shor = None;
    let shots = job.shots.or(if job.verify && job.shor.is_some() {
        Some(SHOR_DEFAULT_SHOTS)
    } else {
        None
    });
    if let Some(shots) = shots {
        let t = Instant::now();
        let hist = out.sample(shots, job.cfg.seed)?;
        wall.insert("sample".to_string(), t.elapsed().as_secs_f64());
        if let Some((modulus, base)) = job.shor {
            let res = shor_postprocess(&hist, modulus, base, SHOR_ATTEMPTS);
            shor = Some(ShorReport {
                modulus,
                base,
                factors: res.factors,
                period: res.period,
                attempts: res.attempts,
            });
        }
        let n = job.circuit.n_qubits();
        histogram = Some(hist.into_iter().map(|(k, v)| (bitstring(k, n), v)).collect());
    }

    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: ReportConfig {
            circuit: job.label,
            qubits: job.circuit.n_qubits(),
            gates: job.circuit.len(),
            ranks: job.cfg.plan.ranks(),
            comm: job.cfg.comm,
            swap: job.cfg.swap,
            transport: job.cfg.transport,
            seed: job.cfg.seed,
            shots,
        },
        wall_time: wall,
        ranks: out.metrics(),
        totals: out.total_metrics(),
        final_layout: out.layout().perm().to_vec(),
        squared_norm: out.squared_norm(),
        fidelity: fid,
        histogram,
        shor,
    })
}

fn plan_for(circuit: &Circuit, ranks: usize) -> Result<PartitionPlan, Failure> {
    PartitionPlan::new(circuit.n_qubits(), ranks).map_err(|e| Failure::Usage(e.to_string()))
}

fn write_json(path: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| Failure::Run(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn summarize(r: &RunReport) {
    let t = &r.totals;
    println!(
        "{}: {} qubits, {} gates, P={} {:?}/{:?}: {} global / {} local applications, {} swaps, {} messages, peak {} nodes",
        r.config.circuit,
        r.config.qubits,
        r.config.gates,
        r.config.ranks,
        r.config.comm,
        r.config.swap,
        t.global_applications,
        t.local_applications,
        t.swaps_inserted,
        t.messages_sent,
        t.peak_nodes
    );
    if let Some(f) = r.fidelity {
        println!("fidelity: {f:.15}");
    }
    if let Some(s) = &r.shor {
        match s.factors {
            Some((p, q)) => println!("factors of {}: {p} x {q} (attempts: {})", s.modulus, s.attempts),
            None => println!("no factors of {} after {} attempts", s.modulus, s.attempts),
        }
    }
}

fn run_cmd(args: RunArgs, verify: bool) -> Result<(), Failure> {
    if matches!(args.transport, TransportArg::Socket) && matches!(args.scheduler, SchedulerArg::Sequential) {
        return Err(Failure::Usage(
            "--transport socket requires --scheduler threaded".into(),
        ));
    }
    let (circuit, label) = load(&args.source, args.seed)?;
    let mut cfg = RunConfig::new(plan_for(&circuit, args.ranks)?)
        .comm(args.comm.into())
        .swap(args.swap.into())
        .scheduler(match args.scheduler {
            SchedulerArg::Threaded => Scheduler::Threaded,
            SchedulerArg::Sequential => Scheduler::Sequential,
        });
    cfg.seed = args.seed;
    cfg.restore_layout = args.restore_layout;
    cfg.transport = match args.transport {
        TransportArg::Inproc => TransportKind::Inproc,
        TransportArg::Socket => TransportKind::Socket,
    };
    let report = execute(Job {
        circuit: &circuit,
        label,
        shor: args.source.circuit.as_ref().and_then(CircuitSpec::shor_params),
        cfg,
        shots: args.shots,
        verify,
    })?;
    summarize(&report);
    if let Some(path) = &args.report {
        write_json(&Some(path.clone()), &report)?;
    }
    if verify {
        let f = report.fidelity.unwrap_or(0.0);
        if f < FIDELITY_FLOOR {
            return Err(Failure::Run(format!("fidelity {f} below {FIDELITY_FLOOR}")));
        }
        if let Some(s) = &report.shor {
            if s.factors.is_none() {
                return Err(Failure::Run(format!("no factors of {} recovered", s.modulus)));
            }
        }
    }
    Ok(())
}

fn bench_cmd(args: BenchArgs) -> Result<(), Failure> {
    let (circuit, label) = load(&args.source, args.seed)?;
    let mut reports = Vec::new();
    for &ranks in &args.ranks {
        let plan = plan_for(&circuit, ranks)?;
        for comm in [Comm::Ring, Comm::Broadcast] {
            for swap in [SwapMode::None, SwapMode::V1, SwapMode::V2] {
                let mut cfg = RunConfig::new(plan).comm(comm).swap(swap);
                cfg.seed = args.seed;
                let r = execute(Job {
                    circuit: &circuit,
                    label: label.clone(),
                    shor: None,
                    cfg,
                    shots: None,
                    verify: false,
                })?;
                eprintln!(
                    "P={ranks} {comm:?} {swap:?}: {} messages, {} global applications, {} swaps, {:.3}s",
                    r.totals.messages_sent,
                    r.totals.global_applications,
                    r.totals.swaps_inserted,
                    r.wall_time["simulate"]
                );
                reports.push(r);
            }
        }
    }
    write_json(&args.report, &reports)
}

fn gen_cmd(args: GenArgs) -> Result<(), Failure> {
    let circuit = args.circuit.build(args.seed)?;
    let text = to_qasm(&circuit);
    match &args.output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Run(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run_cmd(a, false),
        Command::Verify(a) => run_cmd(a, true),
        Command::Bench(a) => bench_cmd(a),
        Command::Gen(a) => gen_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
