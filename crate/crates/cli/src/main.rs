//! `dyncast`: carousel file transfer over dynamic multicast channels.

use std::fs;
use std::io::BufWriter;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dyncast_core::carousel::build_plan;
use dyncast_core::netsim::{write_trace, Scenario};
use dyncast_core::sequencer::pdu_size;
use dyncast_core::transfer::udp::{self, UdpEndpoint};
use dyncast_core::transfer::{
    block_count, emission_trace, prepare_file, report, simulate, CodecChoice, SessionParams,
    TransferError, TransferMetrics,
};

#[derive(Parser)]
#[command(
    name = "dyncast",
    version,
    about = "Carousel file transfer over dynamic multicast channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Carousel a file over UDP, or write its emission trace.
    Send(SendArgs),
    /// Receive a file over UDP and write it with its metrics.
    Recv(RecvArgs),
    /// Simulate a transfer to every receiver of a scenario.
    Sim(SimArgs),
    /// Print the carousel plan.
    Plan(PlanArgs),
    /// Aggregate metrics files into means and 95% confidence intervals.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct CodecArgs {
    /// Codec as `name[,k,n[,seed]]`: null, mds or sparse_parity.
    #[arg(long, default_value = "sparse_parity")]
    codec: String,
    /// Carousel levels per buffer; defaults to what the top rate carries.
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Args)]
struct SendArgs {
    #[arg(long)]
    file: PathBuf,
    /// Scenario file; only its channel section is used.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    codec: CodecArgs,
    /// Destination `addr:port`; slot p goes to port + p.
    #[arg(long, conflicts_with = "trace")]
    to: Option<SocketAddr>,
    /// Write the emission trace here instead of sending.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Seconds of carousel to send or trace.
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct RecvArgs {
    /// Local `addr:port` of slot 0.
    #[arg(long)]
    listen: SocketAddr,
    /// Multicast group to join on every slot.
    #[arg(long)]
    multicast: Option<Ipv4Addr>,
    /// Codec of the session; `k` may instead come from `--size`.
    #[arg(long)]
    codec: String,
    /// File size in bytes.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    file: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
    /// Overrides the scenario's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Repeat with seeds seed, seed+1, ... and report intervals.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    /// Number of symbols in the carousel.
    #[arg(long, conflicts_with = "file")]
    blocks: Option<usize>,
    /// Derive the dimensions from a file and codec.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    codec: CodecArgs,
    /// Also print the symbols of the first buffers.
    #[arg(long, default_value_t = 0)]
    buffers: usize,
}

#[derive(Args)]
struct MetricsArgs {
    /// Per-run metrics files, `name value` per line.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Print `value (±ci)` rows instead of `name value ci`.
    #[arg(long)]
    table: bool,
}

fn load_scenario(path: Option<&Path>) -> Result<Scenario> {
    let Some(path) = path else {
        return Ok(Scenario::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn send(a: SendArgs) -> Result<()> {
    let channel = load_scenario(a.scenario.as_deref())?.channel;
    let codec = CodecChoice::parse(&a.codec.codec)?;
    let session = prepare_file(&a.file, &channel, codec, a.codec.levels)?;
    let spec = session.params().spec;
    eprintln!(
        "k {} n {} levels {} buffer_time {:.6}",
        spec.k,
        spec.n,
        session.plan().levels(),
        session.buffer_time()
    );
    let session_id = a.seed as u32;
    match (a.to, a.trace) {
        (Some(to), None) => {
            let ep = UdpEndpoint {
                addr: to.ip(),
                base_port: to.port(),
            };
            let stats = udp::send(&session, &channel, ep, a.duration, session_id)?;
            println!("sent {} packets {} bytes", stats.packets, stats.bytes);
        }
        (None, Some(path)) => {
            let records = emission_trace(&session, &channel, a.duration, session_id)?;
            let f =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_trace(BufWriter::new(f), &records)?;
            println!("traced {} packets", records.len());
        }
        _ => bail!("give either --to or --trace"),
    }
    Ok(())
}

fn recv(a: RecvArgs) -> Result<()> {
    let channel = load_scenario(a.scenario.as_deref())?.channel;
    let pdu = pdu_size(&channel)?;
    let codec = CodecChoice::parse(&a.codec)?;
    let k = match (codec.k, a.size) {
        (_, Some(size)) => block_count(size, pdu),
        (Some(k), None) => k,
        (None, None) => bail!("the codec gives no k; pass --size"),
    };
    let params = SessionParams {
        spec: codec.resolve(k, pdu)?,
    };
    let listen = UdpEndpoint {
        addr: a.listen.ip(),
        base_port: a.listen.port(),
    };
    fs::create_dir_all(&a.out)?;
    let slots = channel.group_count as u16;
    let outcome = udp::receive(
        params,
        listen,
        slots,
        a.multicast,
        Duration::from_secs_f64(a.timeout),
    );
    let (data, counters) = match outcome {
        Ok(ok) => ok,
        Err(TransferError::Timeout { partial }) => {
            bail!(
                "timed out after {} symbols ({} bytes received)",
                partial.received_symbols,
                partial.link_nb_data
            )
        }
        Err(e) => return Err(e.into()),
    };
    write_file(&a.out.join("file"), &data)?;
    // a socket receiver cannot count what the network dropped, so loss reads 0
    let mut counters = counters;
    counters.link_packets = counters.received_symbols.max(1);
    let metrics = dyncast_core::transfer::compute_metrics(&counters)?;
    write_file(&a.out.join("metrics.txt"), metrics.to_text())?;
    print!("{}", metrics.to_text());
    Ok(())
}

fn sim(a: SimArgs) -> Result<()> {
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let mut scenario = load_scenario(Some(&a.scenario))?;
    let codec = CodecChoice::parse(&a.codec.codec)?;
    let session = prepare_file(&a.file, &scenario.channel, codec, a.codec.levels)?;
    fs::create_dir_all(&a.out)?;
    let base_seed = a.seed.unwrap_or(scenario.rng_seed);
    let mut per_receiver: Vec<Vec<TransferMetrics>> = vec![Vec::new(); scenario.receivers.len()];
    let mut failed = false;
    for run in 0..a.runs {
        scenario.rng_seed = base_seed.wrapping_add(run);
        let result = simulate(&scenario, &session)?;
        let tag = |i: usize| {
            if a.runs == 1 {
                format!("r{i}")
            } else {
                format!("r{i}_run{run}")
            }
        };
        for (i, (rx, out)) in result
            .receivers
            .iter()
            .zip(&result.sim.receivers)
            .enumerate()
        {
            let trace = a.out.join(format!("trace_{}.txt", tag(i)));
            let f = fs::File::create(&trace)
                .with_context(|| format!("creating {}", trace.display()))?;
            write_trace(BufWriter::new(f), &out.trace)?;
            match &rx.metrics {
                Some(m) => {
                    write_file(&a.out.join(format!("metrics_{}.txt", tag(i))), m.to_text())?;
                    println!(
                        "receiver {i} seed {} time {:.3} s",
                        scenario.rng_seed, m.time
                    );
                    per_receiver[i].push(*m);
                }
                None => {
                    println!(
                        "receiver {i} seed {} timeout after {} symbols",
                        scenario.rng_seed, rx.counters.received_symbols
                    );
                    failed = true;
                }
            }
        }
    }
    for (i, runs) in per_receiver.iter().enumerate() {
        match runs.len() {
            0 => {}
            1 => print!("{}", runs[0].to_text()),
            _ => {
                let r = report(runs)?;
                write_file(&a.out.join(format!("report_r{i}.txt")), r.to_text())?;
                println!("receiver {i} over {} runs", r.runs);
                print!("{}", r.to_table());
            }
        }
    }
    if failed {
        bail!("some receivers did not decode within the scenario duration");
    }
    Ok(())
}

fn plan(a: PlanArgs) -> Result<()> {
    let (blocks, levels) = match (a.blocks, &a.file) {
        (Some(b), None) => (b, a.codec.levels.unwrap_or(1)),
        (None, Some(file)) => {
            let channel = load_scenario(a.scenario.as_deref())?.channel;
            let codec = CodecChoice::parse(&a.codec.codec)?;
            let session = prepare_file(file, &channel, codec, a.codec.levels)?;
            let spec = session.params().spec;
            println!("k {}", spec.k);
            println!("n {}", spec.n);
            println!("symbol_size {}", spec.symbol_size);
            println!("buffer_time {}", session.buffer_time());
            (spec.n, session.plan().levels())
        }
        _ => bail!("give either --blocks or --file"),
    };
    let plan = build_plan(blocks, levels)?;
    println!("blocks {}", plan.blocks());
    println!("levels {}", plan.levels());
    let offsets: Vec<String> = plan.offsets().iter().map(ToString::to_string).collect();
    println!("offsets {}", offsets.join(" "));
    for b in 0..a.buffers {
        let row: Vec<String> = (1..=levels).map(|l| plan.block(l, b).to_string()).collect();
        println!("buffer {b}: {}", row.join(" "));
    }
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let runs = a
        .files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            TransferMetrics::parse(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let r = report(&runs)?;
    if a.table {
        print!("{}", r.to_table());
    } else {
        print!("{}", r.to_text());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Send(a) => send(a),
        Command::Recv(a) => recv(a),
        Command::Sim(a) => sim(a),
        Command::Plan(a) => plan(a),
        Command::Metrics(a) => metrics(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
