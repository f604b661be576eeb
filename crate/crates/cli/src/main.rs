use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bwp_core::channel::{run_fer, CsvSink, SweepPlan, SweepPoint};
use bwp_core::codec::{BwpCode, DecodeOptions, DecoderKind};
use bwp_core::layout::{describe_layout, describe_parameters, plan_layout, CodeConfig, LayoutParams};
use bwp_core::selftest;

mod bits;

/// Block-wise product eBCH codes with an inner RS erasure code.
#[derive(Parser)]
#[command(name = "bwp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the grid mapping and derived parameters.
    Plan(CodeArgs),
    /// Encode a packed message file into a frame.
    Encode(IoArgs),
    /// Decode a packed frame file into a message.
    Decode {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value = "plus1")]
        decoder: DecoderKind,
        #[arg(long, default_value_t = 32)]
        max_iters: usize,
    },
    /// Measure frame error rates over a binary symmetric channel.
    Simulate(SimulateArgs),
    /// Run the built-in consistency checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Code parameters: a key=value config file, overridden by flags.
#[derive(Args, Clone)]
struct CodeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Message bits.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Parity budget in bits.
    #[arg(long = "R")]
    r: Option<usize>,
    /// Block width in bits.
    #[arg(long = "b")]
    b: Option<usize>,
    /// RS parity blocks.
    #[arg(long = "f")]
    f: Option<usize>,
}

impl CodeArgs {
    fn params(&self) -> Result<LayoutParams> {
        let mut params = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                LayoutParams::parse(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => {
                let (Some(k), Some(r), Some(b), Some(f)) = (self.k, self.r, self.b, self.f) else {
                    bail!("give --config or all of --K --R --b --f");
                };
                LayoutParams::new(k, r, b, f)
            }
        };
        if let Some(k) = self.k {
            params.message_bits = k;
        }
        if let Some(r) = self.r {
            params.parity_bits = r;
        }
        if let Some(b) = self.b {
            params.block_bits = b;
        }
        if let Some(f) = self.f {
            params.rs_parity = f;
        }
        Ok(params)
    }

    fn config(&self) -> Result<CodeConfig> {
        let params = self.params()?;
        plan_layout(&params).context("infeasible layout")
    }
}

#[derive(Args)]
struct IoArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// One or more of unique, plus1, plus2 (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "plus1")]
    decoder: Vec<DecoderKind>,
    #[arg(long, value_delimiter = ',', conflicts_with = "snr_list", required_unless_present = "snr_list")]
    rber_list: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    snr_list: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    max_iters: usize,
    #[arg(long, default_value_t = 100)]
    target_failures: u64,
    #[arg(long, default_value_t = 100_000)]
    frame_cap: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Series label written to every row; defaults to the code parameters.
    #[arg(long)]
    label: Option<String>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow plans that resolve FER below the default floor.
    #[arg(long)]
    allow_deep: bool,
}

/// Failure categories mapped to exit codes.
enum Exit {
    Ok,
    DecodeFailure,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Exit::Ok) => ExitCode::SUCCESS,
        Ok(Exit::DecodeFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Exit> {
    match command {
        Command::Plan(code) => {
            let cfg = code.config()?;
            print!("{}", describe_layout(&cfg));
            println!();
            print!("{}", describe_parameters(&cfg));
            Ok(Exit::Ok)
        }
        Command::Encode(io) => {
            let code = BwpCode::new(io.code.config()?)?;
            let message = read_bits(&io.input, code.message_len())?;
            let frame = code.encode(&message)?;
            write_bits(&io.out, &frame)?;
            Ok(Exit::Ok)
        }
        Command::Decode { io, decoder, max_iters } => {
            let code = BwpCode::new(io.code.config()?)?;
            let frame = read_bits(&io.input, code.frame_len())?;
            let options = DecodeOptions {
                max_iters,
                decoder,
                verify_syndromes: false,
            };
            let out = code.decode(&frame, &options)?;
            let s = &out.stats;
            println!("status = {}", if out.is_success() { "success" } else { "failure" });
            println!("iterations = {}", s.iterations);
            println!("final_phase = {}", s.final_phase);
            println!("corrections = {},{},{}", s.corrections[0], s.corrections[1], s.corrections[2]);
            println!("list_invocations = {}", s.list_invocations);
            println!("list_commits = {}", s.list_commits);
            println!("rs_recoveries = {}", s.rs_recoveries);
            if out.is_success() {
                write_bits(&io.out, &out.message)?;
                Ok(Exit::Ok)
            } else {
                Ok(Exit::DecodeFailure)
            }
        }
        Command::Simulate(args) => simulate(args),
        Command::Selftest { seed } => {
            let mut failed = 0;
            for report in selftest::run_all(seed) {
                match report.result {
                    Ok(detail) => println!("PASS {}: {detail}", report.name),
                    Err(detail) => {
                        failed += 1;
                        println!("FAIL {}: {detail}", report.name);
                    }
                }
            }
            if failed > 0 {
                bail!("{failed} self-test checks failed");
            }
            Ok(Exit::Ok)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<Exit> {
    let cfg = args.code.config()?;
    let params = cfg.params.clone();
    let rate = cfg.rate();
    let code = BwpCode::new(cfg)?;
    let points: Vec<SweepPoint> = if args.snr_list.is_empty() {
        args.rber_list.iter().map(|&r| SweepPoint::from_rber(r)).collect()
    } else {
        args.snr_list.iter().map(|&s| SweepPoint::from_snr(s, rate)).collect()
    };
    let label = args.label.clone().unwrap_or_else(|| {
        format!(
            "K{}-R{}-b{}-f{}",
            params.message_bits, params.parity_bits, params.block_bits, params.rs_parity
        )
    });
    let plans: Vec<SweepPlan> = args
        .decoder
        .iter()
        .map(|&decoder| SweepPlan {
            label: label.clone(),
            params: params.clone(),
            options: DecodeOptions {
                max_iters: args.max_iters,
                decoder,
                verify_syndromes: false,
            },
            points: points.clone(),
            target_failures: args.target_failures,
            frame_cap: args.frame_cap,
            seed: args.seed,
            allow_deep: args.allow_deep,
        })
        .collect();
    for plan in &plans {
        plan.validate()?;
    }

    let out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = CsvSink::new(out)?;
    let mut summary = Vec::new();
    for plan in &plans {
        for rec in run_fer(&code, plan, |r| sink.write(r))? {
            summary.push(format!(
                "{} rber={:.3e}: {}/{} frames failed, {} miscorrected, {:.1}s",
                rec.decoder,
                rec.rber,
                rec.failures,
                rec.frames,
                rec.miscorrections,
                rec.wall_time.as_secs_f64()
            ));
        }
    }
    sink.into_inner()?.flush()?;
    for line in summary {
        eprintln!("{line}");
    }
    Ok(Exit::Ok)
}

fn read_bits(path: &Path, n: usize) -> Result<Vec<u8>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    bits::unpack(&bytes, n).with_context(|| format!("{}", path.display()))
}

fn write_bits(path: &Path, bits: &[u8]) -> Result<()> {
    fs::write(path, bits::pack(bits)).with_context(|| format!("writing {}", path.display()))
}
