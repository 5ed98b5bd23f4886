use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onespike::bench::{emit_report, report_csv, run_sweep, ReportFormat, SweepSpec, DEFAULT_MEMORY_LIMIT};
use onespike::data::{
    gen_synthetic, load_mnist_idx, load_spikes, save_spikes, DatasetMeta, EncodedDataset, SpikeSource, TtfsDataset,
    TtfsEncoderCfg,
};
use onespike::training::{evaluate, load_checkpoint, run_training, yinyang_splits, ModelVariant, RunConfig};
use onespike::Error;

#[derive(Parser)]
#[command(name = "onespike", version, about = "Single-spike SNN training and benchmarking")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time forward and backward passes of fast and sequential models.
    Bench(BenchArgs),
    /// Train from a JSON run config.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Accuracy and spike counts of a checkpoint on an encoded dataset.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1024)]
        batch: usize,
    },
    /// Generate spike datasets.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Encode analog data as spikes.
    #[command(subcommand)]
    Encode(EncodeCmd),
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "100")]
    units: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "128")]
    steps: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "128")]
    batch: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    layers: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "fast,seq-single")]
    models: Vec<String>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 3)]
    warmup: usize,
    /// `false`, `true`, or `both`.
    #[arg(long, default_value = "false")]
    fixed_beta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip grid points estimated to need more than this many MiB.
    #[arg(long, default_value_t = DEFAULT_MEMORY_LIMIT >> 20)]
    memory_limit_mib: u64,
    /// Matrix-multiply threads, shared by every model.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Use double precision.
    #[arg(long)]
    f64: bool,
    /// `.csv` or `.json`; CSV to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCmd {
    /// TTFS-encoded Yin-Yang points.
    Yinyang {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        t: usize,
    },
    /// Unlabelled Bernoulli spikes with per-sample rates.
    Synth {
        #[arg(long)]
        b: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        /// Rate range in Hz, `lo..hi`.
        #[arg(long, default_value = "0..200")]
        rate: String,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EncodeCmd {
    /// Time-to-first-spike code of IDX images.
    Ttfs {
        #[arg(long)]
        idx: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 100)]
        t: usize,
        /// Keep only the first N images.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Rate(_) | Error::DegenerateModel(_) => 2,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

fn parse_models(names: &[String]) -> Result<Vec<ModelVariant>, Error> {
    names.iter().map(|s| s.trim().parse()).collect()
}

fn parse_fixed_beta(s: &str) -> Result<Vec<bool>, Error> {
    match s {
        "false" => Ok(vec![false]),
        "true" => Ok(vec![true]),
        "both" => Ok(vec![false, true]),
        other => Err(Error::Config(format!("--fixed-beta must be false, true or both, got {other:?}"))),
    }
}

fn parse_rate(s: &str) -> Result<(f64, f64), Error> {
    let bad = || Error::Config(format!("--rate expects lo..hi in Hz, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn bench(a: BenchArgs) -> Result<(), Error> {
    if a.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    // read once by the matrix-multiply backend when built with threading
    std::env::set_var("MATMUL_NUM_THREADS", a.threads.to_string());
    let spec = SweepSpec {
        units: a.units,
        steps: a.steps,
        batches: a.batch,
        layers: a.layers,
        models: parse_models(&a.models)?,
        reps: a.reps,
        warmup: a.warmup,
        fixed_beta: parse_fixed_beta(&a.fixed_beta)?,
        seed: a.seed,
        memory_limit: a.memory_limit_mib << 20,
    };
    let report = if a.f64 { run_sweep::<f64>(&spec)? } else { run_sweep::<f32>(&spec)? };
    for s in &report.skipped {
        eprintln!("skipped {} n={} t={} b={} layers={}: {}", s.model, s.n, s.t, s.b, s.layers, s.reason);
    }
    match a.out {
        Some(path) => {
            emit_report(&report, &path, ReportFormat::from_path(&path))?;
            eprintln!("wrote {} records to {}", report.records.len(), path.display());
        }
        None => print!("{}", report_csv(&report.records)),
    }
    Ok(())
}

fn train(config: PathBuf) -> Result<(), Error> {
    let cfg = RunConfig::load(&config)?;
    let (_, summary) = run_training::<f32>(&cfg, |m| {
        eprintln!(
            "epoch {:>3}  lr {:.1e}  loss {:.4}  acc {:.4}  activity {:.4}  {:.1}s",
            m.epoch, m.lr, m.loss, m.accuracy, m.hidden_spikes_per_neuron, m.seconds
        );
    })?;
    if let Some(t) = &summary.test {
        println!("{}", serde_json::to_string(t).map_err(|e| Error::Format(e.to_string()))?);
    }
    Ok(())
}

fn eval(ckpt: PathBuf, data: PathBuf, batch: usize) -> Result<(), Error> {
    let trainer = load_checkpoint::<f32>(&ckpt)?;
    let ds = load_spikes(&data)?;
    let m = evaluate(&trainer.net, &ds, batch)?;
    println!("{}", serde_json::to_string(&m).map_err(|e| Error::Format(e.to_string()))?);
    Ok(())
}

fn gen(cmd: GenCmd) -> Result<(), Error> {
    let (ds, out) = match cmd {
        GenCmd::Yinyang { n, seed, out, t } => {
            let (train, _) = yinyang_splits(n, 0, seed, t)?;
            (train.encode_all(1.0, seed)?, out)
        }
        GenCmd::Synth {
            b,
            n,
            t,
            rate,
            dt,
            seed,
            out,
        } => {
            let spikes = gen_synthetic::<f32>(b, n, t, dt, parse_rate(&rate)?, seed)?;
            let meta = DatasetMeta {
                steps: t,
                dt_ms: dt,
                inputs: n,
                classes: 0,
                encoder: "synthetic".into(),
                seed,
            };
            (EncodedDataset::from_spikes(&spikes, Vec::new(), meta)?, out)
        }
    };
    save_spikes(&out, &ds)?;
    eprintln!("wrote {} samples to {}", ds.samples(), out.display());
    Ok(())
}

fn encode(cmd: EncodeCmd) -> Result<(), Error> {
    let EncodeCmd::Ttfs {
        idx,
        labels,
        t,
        limit,
        out,
    } = cmd;
    let (x, y) = load_mnist_idx::<f32>(&idx, &labels)?;
    let classes = y.iter().max().map_or(0, |m| m + 1);
    let mut ds = TtfsDataset::from_tensor(&x, y, classes, TtfsEncoderCfg { i_max: 1.0, steps: t })?;
    if let Some(n) = limit {
        ds = ds.take(n);
    }
    let enc = ds.encode_all(1.0, 0)?;
    save_spikes(&out, &enc)?;
    eprintln!("wrote {} samples to {}", SpikeSource::<f32>::len(&enc), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Bench(a) => bench(a),
        Cmd::Train { config } => train(config),
        Cmd::Eval { ckpt, data, batch } => eval(ckpt, data, batch),
        Cmd::Gen(c) => gen(c),
        Cmd::Encode(c) => encode(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
