//! Front end for the `phasorconv` binary: verification suites, stage
//! benchmarks, analytical FLOP tables, the training demo and tensor
//! fixtures.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or internal error.

pub mod bench;
pub mod commands;
pub mod fixture;
pub mod schema;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasorconv::flops::ElementConvention;
use phasorconv::nn::TrainConfig;
use phasorconv::{Backend, CostModel};
use serde::Serialize;
use thiserror::Error;

pub const THREADS_ENV: &str = "PHASORCONV_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] phasorconv::Error),
    #[error(transparent)]
    Fixture(#[from] fixture::FixtureError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report does not match its schema: {0:?}")]
    Schema(Vec<String>),
}

#[derive(Debug, Parser)]
#[command(
    name = "phasorconv",
    version,
    about = "FFT convolution with rectangular and phasor spectral products"
)]
pub struct Cli {
    /// Worker threads for the spectral pipeline; PHASORCONV_THREADS overrides.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the oracle, gradient, round-trip and exact-count suites.
    Verify(VerifyArgs),
    /// Time every pipeline stage of forward + backward.
    Bench(BenchArgs),
    /// Print the analytical cost tables.
    Flops(FlopsArgs),
    /// Train the tiny network on the synthetic task.
    Train(TrainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dtype {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Direct,
    Rect,
    Phasor,
    All,
}

impl BackendChoice {
    fn backends(self) -> Vec<Backend> {
        match self {
            BackendChoice::Direct => vec![Backend::DirectSpatial],
            BackendChoice::Rect => vec![Backend::SpectralRect],
            BackendChoice::Phasor => vec![Backend::SpectralPhasor],
            BackendChoice::All => Backend::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    PaperN,
    ImplL,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "small")]
    pub scale: verify::Scale,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Leave wall-clock fields out of the report.
    #[arg(long)]
    pub omit_timing: bool,
    /// Fault injection: flip the spectral conjugation convention.
    #[arg(long, hide = true)]
    pub sabotage_conj: bool,
}

#[derive(Debug, Args)]
pub struct Geometry {
    #[arg(long = "in-ch", default_value_t = 3)]
    pub in_channels: usize,
    #[arg(long = "out-ch", default_value_t = 4)]
    pub out_channels: usize,
    #[arg(long, default_value_t = 16)]
    pub image: usize,
    #[arg(long, default_value_t = 3)]
    pub kernel: usize,
    #[arg(long, default_value_t = 1)]
    pub pad: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Batch size, or a comma-separated sweep such as 1,8,32,128.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub batch: Vec<usize>,
    #[command(flatten)]
    pub geometry: Geometry,
    /// One backend, a comma-separated list, or `all`.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    pub backend: Vec<BackendChoice>,
    #[arg(long, default_value_t = 4)]
    pub warmup: usize,
    #[arg(long, default_value_t = 4)]
    pub active: usize,
    #[arg(long, value_enum, default_value = "f32")]
    pub dtype: Dtype,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Input tensor fixture replacing the random input.
    #[arg(long, requires = "kernel_fixture")]
    pub input_fixture: Option<PathBuf>,
    /// Kernel tensor fixture replacing the random kernel.
    #[arg(long, requires = "input_fixture")]
    pub kernel_fixture: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Zero every wall-clock field so reports are reproducible.
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug, Args)]
pub struct FlopsArgs {
    #[arg(long, default_value_t = 8)]
    pub batch: usize,
    #[command(flatten)]
    pub geometry: Geometry,
    #[arg(long, value_enum, default_value = "paper-n")]
    pub variant: Variant,
    /// The FFT's hidden constant C.
    #[arg(long = "c-fft", default_value_t = 2.5)]
    pub c_fft: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "rect")]
    pub backend: BackendChoice,
    /// Run two backends, e.g. `rect,phasor`, and compare their traces.
    #[arg(long, value_delimiter = ',', conflicts_with = "backend")]
    pub compare: Option<Vec<BackendChoice>>,
    #[arg(long, default_value_t = 300)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, value_enum, default_value = "f64")]
    pub dtype: Dtype,
    /// Write the trace JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Zero every wall-clock field so traces are reproducible.
    #[arg(long)]
    pub omit_timing: bool,
}

/// `PHASORCONV_THREADS` wins over `--threads` when it parses.
pub fn resolve_threads(flag: usize) -> Result<usize, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
        Err(_) => flag,
    };
    if threads == 0 {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    Ok(threads)
}

/// Serializes, checks against `schema`, and writes with a trailing newline.
fn write_json<R: Serialize>(path: &Path, report: &R, schema: &str) -> Result<(), CliError> {
    let value = serde_json::to_value(report).expect("reports serialize");
    let errors = schema::validate_str(&value, schema);
    if !errors.is_empty() {
        return Err(CliError::Schema(errors));
    }
    let mut text = serde_json::to_string_pretty(&value).expect("values serialize");
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_verify(args: &VerifyArgs, threads: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let report = verify::run(&verify::VerifyConfig {
        scale: args.scale,
        seed: args.seed,
        threads,
        sabotage_conj: args.sabotage_conj,
        omit_timing: args.omit_timing,
    })?;
    let _ = write!(out, "{}", report.to_table());
    if let Some(path) = &args.json {
        write_json(path, &report, schema::VERIFY)?;
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_bench(args: &BenchArgs, threads: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = bench::BenchConfig {
        batches: args.batch.clone(),
        in_channels: args.geometry.in_channels,
        out_channels: args.geometry.out_channels,
        image: args.geometry.image,
        kernel: args.geometry.kernel,
        padding: args.geometry.pad,
        backends: Backend::ALL
            .into_iter()
            .filter(|b| args.backend.iter().any(|c| c.backends().contains(b)))
            .collect(),
        warmup: args.warmup,
        active: args.active,
        threads,
        seed: args.seed,
        omit_timing: args.omit_timing,
    };
    bench::validate(&config)?;
    let report = match args.dtype {
        Dtype::F32 => bench::run::<f32>(&config, load_fixtures(args)?)?,
        Dtype::F64 => bench::run::<f64>(&config, load_fixtures(args)?)?,
    };
    let _ = write!(out, "{}", report.to_table());
    if let Some(path) = &args.json {
        write_json(path, &report, schema::BENCH)?;
    }
    if let Some(path) = &args.csv {
        write_text(path, &report.to_csv())?;
    }
    Ok(0)
}

type Operands<T> = (phasorconv::RealTensor4<T>, phasorconv::RealTensor4<T>);

fn load_fixtures<T: phasorconv::Real>(args: &BenchArgs) -> Result<Option<Operands<T>>, CliError> {
    match (&args.input_fixture, &args.kernel_fixture) {
        (Some(x), Some(w)) => Ok(Some((fixture::read_tensor(x)?, fixture::read_tensor(w)?))),
        _ => Ok(None),
    }
}

fn cmd_flops(args: &FlopsArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if !(args.c_fft >= 0.0 && args.c_fft.is_finite()) {
        return Err(CliError::Usage(format!(
            "--c-fft {} must be finite and non-negative",
            args.c_fft
        )));
    }
    let g = &args.geometry;
    let convention = match args.variant {
        Variant::PaperN => ElementConvention::PaperN,
        Variant::ImplL => ElementConvention::ImplementedL,
    };
    let model = CostModel::new(args.batch, g.in_channels, g.out_channels, g.image, g.kernel, g.pad)?
        .with_c_fft(args.c_fft)
        .with_convention(convention);
    let report = commands::flops_report(model);
    let _ = write!(out, "{}", report.to_table());
    if let Some(path) = &args.json {
        write_json(path, &report, schema::FLOPS)?;
    }
    Ok(0)
}

fn single(choice: BackendChoice) -> Result<Backend, CliError> {
    match choice.backends().as_slice() {
        [b] => Ok(*b),
        _ => Err(CliError::Usage(
            "training takes one backend per run; use --compare for two".into(),
        )),
    }
}

fn cmd_train(args: &TrainArgs, threads: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let backends = match &args.compare {
        Some(pair) if pair.len() == 2 => pair.iter().map(|&c| single(c)).collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(CliError::Usage("--compare takes exactly two backends".into())),
        None => vec![single(args.backend)?],
    };
    let config = TrainConfig {
        steps: args.steps,
        lr: args.lr,
        seed: args.seed,
        batch: args.batch,
        threads,
        ..TrainConfig::new(backends[0], args.steps, args.lr, args.seed)
    };
    let report = match args.dtype {
        Dtype::F32 => commands::train_report::<f32>(&config, &backends, args.omit_timing)?,
        Dtype::F64 => commands::train_report::<f64>(&config, &backends, args.omit_timing)?,
    };
    let _ = write!(out, "{}", report.summary());
    if let Some(path) = &args.out {
        write_json(path, &report, schema::TRAIN)?;
    }
    Ok(0)
}

/// Parses `args` (program name first) and runs the command, writing human
/// output to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let result = resolve_threads(cli.threads).and_then(|threads| match &cli.command {
        Command::Verify(a) => cmd_verify(a, threads, out),
        Command::Bench(a) => cmd_bench(a, threads, out),
        Command::Flops(a) => cmd_flops(a, out),
        Command::Train(a) => cmd_train(a, threads, out),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
