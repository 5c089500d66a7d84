//! The `topc` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 malformed input, 4 internal
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::codec::{self, Backend, CodecError, PayloadShape, MAGIC};
use crate::field::{Dims, ScalarField};
use crate::metrics::{bottleneck, max_norm, p_norm, psnr, wasserstein, MetricsError};
use crate::persistence::compute_diagram;
use crate::pipeline::{compress, compression_rate, decompress, CompressOptions, Epsilon, External};
use crate::rawio::{self, Dtype, RawError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Format(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<RawError> for CliError {
    fn from(e: RawError) -> Self {
        match e {
            RawError::Io { path, source } => CliError::Io { path, source },
            other => CliError::Format(other.to_string()),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        match e {
            E::Codec(c) => CliError::Format(c.to_string()),
            E::InvalidEpsilon(_) => CliError::Usage(e.to_string()),
            E::Metrics(MetricsError::DimsMismatch | MetricsError::TooLarge { .. }) => CliError::Usage(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        crate::Error::from(e).into()
    }
}

#[derive(Debug, Parser)]
#[command(name = "topc", version, about = "Topology-preserving lossy compression of scalar fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a raw grid.
    Compress(CompressArgs),
    /// Decompress an archive to a raw grid.
    Decompress(DecompressArgs),
    /// Export the persistence diagram of a raw grid or archive as CSV.
    Diagram(DiagramArgs),
    /// Compare two fields and print a JSON report.
    Compare(CompareArgs),
    /// Describe an archive.
    Stats(StatsArgs),
}

/// Dims and dtype of a raw input; both fall back to the sidecar.
#[derive(Debug, Args)]
struct RawArgs {
    /// Grid size as NX,NY[,NZ].
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    #[arg(long, value_parser = parse_dtype)]
    dtype: Option<Dtype>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("threshold").required(true).args(["epsilon", "epsilon_abs"])))]
struct CompressArgs {
    input: PathBuf,
    #[command(flatten)]
    raw: RawArgs,
    /// Threshold as a percentage of the value range, e.g. 5%.
    #[arg(long, value_parser = parse_percent)]
    epsilon: Option<f64>,
    /// Absolute threshold.
    #[arg(long)]
    epsilon_abs: Option<f64>,
    /// Also bound the pointwise error by 3ε/2.
    #[arg(long)]
    pointwise: bool,
    /// Store an external lossy stream next to the topological data.
    #[arg(long, value_enum)]
    external: Option<ExternalArg>,
    #[arg(long, value_enum, default_value = "bzip2")]
    backend: BackendArg,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExternalArg {
    Uq8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Bzip2,
    Deflate,
}

#[derive(Debug, Args)]
struct DecompressArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_parser = parse_dtype, default_value = "f64")]
    dtype: Dtype,
}

#[derive(Debug, Args)]
struct DiagramArgs {
    input: PathBuf,
    #[command(flatten)]
    raw: RawArgs,
    /// Output CSV; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    raw: RawArgs,
    /// Also compute bottleneck and Wasserstein distances.
    #[arg(long)]
    diagrams: bool,
    /// Archive whose compression rate should be reported.
    #[arg(long)]
    archive: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    input: PathBuf,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    rawio::parse_dims(s).map_err(|e| e.to_string())
}

fn parse_dtype(s: &str) -> Result<Dtype, String> {
    s.parse().map_err(|e: RawError| e.to_string())
}

fn parse_percent(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .trim_end_matches('%')
        .parse()
        .map_err(|_| format!("expected a percentage such as 5%, got {s:?}"))?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("percentage must be finite and non-negative, got {s:?}"))
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn is_archive(path: &Path) -> Result<bool, CliError> {
    let mut head = [0u8; 4];
    let mut file = fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let n = std::io::Read::read(&mut file, &mut head).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(n == 4 && &head == MAGIC)
}

/// Reads a raw grid; without a sidecar, --dims is required and the dtype
/// defaults to f64.
fn read_raw(path: &Path, raw: &RawArgs) -> Result<ScalarField, CliError> {
    if raw.dims.is_some() && raw.dtype.is_some() {
        return Ok(rawio::read_raw(path, raw.dims, raw.dtype)?);
    }
    if rawio::sidecar_path(path).exists() {
        return Ok(rawio::read_raw(path, raw.dims, raw.dtype)?);
    }
    match raw.dims {
        Some(dims) => Ok(rawio::read_raw(path, Some(dims), Some(raw.dtype.unwrap_or_default()))?),
        None => Err(CliError::Usage(format!(
            "{}: no --dims given and no sidecar header found",
            path.display()
        ))),
    }
}

/// Loads a raw grid, or decompresses an archive.
fn load(path: &Path, raw: &RawArgs) -> Result<ScalarField, CliError> {
    if is_archive(path)? {
        Ok(decompress(&read_file(path)?)?)
    } else {
        read_raw(path, raw)
    }
}

fn run_compress(args: CompressArgs) -> Result<(), CliError> {
    let field = read_raw(&args.input, &args.raw)?;
    let epsilon = match (args.epsilon, args.epsilon_abs) {
        (Some(p), None) => Epsilon::Percent(p),
        (None, Some(x)) => Epsilon::Absolute(x),
        _ => return Err(CliError::Usage("give exactly one of --epsilon and --epsilon-abs".into())),
    };
    let options = CompressOptions::new(epsilon)
        .pointwise(args.pointwise)
        .external(args.external.map(|ExternalArg::Uq8| External::Uq8))
        .backend(match args.backend {
            BackendArg::Bzip2 => Backend::Bzip2,
            BackendArg::Deflate => Backend::Deflate,
        });
    let bytes = compress(&field, &options)?;
    write_file(&args.output, &bytes)
}

fn run_decompress(args: DecompressArgs) -> Result<(), CliError> {
    let field = decompress(&read_file(&args.input)?)?;
    Ok(rawio::write_raw(&args.output, &field, args.dtype)?)
}

fn run_diagram(args: DiagramArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let field = load(&args.input, &args.raw)?;
    let mut csv = Vec::new();
    compute_diagram(&field)
        .write_csv(&mut csv)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    match args.output {
        Some(path) => write_file(&path, &csv),
        None => stdout.write_all(&csv).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn run_compare(args: CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let f = load(&args.a, &args.raw)?;
    let g = load(&args.b, &args.raw)?;
    if f.dims() != g.dims() {
        return Err(CliError::Usage(format!(
            "fields have different dims {:?} and {:?}",
            f.dims(),
            g.dims()
        )));
    }
    let (bn, ws) = if args.diagrams {
        let (df, dg) = (compute_diagram(&f), compute_diagram(&g));
        (number(bottleneck(&df, &dg)), number(wasserstein(&df, &dg)?))
    } else {
        (Value::Null, Value::Null)
    };
    let archive = match &args.archive {
        Some(p) => Some(p.clone()),
        None if is_archive(&args.b)? => Some(args.b.clone()),
        None => None,
    };
    let rate = match archive {
        Some(p) => number(compression_rate(f.len(), read_file(&p)?.len())),
        None => Value::Null,
    };
    let report = json!({
        "bottleneck": bn,
        "wasserstein": ws,
        "psnr": number(psnr(&f, &g)?),
        "max_norm": number(max_norm(&f, &g)?),
        "l2_norm": number(p_norm(&f, &g, 2.0)?),
        "compression_rate": rate,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("json values serialize")).map_err(
        |source| CliError::Io {
            path: "<stdout>".into(),
            source,
        },
    )
}

fn run_stats(args: StatsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bytes = read_file(&args.input)?;
    let d = codec::decode(&bytes)?;
    let q = &d.quantized;
    let shape = PayloadShape::of(q, d.external.as_ref().map(Vec::len));
    let flags = d.header.flags;
    let backend = match flags.backend {
        Backend::Bzip2 => "bzip2",
        Backend::Deflate => "deflate",
    };
    let text = format!(
        "version: {}\nbackend: {backend}\npointwise: {}\nexternal: {}\nfixed_step: {}\n\
         dims: {},{},{}\nvertices: {}\nepsilon: {}\nn_c: {}\nn_i: {}\npayload_bytes: {}\n\
         archive_bytes: {}\nrate: {}\n",
        d.header.version,
        flags.pointwise,
        flags.external,
        flags.fixed_step,
        q.dims.nx,
        q.dims.ny,
        q.dims.nz,
        q.len(),
        d.epsilon,
        shape.n_c,
        shape.n_i,
        shape.payload_len(),
        bytes.len(),
        compression_rate(q.len(), bytes.len()),
    );
    stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

/// Parses `argv` and runs the command, writing reports to `stdout`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version
            let _ = write!(stdout, "{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    match cli.command {
        Command::Compress(a) => run_compress(a),
        Command::Decompress(a) => run_decompress(a),
        Command::Diagram(a) => run_diagram(a, stdout),
        Command::Compare(a) => run_compare(a, stdout),
        Command::Stats(a) => run_stats(a, stdout),
    }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match run(std::env::args_os(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("topc: {}", e.to_string().trim_end());
            ExitCode::from(e.code())
        }
    }
}
