//! `abcode`: batch encoder, decoder and analysis tool for almost-balanced codes.
//!
//! Sequences travel one per line as digit strings over `0..q`.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufWriter, Write};
use std::process::ExitCode;

use almost_balanced::bounds::{table_bounds, BoundsTable};
use almost_balanced::{validate_config, AlphaSq, Balancer, CodecConfig, Error, Mode, SymbolSequence};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "abcode", version, about = "Encode and decode almost-balanced sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode each stdin line of length n-1 into a length-n codeword.
    Encode(CodeArgs),
    /// Invert `encode` line by line.
    Decode(CodeArgs),
    /// Report encoder iteration counts for each stdin line.
    Stats {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print threshold brackets on alpha for a range of alphabet sizes.
    Bounds {
        /// Inclusive range of alphabet sizes, e.g. 2..7.
        #[arg(long, default_value = "2..7")]
        q_range: String,
        /// Grid step, as a decimal or a fraction.
        #[arg(long, default_value = "0.005")]
        grid: String,
        /// Also evaluate the finite-length density at this n.
        #[arg(long)]
        check_n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check that a configuration admits a single redundancy symbol.
    Validate(CodeArgs),
}

#[derive(Args, Clone)]
struct CodeArgs {
    #[arg(long, default_value = "binary")]
    mode: Mode,
    /// Codeword length.
    #[arg(long)]
    n: usize,
    /// alpha squared, as NUM/DEN or an integer.
    #[arg(long)]
    alpha2: AlphaSq,
    /// Alphabet size; defaults to 2 for binary and 4 otherwise.
    #[arg(long)]
    q: Option<u8>,
    #[arg(long)]
    precision_bits: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn line(number: usize, err: &Error) -> Self {
        let code = match err {
            Error::IterationGuardExceeded { .. } => 4,
            Error::InvalidProbability { .. }
            | Error::InsufficientCompression { .. }
            | Error::OutputTooLong { .. } => 2,
            _ => 3,
        };
        Failure { code, message: format!("line {number}: {err}") }
    }
}

impl CodeArgs {
    fn config(&self) -> CodecConfig {
        let q = self.q.unwrap_or(self.mode.default_q());
        let cfg = CodecConfig::new(self.mode, self.n, q, self.alpha2);
        match self.precision_bits {
            Some(bits) => cfg.with_precision_bits(bits),
            None => cfg,
        }
    }

    fn balancer(&self) -> Result<Balancer, Failure> {
        Balancer::new(self.config()).map_err(|e| Failure::config(e.to_string()))
    }
}

fn read_lines() -> Result<Vec<String>, Failure> {
    io::stdin()
        .lock()
        .lines()
        .map(|l| l.map(|s| s.trim_end_matches('\r').to_owned()))
        .collect::<io::Result<_>>()
        .map_err(|e| Failure { code: 3, message: format!("reading stdin: {e}") })
}

/// Applies `f` to every line in parallel. Results come back in input order;
/// everything before the first failure is still returned.
fn process<T: Send>(
    lines: &[String],
    q: u8,
    f: impl Fn(&SymbolSequence) -> Result<T, Error> + Sync,
) -> (Vec<T>, Option<Failure>) {
    let results: Vec<Result<T, Failure>> = lines
        .par_iter()
        .enumerate()
        .map(|(k, line)| {
            SymbolSequence::parse(q, line).and_then(|x| f(&x)).map_err(|e| Failure::line(k + 1, &e))
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => out.push(v),
            Err(fail) => return (out, Some(fail)),
        }
    }
    (out, None)
}

fn emit(lines: impl IntoIterator<Item = String>) -> Result<(), Failure> {
    let mut out = BufWriter::new(io::stdout().lock());
    let io_err = |e: io::Error| Failure { code: 1, message: format!("writing stdout: {e}") };
    for line in lines {
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn code(args: &CodeArgs, decode: bool) -> Result<(), Failure> {
    let balancer = args.balancer()?;
    let lines = read_lines()?;
    let (done, failure) = process(&lines, balancer.config().q, |x| {
        if decode {
            balancer.decode(x)
        } else {
            balancer.encode(x).map(|r| r.codeword)
        }
    });
    emit(done.iter().map(ToString::to_string))?;
    failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct Stats {
    count: usize,
    mean: f64,
    max: usize,
    histogram: BTreeMap<usize, usize>,
    iterations: Vec<usize>,
}

fn stats(args: &CodeArgs, format: Format) -> Result<(), Failure> {
    let balancer = args.balancer()?;
    let lines = read_lines()?;
    let (iterations, failure) = process(&lines, balancer.config().q, |x| balancer.encode(x).map(|r| r.iterations));
    if let Some(fail) = failure {
        return Err(fail);
    }
    let mut histogram = BTreeMap::new();
    for &it in &iterations {
        *histogram.entry(it).or_insert(0) += 1;
    }
    let count = iterations.len();
    let mean = if count == 0 { 0.0 } else { iterations.iter().sum::<usize>() as f64 / count as f64 };
    let max = iterations.iter().copied().max().unwrap_or(0);
    let report = Stats { count, mean, max, histogram, iterations };
    match format {
        Format::Json => emit([serde_json::to_string(&report).expect("stats serialise")]),
        Format::Text => {
            let hist = report.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ");
            let summary = [
                format!("# count {count}"),
                format!("# mean {mean:.6}"),
                format!("# max {max}"),
                format!("# histogram {hist}"),
            ];
            emit(report.iterations.iter().map(ToString::to_string).chain(summary))
        }
    }
}

/// Parses `a/b`, an integer, or a plain decimal such as `0.005`.
fn parse_rational(s: &str) -> Option<Ratio<u64>> {
    if let Some((n, d)) = s.split_once('/') {
        let d: u64 = d.trim().parse().ok()?;
        let n: u64 = n.trim().parse().ok()?;
        return (d != 0).then(|| Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let scale = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Ratio::new(int.checked_mul(scale)?.checked_add(frac)?, scale))
}

fn parse_q_range(s: &str) -> Option<(u32, u32)> {
    let (lo, hi) = s.split_once("..=").or_else(|| s.split_once(".."))?;
    let (lo, hi) = (lo.trim().parse().ok()?, hi.trim().parse().ok()?);
    (2 <= lo && lo <= hi && hi <= 1024).then_some((lo, hi))
}

#[derive(Serialize)]
struct BoundsRecord {
    q: u32,
    lower: String,
    upper: String,
    limit_lower: f64,
    limit_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    check_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density_upper: Option<f64>,
}

fn decimal(r: Ratio<u64>) -> String {
    let v = *r.numer() as f64 / *r.denom() as f64;
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

fn records(table: &BoundsTable) -> Vec<BoundsRecord> {
    table
        .rows
        .iter()
        .map(|row| BoundsRecord {
            q: row.q,
            lower: decimal(row.lower),
            upper: decimal(row.upper),
            limit_lower: row.limit_lower,
            limit_upper: row.limit_upper,
            check_n: row.finite.as_ref().map(|f| f.n),
            density_lower: row.finite.as_ref().and_then(|f| f.lower_density),
            density_upper: row.finite.as_ref().map(|f| f.upper_density),
        })
        .collect()
}

fn bounds(q_range: &str, grid: &str, check_n: Option<usize>, format: Format) -> Result<(), Failure> {
    let (lo, hi) = parse_q_range(q_range).ok_or_else(|| Failure::config(format!("invalid q range {q_range:?}")))?;
    let step = parse_rational(grid)
        .filter(|r| *r.numer() > 0)
        .ok_or_else(|| Failure::config(format!("invalid grid step {grid:?}")))?;
    let mut table = table_bounds(lo..=hi, step);
    if let Some(n) = check_n {
        if n == 0 {
            return Err(Failure::config("--check-n must be positive"));
        }
        table = table.with_finite_check(n);
    }
    let records = records(&table);
    match format {
        Format::Json => emit(records.iter().map(|r| serde_json::to_string(r).expect("record serialises"))),
        Format::Text => {
            let mut out = vec![format!(
                "{:>3}  {:>8}  {:>8}  {:>12}  {:>12}{}",
                "q",
                "lower",
                "upper",
                "limit(lower)",
                "limit(upper)",
                if check_n.is_some() { format!("  {:>12}  {:>12}", "F(lower)", "F(upper)") } else { String::new() }
            )];
            for r in &records {
                let mut line = format!(
                    "{:>3}  {:>8}  {:>8}  {:>12.8}  {:>12.8}",
                    r.q, r.lower, r.upper, r.limit_lower, r.limit_upper
                );
                if let Some(upper) = r.density_upper {
                    let lower = r.density_lower.map_or("-".to_owned(), |v| format!("{v:.8}"));
                    line.push_str(&format!("  {lower:>12}  {upper:>12.8}"));
                }
                out.push(line);
            }
            emit(out)
        }
    }
}

fn validate(args: &CodeArgs) -> Result<(), Failure> {
    let cfg = args.config();
    validate_config(&cfg).map_err(|e| Failure::config(e.to_string()))?;
    emit([format!(
        "ok: mode {} n {} q {} alpha^2 {} p_L {:.12} redundancy 1 symbol",
        cfg.mode,
        cfg.n,
        cfg.q,
        cfg.alpha_sq,
        cfg.p_low().to_f64()
    )])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Encode(args) => code(args, false),
        Command::Decode(args) => code(args, true),
        Command::Stats { code, format } => stats(code, *format),
        Command::Bounds { q_range, grid, check_n, format } => bounds(q_range, grid, *check_n, *format),
        Command::Validate(args) => validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(fail) => {
            eprintln!("abcode: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}
