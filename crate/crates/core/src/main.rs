use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nullrank::bench::{render_report, run_benchmark, ReportFormat, DEFAULT_ORDERS};
use nullrank::nullrank::{check_nullrank, normal_rank_estimate, CheckOptions, Method};
use nullrank::system::read_system_file;
use nullrank::Tolerance;

#[derive(Parser)]
#[command(name = "nullrank", version, about = "Decide whether a descriptor system has a zero transfer function matrix")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run null-rank tests on a DSS v1 file.
    Check {
        file: PathBuf,
        /// `all` or a method number 1-5; may be repeated.
        #[arg(long = "method", value_parser = parse_method, default_value = "all")]
        methods: Vec<Vec<Method>>,
        /// Rank threshold; 0 selects the default rule.
        #[arg(long, default_value_t = 1e-7, value_parser = parse_tol)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of frequency samples for methods 4 and 5.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
    },
    /// Print the sampled normal-rank estimate of a DSS v1 file.
    Rank {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-7, value_parser = parse_tol)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
    },
    /// Run all methods on certified-zero cases.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ORDERS)]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 1e-7, value_parser = parse_tol)]
        tol: f64,
        /// Seeds per order.
        #[arg(long, default_value_t = 10)]
        seeds: u32,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn parse_method(s: &str) -> Result<Vec<Method>, String> {
    if s == "all" {
        return Ok(Method::ALL.to_vec());
    }
    s.parse::<u8>()
        .ok()
        .and_then(Method::from_id)
        .map(|m| vec![m])
        .ok_or_else(|| format!("expected `all` or 1-5, got `{s}`"))
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t >= 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a nonnegative number, got `{s}`")),
    }
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Check { file, methods, tol, seed, samples } => {
            let sys = match read_system_file(&file) {
                Ok(s) => s,
                Err(e) => return input_error(format!("{}: {e}", file.display())),
            };
            let opts = CheckOptions {
                methods: methods.into_iter().flatten().collect(),
                tol: Tolerance::new(tol),
                seed,
                sample_count: samples as usize,
                ..CheckOptions::default()
            };
            let results = check_nullrank(&sys, &opts);
            for r in &results {
                println!("method={} isnull={} evidence={} elapsed={:.6}", r.method, r.is_null as u8, r.evidence, r.elapsed);
                for d in r.diagnostics.iter().filter(|_| !r.is_null) {
                    eprintln!("method {}: {d}", r.method);
                }
            }
            if results.iter().all(|r| r.is_null) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Rank { file, tol, seed, samples } => {
            let sys = match read_system_file(&file) {
                Ok(s) => s,
                Err(e) => return input_error(format!("{}: {e}", file.display())),
            };
            println!("{}", normal_rank_estimate(&sys, Tolerance::new(tol), seed, samples as usize));
            ExitCode::SUCCESS
        }
        Command::Bench { orders, tol, seeds, seed, format, out } => {
            if orders.is_empty() {
                return input_error("--orders must not be empty");
            }
            let report = match run_benchmark(&orders, Tolerance::new(tol), seeds, &Method::ALL, seed) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let format = match format {
                Format::Text => ReportFormat::Text,
                Format::Csv => ReportFormat::Csv,
            };
            let text = render_report(&report.rows, format);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        return input_error(format!("{}: {e}", path.display()));
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
    }
}
