use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use qunip_core::circuits::optimal_grover_iterations;
use qunip_core::statevec::DEFAULT_MAX_QUBITS;

/// Environment variable that overrides the qubit cap.
pub const MAX_QUBITS_ENV: &str = "QUNIP_MAX_QUBITS";

#[derive(Debug, Parser)]
#[command(
    name = "qunip",
    version,
    about = "State-vector circuits, entanglement audits, and interference path sums"
)]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Leave out the metadata block (timestamp, version).
    #[arg(long, global = true)]
    no_meta: bool,

    /// Worker count for operations that may parallelize.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    threads: u64,

    /// Also draw this many seeded measurement samples (demonstration only).
    #[arg(long, global = true)]
    shots: Option<u64>,

    #[arg(long, global = true, default_value_t = 0)]
    shots_seed: u64,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Bernstein-Vazirani single-query recovery of a hidden string.
    Bv {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=62))]
        d: u64,
        /// Hidden string as a bitstring, qubit 1 first (e.g. 101).
        #[arg(long)]
        a: String,
    },
    /// Deutsch-Jozsa on a truth-table file.
    Dj {
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
    },
    /// Grover search for one marked item.
    Grover {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=62))]
        d: u64,
        #[arg(long)]
        marked: u64,
        /// Defaults to floor(pi/4 sqrt(2^d)).
        #[arg(long)]
        iterations: Option<u64>,
    },
    /// Database preparation followed by the single-query lookup circuit.
    Db {
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
        /// Stimulus bitstring.
        #[arg(long)]
        a: String,
        /// Restrict the database to these patterns (must agree with the table).
        #[arg(long, value_name = "FILE")]
        patterns: Option<PathBuf>,
    },
    /// Factorization report for a state dump.
    Entangle {
        #[arg(long, value_name = "FILE")]
        state: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Detector amplitude of a lattice file.
    Interfere {
        #[arg(long, value_name = "FILE")]
        lattice: PathBuf,
        /// Also enumerate every path.
        #[arg(long)]
        bruteforce: bool,
    },
    /// Sweep barrier counts and time both amplitude methods.
    Bench(BenchArgs),
    /// Train an interference neuron on a CSV file.
    Fit {
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4096))]
        k: u64,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
        epochs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Input width used for the 2^d exact-realization reference (defaults to the feature count).
        #[arg(long)]
        d_equiv: Option<u32>,
    },
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Barrier counts: comma-separated values or inclusive ranges, e.g. 1..7,100000.
    #[arg(long)]
    b: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4096))]
    n: u64,
    /// Add brute-force rows (every N^b must stay under the path guard).
    #[arg(long)]
    compare: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A fully validated request.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Bv {
        d: usize,
        a: usize,
    },
    Dj {
        table: PathBuf,
    },
    Grover {
        d: usize,
        marked: usize,
        iterations: usize,
    },
    Db {
        table: PathBuf,
        a: String,
        patterns: Option<PathBuf>,
    },
    Entangle {
        state: PathBuf,
        tol: f64,
    },
    Interfere {
        lattice: PathBuf,
        bruteforce: bool,
    },
    Bench {
        b_values: Vec<usize>,
        n: usize,
        compare: bool,
        seed: u64,
    },
    Fit {
        data: PathBuf,
        k: usize,
        lr: f64,
        epochs: usize,
        seed: u64,
        d_equiv: Option<u32>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bv { .. } => "bv",
            Command::Dj { .. } => "dj",
            Command::Grover { .. } => "grover",
            Command::Db { .. } => "db",
            Command::Entangle { .. } => "entangle",
            Command::Interfere { .. } => "interfere",
            Command::Bench { .. } => "bench",
            Command::Fit { .. } => "fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandPlan {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub meta: bool,
    pub threads: usize,
    pub shots: Option<u64>,
    pub shots_seed: u64,
    pub max_qubits: usize,
}

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, msg)
}

fn parse_hidden(flag: &str, s: &str, d: usize) -> Result<usize, clap::Error> {
    if s.is_empty() || s.len() > d || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(usage(
            ErrorKind::ValueValidation,
            format!("--{flag} {s:?} must be a bitstring of at most {d} bits"),
        ));
    }
    Ok(usize::from_str_radix(s, 2).expect("validated binary"))
}

/// Parses `1..7,10,12..14` into an ordered list.
pub fn parse_b_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim) {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| format!("--b entry {t:?} is not a positive integer"))
        };
        if let Some((lo, hi)) = tok.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("--b range {tok:?} is empty"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(tok)?);
        }
    }
    Ok(out)
}

/// Turns `argv` (including the program name) into a plan. `--help` and
/// `--version` come back as clap errors of the corresponding kind, which
/// print to standard output with exit code 0.
pub fn parse_args<I, T>(argv: I) -> Result<CommandPlan, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let command = match cli.command {
        Sub::Bv { d, a } => {
            let d = d as usize;
            Command::Bv {
                d,
                a: parse_hidden("a", &a, d)?,
            }
        }
        Sub::Dj { table } => Command::Dj { table },
        Sub::Grover {
            d,
            marked,
            iterations,
        } => {
            let d = d as usize;
            if marked >> d != 0 {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    format!("--marked {marked} out of range for --d {d}"),
                ));
            }
            Command::Grover {
                d,
                marked: marked as usize,
                iterations: iterations.map_or_else(|| optimal_grover_iterations(d), |k| k as usize),
            }
        }
        Sub::Db { table, a, patterns } => {
            if a.is_empty() || !a.chars().all(|c| c == '0' || c == '1') {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    format!("--a {a:?} must be a bitstring"),
                ));
            }
            Command::Db { table, a, patterns }
        }
        Sub::Entangle { state, tol } => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    format!("--tol {tol} must lie in (0, 1)"),
                ));
            }
            Command::Entangle { state, tol }
        }
        Sub::Interfere {
            lattice,
            bruteforce,
        } => Command::Interfere {
            lattice,
            bruteforce,
        },
        Sub::Bench(b) => Command::Bench {
            b_values: parse_b_list(&b.b).map_err(|m| usage(ErrorKind::ValueValidation, m))?,
            n: b.n as usize,
            compare: b.compare,
            seed: b.seed,
        },
        Sub::Fit {
            data,
            k,
            lr,
            epochs,
            seed,
            d_equiv,
        } => {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    format!("--lr {lr} must be positive"),
                ));
            }
            if d_equiv == Some(0) {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    "--d-equiv must be positive",
                ));
            }
            Command::Fit {
                data,
                k: k as usize,
                lr,
                epochs: epochs as usize,
                seed,
                d_equiv,
            }
        }
    };
    let csv_ok = matches!(command, Command::Bench { .. } | Command::Fit { .. });
    let format = match (cli.format, &command) {
        (Some(Format::Csv), _) if !csv_ok => {
            return Err(usage(
                ErrorKind::ArgumentConflict,
                format!("--format csv is not available for {}", command.name()),
            ))
        }
        (Some(f), _) => f,
        (None, Command::Bench { .. }) => Format::Csv,
        (None, _) => Format::Json,
    };
    if cli.shots == Some(0) {
        return Err(usage(
            ErrorKind::ValueValidation,
            "--shots must be positive",
        ));
    }
    Ok(CommandPlan {
        command,
        output: cli.output,
        format,
        meta: !cli.no_meta,
        threads: cli.threads as usize,
        shots: cli.shots,
        shots_seed: cli.shots_seed,
        max_qubits: DEFAULT_MAX_QUBITS,
    })
}

/// Reads the qubit cap override, if set.
pub fn max_qubits_from_env() -> Result<Option<usize>, clap::Error> {
    match std::env::var(MAX_QUBITS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| {
                usage(
                    ErrorKind::InvalidValue,
                    format!("{MAX_QUBITS_ENV}={v:?} is not a positive integer"),
                )
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(args: &[&str]) -> Result<CommandPlan, clap::Error> {
        parse_args(std::iter::once("qunip").chain(args.iter().copied()))
    }

    #[test]
    fn bv_plan() {
        let p = plan(&["bv", "--d", "3", "--a", "101"]).unwrap();
        assert_eq!(p.command, Command::Bv { d: 3, a: 5 });
        assert_eq!(p.format, Format::Json);
        assert!(p.meta);
    }

    #[test]
    fn grover_defaults_to_optimal_iterations() {
        let p = plan(&["grover", "--d", "2", "--marked", "3"]).unwrap();
        assert_eq!(
            p.command,
            Command::Grover {
                d: 2,
                marked: 3,
                iterations: 1
            }
        );
        let p = plan(&["grover", "--d", "4", "--marked", "3", "--iterations", "0"]).unwrap();
        assert_eq!(
            p.command,
            Command::Grover {
                d: 4,
                marked: 3,
                iterations: 0
            }
        );
    }

    #[test]
    fn usage_errors() {
        for bad in [
            &["bv", "--d", "0", "--a", "1"][..],
            &["bv", "--d", "2", "--a", "101"],
            &["bv", "--d", "2", "--a", "12"],
            &["bv", "--d", "2"],
            &["bv", "--d", "2", "--a", "1", "--bogus"],
            &["grover", "--d", "2", "--marked", "4"],
            &["entangle", "--state", "s.json", "--tol", "2"],
            &["bench", "--b", "3..1", "--n", "2"],
            &["bench", "--b", "0", "--n", "2"],
            &["bv", "--d", "2", "--a", "1", "--format", "csv"],
            &["fit", "--data", "x.csv", "--k", "0"],
            &["fit", "--data", "x.csv", "--k", "2", "--lr", "-1"],
            &["teleport"],
        ] {
            let err = plan(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad:?}");
        }
    }

    #[test]
    fn help_short_circuits() {
        let err = plan(&["--help"]).unwrap_err();
        assert_eq!(err.kind(), ErrorKind::DisplayHelp);
        assert_eq!(err.exit_code(), 0);
        let err = plan(&["bench", "--help"]).unwrap_err();
        assert_eq!(err.kind(), ErrorKind::DisplayHelp);
    }

    #[test]
    fn b_lists() {
        assert_eq!(parse_b_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(
            parse_b_list("3, 1..=2,100000").unwrap(),
            vec![3, 1, 2, 100000]
        );
        assert!(parse_b_list("x").is_err());
        assert!(parse_b_list("").is_err());
    }

    #[test]
    fn global_flags_anywhere() {
        let p = plan(&[
            "--no-meta",
            "bench",
            "--b",
            "2",
            "--n",
            "2",
            "--threads",
            "4",
            "--format",
            "json",
        ])
        .unwrap();
        assert!(!p.meta);
        assert_eq!(p.threads, 4);
        assert_eq!(p.format, Format::Json);
        let p = plan(&["bench", "--b", "2", "--n", "2"]).unwrap();
        assert_eq!(p.format, Format::Csv);
    }
}
