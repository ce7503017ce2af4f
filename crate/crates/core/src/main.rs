use std::io::{Read, Write};
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use expzero::budget::EnumerationBudget;
use expzero::calculus::derivative;
use expzero::driver::{decide_with, emit_clauses, Clause, render_verdict, verify, SearchOptions, Verdict};
use expzero::epoly::{canonicalize, serialize};
use expzero::gaussian::GaussianRational;
use expzero::numerics::Precision;
use expzero::term::Term;
use expzero::zerofree::Point;

/// Exponential-polynomial zero questions with checkable certificates.
#[derive(Parser)]
#[command(name = "expzero", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it back.
    Parse { term: String },
    /// Print the serialized canonical form.
    Canon {
        term: String,
        /// Print the canonical form as a term instead.
        #[arg(long)]
        pretty: bool,
    },
    /// Differentiate with respect to one variable.
    Diff {
        #[arg(long)]
        var: String,
        term: String,
    },
    /// Decide whether P(a, y) = 0 has a solution y.
    Decide(DecideArgs),
    /// Stream the clauses for P, one per line.
    Clauses(ClauseArgs),
    /// Replay a certificate; `-` reads standard input.
    Verify { file: String },
}

#[derive(Args)]
struct Roles {
    #[arg(long)]
    term: String,
    /// Parameters, comma-separated.
    #[arg(long, value_delimiter = ',')]
    x: Vec<String>,
    /// Quantified variables, comma-separated.
    #[arg(long, value_delimiter = ',')]
    y: Vec<String>,
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    roles: Roles,
    /// Parameter values as name=literal, comma-separated or repeated.
    #[arg(long, value_delimiter = ',')]
    at: Vec<String>,
    #[arg(long, default_value_t = 5)]
    max_weight: u64,
    #[arg(long, default_value_t = 6)]
    max_height: u64,
    #[arg(long, default_value_t = 256)]
    bits: u32,
    /// Wall-clock cap in seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Extra constants for candidate terms, comma-separated literals.
    #[arg(long, value_delimiter = ',')]
    constants: Vec<String>,
}

#[derive(Args)]
struct ClauseArgs {
    #[command(flatten)]
    roles: Roles,
    #[arg(long, default_value_t = 3)]
    max_weight: u64,
    /// Index of the first zero-freeness clause to print.
    #[arg(long)]
    start: Option<usize>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn parse_term(s: &str) -> Result<Term, Failure> {
    Term::parse(s).map_err(|e| Failure(format!("{s}: {e}")))
}

fn literal(s: &str) -> Result<GaussianRational, Failure> {
    let t = parse_term(s)?;
    if !t.free_vars().is_empty() {
        return Err(Failure(format!("{s}: not a constant (the imaginary unit is written 1i)")));
    }
    canonicalize(&t)
        .as_constant()
        .and_then(|c| c.as_gaussian())
        .ok_or_else(|| Failure(format!("{s}: not a Gaussian rational")))
}

fn assignments(items: &[String], x: &[String]) -> Result<Point, Failure> {
    let mut point = Point::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure(format!("--at {item}: expected name=value")))?;
        point.insert(k.trim().to_string(), literal(v.trim())?);
    }
    if let Some(missing) = x.iter().find(|v| !point.contains_key(*v)) {
        return Err(Failure(format!("no value given for parameter {missing}")));
    }
    if let Some(extra) = point.keys().find(|k| !x.contains(k)) {
        return Err(Failure(format!("{extra} is not a declared parameter")));
    }
    Ok(point)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Parse { term } => println!("{}", parse_term(&term)?),
        Command::Canon { term, pretty } => {
            let c = canonicalize(&parse_term(&term)?);
            if pretty {
                println!("{}", c.to_term());
            } else {
                println!("{}", serialize(&c));
            }
        }
        Command::Diff { var, term } => {
            println!("{}", derivative(&canonicalize(&parse_term(&term)?), &var).to_term());
        }
        Command::Decide(a) => {
            let p = parse_term(&a.roles.term)?;
            let point = assignments(&a.at, &a.roles.x)?;
            if !(a.timeout > 0.0 && a.timeout.is_finite()) || a.max_weight == 0 || a.max_height == 0 || a.bits < 8 {
                return Err(Failure("budgets must be positive (bits at least 8)".into()));
            }
            let budget = EnumerationBudget {
                max_weight: a.max_weight,
                max_height: a.max_height,
                max_bits: Precision::new(a.bits),
                timeout: Duration::from_secs_f64(a.timeout),
            };
            let opts = SearchOptions {
                budget: budget.clone(),
                extra_constants: a.constants.iter().map(|c| literal(c)).collect::<Result<_, _>>()?,
                threads: a.threads,
            };
            let verdict = decide_with(&p, &point, &a.roles.y, &opts)?;
            print!("{}", render_verdict(&p, &a.roles.x, &a.roles.y, &point, &verdict, &budget));
            if matches!(verdict, Verdict::Unknown(_)) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Clauses(a) => {
            let p = parse_term(&a.roles.term)?;
            if let Some(v) = a.roles.x.iter().find(|v| a.roles.y.contains(v)) {
                return Err(Failure(format!("{v} is both a parameter and quantified")));
            }
            let budget = EnumerationBudget::default().with_weight(a.max_weight);
            let stream = emit_clauses(&p, &a.roles.x, &a.roles.y, &budget);
            let stream = match a.start {
                Some(k) => stream.restart_at(k),
                None => stream,
            };
            let mut out = std::io::stdout().lock();
            for c in stream {
                let line = match &c {
                    Clause::IdenticallyZero { rendered } => writeln!(out, "Z\t{rendered}"),
                    Clause::ZeroFree { index, rendered, .. } => writeln!(out, "{index}\t{rendered}"),
                };
                // a closed pipe ends the stream
                if line.is_err() {
                    break;
                }
            }
        }
        Command::Verify { file } => {
            let text = if file == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s)?;
                s
            } else {
                std::fs::read_to_string(&file)?
            };
            match verify(&text) {
                Ok(label) => println!("VALID {label}"),
                Err(e) => {
                    println!("INVALID {e}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
