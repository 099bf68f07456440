use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lp2dt::engine::{Engine, EngineConfig};
use lp2dt::geometry::{NSVec, SheafClass};
use lp2dt::joyce::{s_coeff, u_coeff_with_limit};
use lp2dt::qseries::parse_rational;
use lp2dt::theta::{indefinite_theta, indefinite_theta_bruteforce, validate_xi, XiData};
use lp2dt::{Error, QExp};
use lp2dt_cli::output::{render_record, render_series, Format};
use lp2dt_cli::selftest;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

#[derive(Parser)]
#[command(name = "lp2dt", version, about = "Generalized DT invariants of local P^2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute DT(r, l, D) for D = 0..=order.
    Compute {
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        rank: i64,
        #[arg(long, allow_hyphen_values = true)]
        c1: i64,
        #[arg(long)]
        order: u64,
        #[arg(long, env = "LP2DT_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_rank: i64,
        /// Also print the q-series the values are read from.
        #[arg(long)]
        raw: bool,
        /// Evaluate the truncated series at tau = i (floating point, for
        /// eyeballing convergence only).
        #[arg(long, requires = "raw")]
        at_i: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate an indefinite theta series from a JSON data file.
    Theta {
        file: PathBuf,
        /// Precision, an integer or p/q.
        #[arg(long, default_value = "1")]
        prec: String,
        /// Cross-check against direct summation over a box.
        #[arg(long)]
        oracle: bool,
        /// Box radius for the cross-check.
        #[arg(long, default_value_t = 16)]
        radius: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Print Joyce's S and U coefficients for classes given as r,x,y.
    Joyce {
        #[arg(required = true, allow_hyphen_values = true)]
        classes: Vec<String>,
    },
    /// Run the acceptance checks.
    Selftest {
        #[arg(long)]
        quick: bool,
        #[arg(long, env = "LP2DT_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::LimitExceeded { .. } => EXIT_USAGE,
        Error::InvalidTheta(_)
        | Error::Parse(_)
        | Error::CacheVersion { .. }
        | Error::CacheCorrupt { .. }
        | Error::CacheConflict { .. }
        | Error::Io(_) => EXIT_VALIDATION,
        Error::Assertion(_) | Error::RadiusTooSmall(_) | Error::NotInvertible | Error::UnboundedInverse(_) => {
            EXIT_ASSERTION
        }
    }
}

fn jobs(common: &Common) -> usize {
    common.jobs.map_or(0, |j| j as usize)
}

fn parse_prec(s: &str) -> Result<QExp, Error> {
    let r = parse_rational(s)?;
    let n = i64::try_from(r.numer()).map_err(|_| Error::Parse(s.into()))?;
    let d = i64::try_from(r.denom()).map_err(|_| Error::Parse(s.into()))?;
    Ok(QExp::new(n, d))
}

fn parse_class(s: &str) -> Result<SheafClass, Error> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("{s:?}: {e}")))?;
    match parts[..] {
        [r, x, y] if r >= 1 => Ok(SheafClass::new(r, NSVec::new(x, y))),
        _ => Err(Error::InvalidInput(format!("{s:?} is not r,x,y with r >= 1"))),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Compute {
            rank,
            c1,
            order,
            cache_dir,
            max_rank,
            raw,
            at_i,
            common,
        } => {
            let engine = Engine::new(EngineConfig {
                max_rank,
                jobs: jobs(&common),
                cache_dir,
                ..EngineConfig::default()
            });
            let (rec, series) = engine.compute(rank, c1, order)?;
            let series = raw.then_some(&series);
            print!("{}", render_record(&rec, series, at_i, common.format));
            Ok(ExitCode::SUCCESS)
        }
        Command::Theta {
            file,
            prec,
            oracle,
            radius,
            common,
        } => {
            let prec = parse_prec(&prec)?;
            let xi = XiData::from_json(&std::fs::read_to_string(&file)?)?;
            if let Err(violations) = validate_xi(&xi) {
                for v in &violations {
                    eprintln!("violation {v}");
                }
                return Ok(ExitCode::from(EXIT_VALIDATION));
            }
            let _pool = rayon_threads(jobs(&common));
            let series = indefinite_theta(&xi, prec)?;
            print!("{}", render_series(&series, common.format));
            if oracle {
                let slow = indefinite_theta_bruteforce(&xi, prec, radius)?;
                if slow == series {
                    println!("MATCH");
                } else {
                    println!("MISMATCH: direct sum gives {slow}");
                    return Ok(ExitCode::from(EXIT_ASSERTION));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Joyce { classes } => {
            let classes: Vec<SheafClass> = classes.iter().map(|s| parse_class(s)).collect::<Result<_, _>>()?;
            println!("S = {}", s_coeff(&classes));
            println!("U = {}", u_coeff_with_limit(&classes, classes.len().max(1))?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest {
            quick,
            cache_dir,
            common,
        } => {
            let opts = selftest::Options {
                quick,
                jobs: jobs(&common),
                cache_dir,
            };
            let mut outcomes = Vec::new();
            for (id, _) in selftest::ids(quick) {
                let o = selftest::run_check(id, &opts).expect("known check id");
                println!("{}", o.line());
                outcomes.push(o);
            }
            Ok(if selftest::all_passed(&outcomes) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ASSERTION)
            })
        }
    }
}

/// Sets the global rayon pool size; a no-op after the first call.
fn rayon_threads(n: usize) -> Option<()> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
