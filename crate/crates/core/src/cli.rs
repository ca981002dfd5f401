//! Command-line front end. `run` returns the process exit code.
//!
//! Exit codes: 0 success, 2 invalid representation, 3 computation failure
//! (budget, window, precision, branch, inconsistency), 4 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::acceptance;
use crate::endo::BlockMatrix;
use crate::error::{Error, Result};
use crate::format::{parse_poly, InstanceFile, Metadata, ResultFile, Timings};
use crate::group::nilpotency_class;
use crate::instances::{generate, Family};
use crate::rep::{phi_minus_id, validate, Rep};
use crate::solver::{oracle_fixed_vector, solve, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "contraction", version, about = "Fixed vectors and nilpotency for shift-equivariant representations over F_p((t))")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the order and commutation identities of an instance.
    Validate { file: PathBuf },
    /// Compute a nonzero fixed vector with certificates.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        prec: i64,
        #[arg(long, num_args = 2, value_names = ["L", "R"], allow_hyphen_values = true)]
        window: Option<Vec<i64>>,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[arg(long, default_value_t = 48)]
        max_len: usize,
        #[arg(long, default_value_t = 64)]
        depth: i64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall-clock timings in the output.
        #[arg(long)]
        timings: bool,
    },
    /// Brute-force fixed vectors supported in a degree window.
    Oracle {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["L", "R"], allow_hyphen_values = true, required = true)]
        window: Vec<i64>,
    },
    /// Nilpotency class of the compact open subgroup modulo t^N.
    Nilpotency {
        file: PathBuf,
        #[arg(long, default_value_t = 16)]
        prec: i64,
        #[arg(long, default_value_t = 8)]
        max_class: usize,
        #[arg(long, default_value_t = 64)]
        depth: i64,
    },
    /// Print the blocks of phi(f) - I.
    Blocks {
        file: PathBuf,
        /// Polynomial such as "1 + t^2 + 2*t^(-1)".
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, num_args = 2, value_names = ["L", "R"], allow_hyphen_values = true)]
        window: Option<Vec<i64>>,
    },
    /// Generate a valid instance from a seeded family.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Selftest,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidRep(_) => EXIT_INVALID,
        Error::Parse { .. }
        | Error::Io(_)
        | Error::Dimension(_)
        | Error::BadModulus(_)
        | Error::ModulusMismatch(..) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    InstanceFile::parse(&text, &path.display().to_string())
}

fn load_valid(path: &Path) -> Result<Rep> {
    Rep::checked(read_instance(path)?.generator()?)
}

fn pair(w: &[i64]) -> (i64, i64) {
    (w[0], w[1])
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Validate { file } => {
            let rep = read_instance(&file)?.rep()?;
            let report = validate(&rep);
            if report.valid {
                if let Some((lo, hi)) = report.commutation_range {
                    writeln!(out, "valid (commutation checked for r in [{lo}, {hi}])").map_err(io)?;
                } else {
                    writeln!(out, "valid (zero generator)").map_err(io)?;
                }
                return Ok(EXIT_OK);
            }
            match report.counterexample {
                Some(ce) => writeln!(out, "invalid: {ce}").map_err(io)?,
                None => writeln!(out, "invalid").map_err(io)?,
            }
            Ok(EXIT_INVALID)
        }
        Command::Solve {
            file,
            prec,
            window,
            budget,
            max_len,
            depth,
            out: path,
            timings,
        } => {
            let rep = load_valid(&file)?;
            let mut opts = SolveOptions {
                precision: prec,
                budget,
                max_len,
                depth,
                ..SolveOptions::default()
            };
            if let Some(w) = window {
                opts.oracle_window = pair(&w);
            }
            let start = Instant::now();
            let res = solve(&rep, &opts)?;
            let t = timings.then(|| Timings {
                total_us: start.elapsed().as_micros() as u64,
            });
            emit(out, path.as_deref(), &ResultFile::from_result(&res, t).to_json())?;
            Ok(EXIT_OK)
        }
        Command::Oracle { file, window } => {
            let rep = load_valid(&file)?;
            let (l, r) = pair(&window);
            let res = oracle_fixed_vector(&rep, l, r)?;
            match res.xi {
                Some(xi) => writeln!(out, "{xi}\nkernel dimension {}", res.kernel_dim).map_err(io)?,
                None => writeln!(out, "none in window [{l}, {r})").map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Nilpotency {
            file,
            prec,
            max_class,
            depth,
        } => {
            let rep = load_valid(&file)?;
            let report = nilpotency_class(&rep, prec, max_class, depth)?;
            writeln!(out, "{report}").map_err(io)?;
            writeln!(out, "dimensions {:?}", report.dims).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Blocks { file, f, window } => {
            let rep = load_valid(&file)?;
            let poly = parse_poly(rep.modulus(), &f)?;
            let m = phi_minus_id(&rep, &poly)?;
            write_blocks(out, &m, window.as_deref().map(pair))?;
            Ok(EXIT_OK)
        }
        Command::Gen {
            family,
            p,
            d,
            seed,
            out: path,
        } => {
            let fam = Family::parse(&family).ok_or_else(|| Error::Parse {
                location: "--family".into(),
                message: format!("unknown family {family:?}; expected toeplitz, single-block or random"),
            })?;
            crate::fp::check_prime(p)?;
            if !(1..=64).contains(&d) {
                return Err(Error::Dimension(format!("d = {d} outside [1, 64]")));
            }
            let rep = generate(fam, p, d, seed);
            let meta = Metadata {
                name: Some(format!("{}-p{p}-d{d}-s{seed}", fam.name())),
                family: Some(fam.name().into()),
                seed: Some(seed),
            };
            emit(out, path.as_deref(), &InstanceFile::from_generator(rep.generator(), Some(meta)).to_json())?;
            Ok(EXIT_OK)
        }
        Command::Selftest => {
            let mut all = true;
            for o in acceptance::run_all() {
                all &= o.pass;
                writeln!(out, "{o}").map_err(io)?;
            }
            Ok(if all { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

fn write_blocks(out: &mut dyn Write, m: &BlockMatrix, window: Option<(i64, i64)>) -> Result<()> {
    let d = m.dim();
    let mut any = false;
    for ((i, j), blk) in m.blocks() {
        if let Some((l, r)) = window {
            if !(l..r).contains(i) || !(l..r).contains(j) {
                continue;
            }
        }
        any = true;
        writeln!(out, "block ({i}, {j}):").map_err(io)?;
        for a in 0..d {
            let row: Vec<String> = (0..d).map(|b| blk.get(a, b).to_string()).collect();
            writeln!(out, "  [{}]", row.join(" ")).map_err(io)?;
        }
    }
    if !any {
        writeln!(out, "zero").map_err(io)?;
    }
    Ok(())
}
