//! Command-line front end: parse circuit terms, interpret them, check
//! equivalence, reduce and translate circuits, compute Euler parameters,
//! and run the rule/variant conformance checks.
//!
//! Exit codes: 0 success (or "equal"), 1 a check reported "not equal" or a
//! failing table, 2 parse errors, 3 dialect/type/arity errors, 4 wire-cap
//! violations.

use clap::{Parser, Subcommand, ValueEnum};
use ctrlprop::diagram::Dialect;
use ctrlprop::error::Error;
use ctrlprop::matrix::Tolerance;
use ctrlprop::rules::{registry, soundness_check, RuleKind};
use ctrlprop::semantics::{equiv_with, interpret_with, Limits, DEFAULT_MAX_WIRES};
use ctrlprop::term::{parse_angle, parse_term};
use ctrlprop::translate::{completeness_pipeline, decode, encode, g_reduce};
use ctrlprop::Diagram;
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ctrlprop", version, about = "circuit rewriting with control as a constructor")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Qc,
    Cqc,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Dialect {
        match d {
            DialectArg::Qc => Dialect::Qc,
            DialectArg::Cqc => Dialect::Cqc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Subcommand)]
enum Cmd {
    /// Interpret a circuit file as a dense unitary matrix.
    Interp {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "cqc")]
        dialect: DialectArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compare two circuit files semantically.
    Equiv {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value = "cqc")]
        dialect: DialectArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Reduce a controllable circuit to the basic gate fragment.
    Reduce {
        file: PathBuf,
        /// Write the rewrite trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Translate a gate-fragment circuit into the vanilla language.
    Encode { file: PathBuf },
    /// Translate a vanilla circuit into the controllable gate fragment.
    Decode { file: PathBuf },
    /// Run the full equivalence pipeline on two controllable circuits.
    Pipeline {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Compute the Euler decomposition parameters.
    Euler {
        #[arg(long)]
        alpha1: String,
        #[arg(long)]
        alpha2: String,
    },
    /// Conformance table for the control variants.
    Variants {
        #[arg(long, default_value = "all")]
        check: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Inspect the rule sets.
    Rules {
        /// Numerically verify every rule and report the worst deviations.
        #[arg(long)]
        soundness: bool,
        #[arg(long, value_enum, default_value = "cqc")]
        dialect: DialectArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::ParseError { .. } => 2,
        Error::TypeError(_)
        | Error::DialectViolation { .. }
        | Error::ArityMismatch { .. }
        | Error::NotInFragment(_)
        | Error::InvalidPath(_) => 3,
        Error::CapExceeded { .. } => 4,
        _ => 10,
    }
}

fn limits() -> Limits {
    let max_wires = std::env::var("CTRLPROP_MAX_WIRES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_WIRES);
    Limits { max_wires }
}

fn read_term(path: &PathBuf) -> Result<Diagram, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ParseError {
        line: 0,
        col: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_term(&text)
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Interp { file, dialect, format } => {
            let d = read_term(&file)?;
            let m = interpret_with(&d, dialect.into(), limits())?;
            match format {
                Format::Json => println!("{}", serde_json::to_string(&m.to_json()).unwrap()),
                Format::Pretty => {
                    for i in 0..m.rows() {
                        let row: Vec<String> = (0..m.cols())
                            .map(|j| {
                                let z = m.get(i, j);
                                format!("{:+.4}{:+.4}i", z.re, z.im)
                            })
                            .collect();
                        println!("{}", row.join("  "));
                    }
                }
            }
            Ok(0)
        }
        Cmd::Equiv { file_a, file_b, dialect, tol } => {
            let a = read_term(&file_a)?;
            let b = read_term(&file_b)?;
            let tol = Tolerance::new(tol).unwrap_or_default();
            let r = equiv_with(&a, &b, dialect.into(), tol, limits())?;
            println!(
                "{}",
                serde_json::json!({ "equal": r.equal, "max_diff": r.max_abs_diff })
            );
            Ok(if r.equal { 0 } else { 1 })
        }
        Cmd::Reduce { file, trace } => {
            let d = read_term(&file)?;
            let (red, tr) = g_reduce(&d)?;
            if let Some(path) = trace {
                std::fs::write(&path, serde_json::to_string_pretty(&tr).unwrap()).map_err(|e| {
                    Error::ParseError { line: 0, col: 0, msg: format!("cannot write trace: {e}") }
                })?;
            }
            println!("{red}");
            Ok(0)
        }
        Cmd::Encode { file } => {
            let d = read_term(&file)?;
            println!("{}", encode(&d)?);
            Ok(0)
        }
        Cmd::Decode { file } => {
            let d = read_term(&file)?;
            println!("{}", decode(&d)?);
            Ok(0)
        }
        Cmd::Pipeline { file_a, file_b, tol } => {
            let a = read_term(&file_a)?;
            let b = read_term(&file_b)?;
            let tol = Tolerance::new(tol).unwrap_or_default();
            let report = completeness_pipeline(&a, &b, tol, limits())?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(if report.equal { 0 } else { 1 })
        }
        Cmd::Euler { alpha1, alpha2 } => {
            let a1 = parse_angle::<f64>(&alpha1)?;
            let a2 = parse_angle::<f64>(&alpha2)?;
            let p = ctrlprop::euler::euler_params(a1, a2);
            println!("{}", serde_json::to_string(&p.to_json()).unwrap());
            Ok(0)
        }
        Cmd::Variants { check, dim } => {
            if check != "all" {
                return Err(Error::ParseError {
                    line: 0,
                    col: 0,
                    msg: format!("unknown check '{check}', expected 'all'"),
                });
            }
            let mut rng = StdRng::seed_from_u64(0x5eed);
            let report =
                ctrlprop::multicontrol::conformance_report::<f64>(dim, Tolerance::default(), &mut rng)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(if report.all_expected { 0 } else { 1 })
        }
        Cmd::Rules { soundness, dialect, samples } => {
            let reg = registry::<f64>(dialect.into());
            if !soundness {
                for rule in reg.iter() {
                    let kind = match rule.kind {
                        RuleKind::Primitive => "primitive",
                        RuleKind::Derived => "derived",
                        RuleKind::Coherence => "coherence",
                    };
                    println!("{}\t{}", rule.name, kind);
                }
                return Ok(0);
            }
            let mut rng = StdRng::seed_from_u64(0x50a9);
            let mut reports = Vec::new();
            let mut all_pass = true;
            for rule in reg.iter() {
                let r = soundness_check(rule, samples, Tolerance::default(), &mut rng);
                all_pass &= r.pass;
                reports.push(r);
            }
            println!("{}", serde_json::to_string_pretty(&reports).unwrap());
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
