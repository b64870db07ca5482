//! `quatgenus`: right ideal classes, orders, masses and genera of
//! quaternary lattices over `Q` and real quadratic fields.

mod commands;
mod ideal_spec;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quatgenus::field::{make_field, FieldSpec};
use quatgenus::quat::{make_algebra, QuatAlgebra};
use quatgenus::Error;
use serde_json::json;

use commands::{Outcome, Timer};
use ideal_spec::IdealSpec;

const USAGE: u8 = 64;
const INCONSISTENT: u8 = 2;
const CAP_EXCEEDED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "quatgenus",
    version,
    about = "Genera of quaternary lattices from normal quaternion ideals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Proper isometry classes in the genus of a-maximal lattices
    Genus {
        #[command(flatten)]
        job: Job,
        /// unit | class:k | prime:p[.k][^e]*...
        #[arg(long, default_value = "unit")]
        ideal: String,
    },
    /// Right ideal classes of the maximal order
    IdealClasses {
        #[command(flatten)]
        job: Job,
    },
    /// Orders of type with their unit groups
    Orders {
        #[command(flatten)]
        job: Job,
    },
    /// Eichler, per narrow class and Siegel masses
    Mass {
        #[command(flatten)]
        job: Job,
    },
    /// Run every applicable consistency check
    Verify {
        #[command(flatten)]
        job: Job,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    Rationals,
    RealQuadratic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Table,
}

#[derive(Args)]
struct Job {
    #[arg(long, value_enum, default_value = "rationals")]
    field: FieldKind,
    /// Squarefree d > 1 for Q(sqrt d)
    #[arg(long)]
    d: Option<i64>,
    /// Totally positive a in p+q*w syntax; the algebra is (-a,-b)
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    a: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    b: String,
    #[arg(long, value_enum, default_value = "json")]
    output: Output,
    /// Bound on denominators in the norm-equation search
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    denominator_cap: u32,
    /// Accepted for compatibility; computation is single-threaded
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    /// Reserved; nothing depends on it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock stage timings (makes output non-reproducible)
    #[arg(long)]
    timings: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DenominatorCapExceeded { .. } => CAP_EXCEEDED,
        Error::Parse(_)
        | Error::NotSquarefree(_)
        | Error::BadDiscriminant(_)
        | Error::NotTotallyPositive(_)
        | Error::ZeroIdeal => USAGE,
        _ => INCONSISTENT,
    }
}

fn build_algebra(job: &Job) -> Result<QuatAlgebra, Error> {
    let spec = match (job.field, job.d) {
        (FieldKind::Rationals, None) => FieldSpec::Rationals,
        (FieldKind::Rationals, Some(_)) => {
            return Err(Error::Parse("--d only applies to real-quadratic".into()))
        }
        (FieldKind::RealQuadratic, Some(d)) => FieldSpec::RealQuadratic(d),
        (FieldKind::RealQuadratic, None) => {
            return Err(Error::Parse("real-quadratic needs --d".into()))
        }
    };
    let k = make_field(spec)?;
    let a = k.parse_elem(&job.a)?;
    let b = k.parse_elem(&job.b)?;
    make_algebra(&k, &a, &b)
}

fn run(cmd: &Command) -> Result<(serde_json::Value, Outcome, Output), Error> {
    let (job, name) = match cmd {
        Command::Genus { job, .. } => (job, "genus"),
        Command::IdealClasses { job } => (job, "ideal-classes"),
        Command::Orders { job } => (job, "orders"),
        Command::Mass { job } => (job, "mass"),
        Command::Verify { job, .. } => (job, "verify"),
    };
    let alg = build_algebra(job)?;
    let k = alg.field();
    let mut timer = Timer::new(job.timings);
    let mut spec = json!({
        "command": name,
        "field": match job.field { FieldKind::Rationals => "rationals", FieldKind::RealQuadratic => "real_quadratic" },
        "d": job.d,
        "a": alg.input_params().0.to_string(),
        "b": alg.input_params().1.to_string(),
        "denominator_cap": job.denominator_cap,
        "threads": job.threads,
        "seed": job.seed,
    });
    let outcome = match cmd {
        Command::Genus { ideal, .. } => {
            let s = IdealSpec::parse(ideal)?;
            spec["ideal"] = json!(s.to_string());
            let a = s.resolve(k)?;
            commands::genus(&alg, &a, job.denominator_cap, &mut timer)?
        }
        Command::IdealClasses { .. } => commands::ideal_classes(&alg, &mut timer)?,
        Command::Orders { .. } => commands::orders(&alg, &mut timer)?,
        Command::Mass { .. } => commands::mass(&alg, &mut timer)?,
        Command::Verify { inject_fault, .. } => {
            commands::verify(&alg, job.denominator_cap, *inject_fault, &mut timer)?
        }
    };
    let report = json!({
        "spec": spec,
        "field": commands::field_json(k),
        "algebra": commands::algebra_json(&alg),
        "results": outcome.results,
        "checks": outcome.checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        "timings": timer.stages,
    });
    Ok((report, outcome, job.output))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok((report, outcome, output)) => {
            let text = match output {
                Output::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
                Output::Table => {
                    let mut s: String = outcome.tables.iter().map(|t| t.render() + "\n").collect();
                    for c in &outcome.checks {
                        let status = if c.pass { "PASS" } else { "FAIL" };
                        s += &if c.detail.is_empty() {
                            format!("{status} {}\n", c.name)
                        } else {
                            format!("{status} {} ({})\n", c.name, c.detail)
                        };
                    }
                    s
                }
            };
            // a closed pipe is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            let failed: Vec<&str> = outcome
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("quatgenus: failed checks: {}", failed.join(", "));
                ExitCode::from(INCONSISTENT)
            }
        }
        Err(e) => {
            eprintln!("quatgenus: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
