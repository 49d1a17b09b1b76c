//! The `qdisc` command line: scenario files, built-in generators, reports.

pub mod generate;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser};

pub use generate::{generate, polyhedron_vertices, Generator};
pub use report::{build_report, certify, plot_data, povm_export, to_json, OracleReport, Provenance, Report};
pub use scenario::{parse_scenario, Priors, Scenario, StateSpec};

use crate::config::SolverOptions;
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CERTIFICATE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qdisc", version, about = "Optimal minimum-error discrimination of qubit states")]
#[command(group(ArgGroup::new("input").required(true).args(["scenario", "generate"])))]
struct Args {
    /// Scenario document (JSON).
    #[arg(long, value_name = "FILE")]
    scenario: Option<PathBuf>,
    /// Built-in instance: pair, halfplane, fig1a, polyhedron or random.
    #[arg(long, value_name = "KIND[:PARAMS]")]
    generate: Option<String>,
    /// Tolerance on every certificate residual.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Re-check the solution with the grid, subgradient and matrix oracles.
    #[arg(long)]
    certify: bool,
    /// Write the optimal measurement to FILE.
    #[arg(long, value_name = "FILE")]
    export_povm: Option<PathBuf>,
    /// Write states, complementary states and the dual center as CSV.
    #[arg(long, value_name = "FILE")]
    plot_data: Option<PathBuf>,
    /// Seed for randomized solver steps and the subgradient oracle.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Do not print the report.
    #[arg(long)]
    quiet: bool,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. }
        | Error::InfeasibleWeights { .. }
        | Error::InfeasibleCertificate(_)
        | Error::CertificateFailure(_)
        | Error::IncompletePovm { .. } => EXIT_CERTIFICATE,
        _ => EXIT_INPUT,
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_INPUT,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };

    let (scenario, input) = match load(&args) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "qdisc: {e}");
            return EXIT_INPUT;
        }
    };

    let mut opts = SolverOptions::with_tolerances(scenario.tolerances());
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            let _ = writeln!(stderr, "qdisc: --tol must be a positive number, got {tol}");
            return EXIT_INPUT;
        }
        opts.tol.cert = tol;
    }
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }

    let report = match build_report(&scenario, &input, &opts, args.certify) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "qdisc: {e}");
            return exit_code(&e);
        }
    };

    if let Some(path) = &args.export_povm {
        if let Err(e) = std::fs::write(path, povm_export(&report)) {
            let _ = writeln!(stderr, "qdisc: cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    if let Some(path) = &args.plot_data {
        let e = scenario.ensemble().expect("validated while solving");
        if let Err(err) = std::fs::write(path, plot_data(&e, &report)) {
            let _ = writeln!(stderr, "qdisc: cannot write {}: {err}", path.display());
            return EXIT_INPUT;
        }
    }
    if !args.quiet {
        let _ = stdout.write_all(report.to_json().as_bytes());
    }
    if !report.passed() {
        let _ = writeln!(stderr, "qdisc: oracle check failed");
        return EXIT_CERTIFICATE;
    }
    EXIT_OK
}

fn load(args: &Args) -> crate::Result<(Scenario, Vec<u8>)> {
    if let Some(path) = &args.scenario {
        let bytes = std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let scenario = parse_scenario(text)?;
        Ok((scenario, bytes))
    } else {
        let spec = args.generate.as_deref().expect("clap enforces one input");
        let scenario = generate(spec)?;
        let bytes = scenario.to_json().into_bytes();
        Ok((scenario, bytes))
    }
}
