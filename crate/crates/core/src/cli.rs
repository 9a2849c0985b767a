//! Command-line front end. Every command is a thin layer over library calls.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::Error;
use crate::nonlocal::{hypothesis_check, Conductivity, REGISTERED};
use crate::output::{self, study_csv, unix_now};
use crate::spectral::{assemble_by_quadrature, assemble_mass, assemble_stiffness};
use crate::stepper::{check_initial_datum, InitialState, Solver};
use crate::verify::{l1_truncation_study, spatial_study, temporal_order_study, ConvergenceStudy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_STUDY: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "fractherm",
    version,
    about = "Time-fractional nonlocal thermistor solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Time,
    Space,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and write trajectory.csv, solution_final.csv, manifest.json.
    Solve {
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
    /// Refine δ or N against the configured manufactured solution; writes study.csv.
    Convergence {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated δ values (time) or degrees N (space).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the oracle and identity suites and print a pass/fail table.
    Check {
        #[arg(long)]
        caputo: bool,
        #[arg(long)]
        hypotheses: bool,
        #[arg(long)]
        matrices: bool,
        /// Order used by --caputo.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Degree used by --matrices.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Conductivity checked by --hypotheses (default: all registered).
        #[arg(long)]
        conductivity: Option<String>,
    },
    /// Recompute output checksums recorded in a manifest.
    VerifyManifest { dir: PathBuf },
}

pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch(cli.command, &mut stdout.lock(), &mut stderr.lock())
}

pub fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cmd {
        Command::Solve { config, out: dir } => cmd_solve(&config, &dir, out, err),
        Command::Convergence {
            config,
            axis,
            values,
            out: dir,
            jobs,
        } => cmd_convergence(&config, axis, &values, &dir, jobs, out, err),
        Command::Check {
            caputo,
            hypotheses,
            matrices,
            alpha,
            n,
            conductivity,
        } => {
            let all = !(caputo || hypotheses || matrices);
            let opts = CheckOptions {
                caputo: caputo || all,
                hypotheses: hypotheses || all,
                matrices: matrices || all,
                alpha,
                n,
                conductivity,
            };
            cmd_check(&opts, out)
        }
        Command::VerifyManifest { dir } => cmd_verify_manifest(&dir, out, err),
    }
}

fn load_config(path: &Path, err: &mut dyn Write) -> Result<(RunConfig, String), i32> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    match RunConfig::parse(&text) {
        Ok(c) => Ok((c, text)),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            Err(EXIT_CONFIG)
        }
    }
}

fn solver_exit(e: &Error) -> i32 {
    match e {
        Error::Boundary { .. } | Error::Hypothesis(_) => EXIT_HYPOTHESIS,
        Error::Config(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

pub fn cmd_solve(config_path: &Path, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let started = unix_now();
    let (cfg, _) = match load_config(config_path, err) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let r = cfg.hypothesis_range;
    let report = match hypothesis_check(&cfg.conductivity(), (-r, r), cfg.hypothesis_samples) {
        Ok(rep) => rep,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    if !report.passed() {
        let _ = writeln!(
            err,
            "error: conductivity '{}' fails its hypotheses: {report:?}",
            report.id
        );
        return EXIT_HYPOTHESIS;
    }
    let problem = match cfg.problem() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e);
        }
    };
    let initial_report = match &problem.initial {
        InitialState::Function(f) => match problem
            .build_space()
            .and_then(|space| check_initial_datum(f, &space))
        {
            Ok(rep) => Some(rep),
            Err(e) => {
                let _ = writeln!(err, "error: initial datum: {e}");
                return solver_exit(&e);
            }
        },
        InitialState::Coefficients(_) => None,
    };
    let solver = match Solver::new(problem) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e);
        }
    };
    let space = solver.space().clone();
    let record = match solver.run_to_end() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e.error);
        }
    };
    let files = [
        ("trajectory.csv", output::trajectory_csv(&record)),
        (
            "solution_final.csv",
            output::solution_csv(&space, record.final_state()),
        ),
    ];
    let extra = serde_json::json!({
        "hypotheses": report,
        "initial_datum": initial_report,
        "alpha0": record.alpha0,
        "max_picard_iters": record.max_picard_iters(),
    });
    match output::write_outputs(dir, "solve", &cfg, started, &files, extra) {
        Ok(path) => {
            let _ = writeln!(
                out,
                "solved K = {} steps, N = {}; ‖u^K‖₀ = {}; manifest {}",
                cfg.steps,
                cfg.degree,
                output::fmt_f64(*record.l2_norms.last().expect("nonempty")),
                path.display()
            );
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn cmd_convergence(
    config_path: &Path,
    axis: Axis,
    values: &[String],
    dir: &Path,
    jobs: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let started = unix_now();
    let (cfg, _) = match load_config(config_path, err) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let setup = match cfg.study_setup() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result: Result<ConvergenceStudy, Error> = match axis {
        Axis::Time => {
            let deltas: Result<Vec<f64>, _> =
                values.iter().map(|v| v.trim().parse::<f64>()).collect();
            match deltas {
                Ok(d) => temporal_order_study(&setup, &d, jobs.max(1)),
                Err(_) => {
                    let _ = writeln!(err, "error: --values must be step sizes for --axis time");
                    return EXIT_CONFIG;
                }
            }
        }
        Axis::Space => {
            let degrees: Result<Vec<usize>, _> =
                values.iter().map(|v| v.trim().parse::<usize>()).collect();
            match degrees {
                Ok(n) if n.iter().all(|&n| n >= 2) => spatial_study(&setup, &n, jobs.max(1)),
                _ => {
                    let _ = writeln!(
                        err,
                        "error: --values must be degrees N >= 2 for --axis space"
                    );
                    return EXIT_CONFIG;
                }
            }
        }
    };
    let study = match result {
        Ok(s) => s,
        Err(e @ (Error::Contract(_) | Error::InvalidParameter(_) | Error::Config(_))) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            let _ = writeln!(err, "error: study point failed: {e}");
            return EXIT_STUDY;
        }
    };
    let files = [("study.csv", study_csv(&study))];
    let extra = serde_json::json!({
        "axis": study.axis,
        "values": study.values,
        "reference_alpha0": study.reference_alpha0,
        "jobs": jobs,
    });
    match output::write_outputs(dir, "convergence", &cfg, started, &files, extra) {
        Ok(_) => {
            let _ = writeln!(out, "fitted_order = {}", study.fitted_order);
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub caputo: bool,
    pub hypotheses: bool,
    pub matrices: bool,
    pub alpha: f64,
    pub n: usize,
    pub conductivity: Option<String>,
}

/// One row of the `check` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub criterion: String,
    pub pass: bool,
}

/// Step counts `8..=128` used by the truncation check (`δ = 2^-3..2^-7`).
pub const TRUNCATION_STEPS: [usize; 5] = [8, 16, 32, 64, 128];

pub fn check_rows(opts: &CheckOptions) -> Result<Vec<CheckRow>, Error> {
    let mut rows = Vec::new();
    if opts.matrices {
        let m = assemble_mass(opts.n)?;
        let s = assemble_stiffness(opts.n)?;
        let (mq, sq) = assemble_by_quadrature(opts.n)?;
        let mut worst = 0.0_f64;
        for i in 0..opts.n - 1 {
            for j in 0..opts.n - 1 {
                worst = worst
                    .max((m.get(i, j) - mq[i][j]).abs())
                    .max((s.get(i, j) - sq[i][j]).abs());
            }
        }
        rows.push(CheckRow {
            name: format!("matrices N={} closed form vs quadrature", opts.n),
            value: worst,
            criterion: "< 1e-12".into(),
            pass: worst < 1e-12,
        });
    }
    if opts.caputo {
        let target = 2.0 - opts.alpha;
        let cubic = l1_truncation_study(
            |t| t * t * t,
            |t| 3.0 * t * t,
            opts.alpha,
            1.0,
            &TRUNCATION_STEPS,
        )?;
        let expo = l1_truncation_study(f64::exp, f64::exp, opts.alpha, 1.0, &TRUNCATION_STEPS)?;
        for (label, study) in [("t^3", cubic), ("e^t", expo)] {
            rows.push(CheckRow {
                name: format!("L1 truncation order, u = {label}, alpha = {}", opts.alpha),
                value: study.fitted_order,
                criterion: format!("in [{:.2}, {:.2}]", target - 0.1, target + 0.1),
                pass: (study.fitted_order - target).abs() <= 0.1,
            });
        }
    }
    if opts.hypotheses {
        let ids: Vec<String> = match &opts.conductivity {
            Some(id) => vec![id.clone()],
            None => REGISTERED.iter().map(|s| s.to_string()).collect(),
        };
        for id in ids {
            let cond = Conductivity::by_name(&id)?;
            let rep = hypothesis_check(&cond, (-10.0, 10.0), 2001)?;
            rows.push(CheckRow {
                name: format!("hypotheses {id} on [-10, 10]"),
                value: rep.min_value,
                criterion: "min f > 0, envelope, Lipschitz".into(),
                pass: rep.passed(),
            });
        }
    }
    Ok(rows)
}

pub fn cmd_check(opts: &CheckOptions, out: &mut dyn Write) -> i32 {
    let rows = match check_rows(opts) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut ok = true;
    for row in &rows {
        ok &= row.pass;
        let _ = writeln!(
            out,
            "{:4}  {:<55} {:>24}  {}",
            if row.pass { "PASS" } else { "FAIL" },
            row.name,
            output::fmt_f64(row.value),
            row.criterion
        );
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_verify_manifest(dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match output::verify_manifest(dir) {
        Ok(bad) if bad.is_empty() => {
            let _ = writeln!(out, "all outputs match their checksums");
            EXIT_OK
        }
        Ok(bad) => {
            let _ = writeln!(err, "checksum mismatch: {}", bad.join(", "));
            EXIT_FAILURE
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
