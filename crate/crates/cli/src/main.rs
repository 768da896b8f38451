//! Command-line front end: validate, solve, probe, verify, gen.
//!
//! Exit codes: 0 when the scenario is valid or its verdict is consistent,
//! 1 for validation failures or inconsistent verdicts, 2 for usage and IO
//! errors. `COCYCLE_LAB_THREADS` caps worker threads when the parallel
//! feature is compiled in.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cocycle_lab::gen::{generate, FieldChoice, GenKind, GenParams};
use cocycle_lab::report::{emit_csv, emit_machine, emit_text, SolverLine, TheoremReport};
use cocycle_lab::scenario::{fmt_float, load_scenario, Scenario};
use cocycle_lab::verify::{
    probe_scenario, run_verify, solve_scenario, validate_scenario, MethodChoice,
};

#[derive(Parser)]
#[command(
    name = "cocycle-lab",
    about = "Groupoid cocycle workbench: check the boundedness/solvability dichotomy on concrete scenarios",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check groupoid, action, and cocycle identities.
    Validate {
        scenario: PathBuf,
        /// Override the scenario's algebraic tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run coboundary solvers and report residuals.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        /// Override the scenario's algebraic tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Classify sup-norm growth at one base point over a window ladder.
    Probe {
        scenario: PathBuf,
        /// Base point to probe.
        #[arg(long, default_value_t = 0)]
        unit: usize,
        /// Single window (shorthand for --windows with one entry).
        #[arg(long)]
        window: Option<i64>,
        /// Comma-separated window ladder, overriding the scenario's.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Write the report here and the sup ladder to `<out>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: identities, solvers, growth, conditions, verdict.
    Verify {
        scenario: PathBuf,
        /// Override the scenario's algebraic tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Write the report here and the sup ladder to `<out>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a seeded scenario file.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Units in the groupoid (finite kinds).
        #[arg(long, default_value_t = 3)]
        units: usize,
        /// Fiber dimension (finite kinds).
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Cyclic isotropy order 1..=4 (finite kinds).
        #[arg(long, default_value_t = 2)]
        isotropy: usize,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
        /// Points in the transformation (transformation kind).
        #[arg(long, default_value_t = 8)]
        points: usize,
        /// Potential mean (transformation kind).
        #[arg(long, default_value_t = 0.0)]
        mean: f64,
        /// Perturbation target arrow (perturbed kind).
        #[arg(long)]
        arrow: Option<usize>,
        /// Perturbed coordinate (perturbed kind).
        #[arg(long, default_value_t = 0)]
        coord: usize,
        /// Perturbation size (perturbed kind).
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        /// Write the scenario here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Center,
    Lsq,
    Transfer,
    All,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Center => MethodChoice::Center,
            MethodArg::Lsq => MethodChoice::LeastSquares,
            MethodArg::Transfer => MethodChoice::Transfer,
            MethodArg::All => MethodChoice::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// Transitive groupoid with a generator-form action and a coboundary.
    #[value(alias = "minimal")]
    MinimalGroupoid,
    /// Random single cycle with a potential of prescribed mean.
    Transformation,
    /// Minimal-groupoid scenario plus one identity-breaking perturbation.
    Perturbed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Honors `COCYCLE_LAB_THREADS` before any parallel work starts.
fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("COCYCLE_LAB_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                // A second global-pool build fails harmlessly.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Validate { scenario, tol } => {
            let s = load(&scenario, tol)?;
            let (lines, ok) = validate_scenario(&s);
            for line in lines {
                println!("{line}");
            }
            Ok(exit_flag(ok))
        }
        Command::Solve {
            scenario,
            method,
            tol,
            format,
        } => {
            let s = load(&scenario, tol)?;
            let (lines, ok) = solve_scenario(&s, method.into())?;
            match format {
                FormatArg::Text => {
                    for line in &lines {
                        println!("{}", solver_text(line));
                    }
                }
                FormatArg::Machine => {
                    for line in &lines {
                        println!("{}", solver_machine(line));
                    }
                }
            }
            Ok(exit_flag(ok))
        }
        Command::Probe {
            scenario,
            unit,
            window,
            windows,
            format,
            out,
        } => {
            let s = load(&scenario, None)?;
            let ladder = match (window, windows) {
                (Some(_), Some(_)) => {
                    return Err("--window and --windows are mutually exclusive".into())
                }
                (Some(k), None) => Some(vec![k]),
                (None, Some(ks)) => Some(ks),
                (None, None) => None,
            };
            let report = probe_scenario(&s, unit, ladder.as_deref())?;
            deliver(&report, format, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            scenario,
            tol,
            format,
            out,
        } => {
            let s = load(&scenario, tol)?;
            let report = run_verify(&s);
            deliver(&report, format, out.as_deref())?;
            Ok(exit_flag(
                report.verdict == cocycle_lab::report::Verdict::Consistent,
            ))
        }
        Command::Gen {
            kind,
            seed,
            units,
            dim,
            isotropy,
            field,
            points,
            mean,
            arrow,
            coord,
            delta,
            out,
        } => {
            let params = GenParams {
                kind: match kind {
                    KindArg::MinimalGroupoid => GenKind::MinimalGroupoid,
                    KindArg::Transformation => GenKind::Transformation,
                    KindArg::Perturbed => GenKind::Perturbed,
                },
                seed,
                units,
                dim,
                isotropy,
                field: match field {
                    FieldArg::Real => FieldChoice::Real,
                    FieldArg::Complex => FieldChoice::Complex,
                },
                points,
                mean,
                arrow,
                coord,
                delta,
            };
            let text = generate(&params).map_err(|e| e.to_string())?;
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| format!("writing {}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: &Path, tol: Option<f64>) -> Result<Scenario, String> {
    let mut scenario =
        load_scenario(path).map_err(|e| format!("loading {}: {e}", path.display()))?;
    if let Some(t) = tol {
        if t <= 0.0 || t.is_nan() {
            return Err("--tol must be positive".into());
        }
        scenario.tolerances.algebra = t;
    }
    Ok(scenario)
}

fn exit_flag(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn solver_text(line: &SolverLine) -> String {
    let mut s = format!("{:<16} {}", line.method, line.status);
    for (key, value) in &line.fields {
        s.push_str(&format!("  {key}={}", fmt_float(*value)));
    }
    s
}

fn solver_machine(line: &SolverLine) -> String {
    let mut s = format!("solver {} status {}", line.method, line.status);
    for (key, value) in &line.fields {
        s.push_str(&format!(" {key} {}", fmt_float(*value)));
    }
    s
}

/// Prints or writes a report; `--out` also drops the sup ladder CSV next
/// to it.
fn deliver(report: &TheoremReport, format: FormatArg, out: Option<&Path>) -> Result<(), String> {
    let body = match format {
        FormatArg::Text => emit_text(report),
        FormatArg::Machine => emit_machine(report),
    };
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| format!("writing {}: {e}", path.display()))?;
            let mut csv_path = path.as_os_str().to_owned();
            csv_path.push(".csv");
            let csv_path = PathBuf::from(csv_path);
            std::fs::write(&csv_path, emit_csv(&report.sup_rows))
                .map_err(|e| format!("writing {}: {e}", csv_path.display()))?;
            Ok(())
        }
    }
}
