//! Command-line front end: `simulate`, `analyze`, `gradcheck`, and `list`
//! subcommands over built-in or file-based scenarios.
//!
//! Exit codes: 0 on success (including runs that legitimately stop at the
//! step limit), 1 on usage or configuration errors, 2 on numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::control::{gradient_oracle, stacked_gradient};
use crate::output::write_trajectory;
use crate::plot::{emit_plot_with_target, Projection};
use crate::rigidity::{
    canonical_motions, finite_difference_jacobian, infinitesimal_motion_space,
    mixed_rigidity_matrix, numerical_rank, out_of_span_residual, FdTarget, DEFAULT_NULL_TOL,
};
use crate::scenario::{builtin, builtin_names, load_scenario, Scenario, ScenarioError};
use crate::sim::{invariant_report, simulate, Termination, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Tolerance `gradcheck` holds the analytic-vs-oracle error to.
pub const GRADCHECK_TOL: f64 = 1e-5;

#[derive(Parser)]
#[command(
    name = "se3form",
    version,
    about = "Formation simulation and rigidity analysis for rigid-body networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trajectory CSV and SVG plot
    Simulate {
        /// Built-in scenario name or path to a scenario JSON file
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        scenario: Option<String>,
        /// Run every built-in scenario, as parallel jobs
        #[arg(long)]
        all: bool,
        /// Output directory for <name>.csv and <name>.svg
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Plot projection: xy, xz, yz, or iso
        #[arg(long, default_value = "xy")]
        projection: String,
    },
    /// Print rigidity-matrix rank, null-space dimension, and a labeled basis
    Analyze {
        /// Built-in scenario name or path to a scenario JSON file
        scenario: String,
        /// Relative singular-value cutoff for the null space
        #[arg(long, default_value_t = DEFAULT_NULL_TOL)]
        tol: f64,
    },
    /// Compare analytic rigidity matrices and gradients with finite differences
    Gradcheck {
        /// Built-in scenario name or path to a scenario JSON file
        scenario: String,
        /// Central-difference step, within [1e-9, 1e-3]
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
    },
    /// List the built-in scenarios
    List,
}

/// Runs the CLI on the given argument vector and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Simulate {
            scenario,
            all,
            out,
            projection,
        } => {
            let projection = match projection.parse::<Projection>() {
                Ok(p) => p,
                Err(e) => return usage_error(&e),
            };
            if all {
                cmd_simulate_all(&out, projection)
            } else {
                let name = scenario.expect("clap enforces scenario unless --all");
                match resolve(&name) {
                    Ok(s) => cmd_simulate(&s, &out, projection),
                    Err(e) => usage_error(&e.to_string()),
                }
            }
        }
        Command::Analyze { scenario, tol } => match resolve(&scenario) {
            Ok(s) => cmd_analyze(&s, tol),
            Err(e) => usage_error(&e.to_string()),
        },
        Command::Gradcheck { scenario, h } => {
            if !(1e-9..=1e-3).contains(&h) {
                return usage_error(&format!("--h {h} outside [1e-9, 1e-3]"));
            }
            match resolve(&scenario) {
                Ok(s) => cmd_gradcheck(&s, h),
                Err(e) => usage_error(&e.to_string()),
            }
        }
        Command::List => cmd_list(),
    }
}

fn usage_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

/// Built-in name, else a file path.
fn resolve(arg: &str) -> Result<Scenario, ScenarioError> {
    if builtin_names().contains(&arg) {
        return builtin(arg);
    }
    if Path::new(arg).exists() {
        return load_scenario(arg);
    }
    Err(ScenarioError::UnknownScenario {
        name: arg.to_string(),
        available: builtin_names().join(", "),
    })
}

fn describe(termination: Termination) -> &'static str {
    match termination {
        Termination::Converged => "converged",
        Termination::StepLimit => "stopped at the step limit",
        Termination::NumericalFailure => "numerical failure",
    }
}

fn cmd_simulate(scenario: &Scenario, out: &Path, projection: Projection) -> i32 {
    match run_one(scenario, out, projection) {
        Ok((termination, lines)) => {
            print!("{lines}");
            if termination == Termination::NumericalFailure {
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            EXIT_NUMERICAL
        }
    }
}

/// Runs one scenario to completion and writes its outputs; returns the
/// termination and a human-readable summary.
fn run_one(
    scenario: &Scenario,
    out: &Path,
    projection: Projection,
) -> Result<(Termination, String), String> {
    std::fs::create_dir_all(out)
        .map_err(|e| format!("cannot create output directory {}: {e}", out.display()))?;
    let traj: Trajectory = simulate(
        &scenario.initial,
        &scenario.graph,
        &scenario.target,
        &scenario.control,
        &scenario.sim,
    );
    let mut lines = String::new();
    if traj.is_empty() {
        lines.push_str(&format!(
            "{}: numerical failure before the first step\n",
            scenario.name
        ));
        return Ok((Termination::NumericalFailure, lines));
    }
    let last = traj.last().unwrap();
    lines.push_str(&format!(
        "{}: {} after {} steps (t = {:.4}), phi = {:.3e}\n",
        scenario.name,
        describe(traj.termination),
        traj.len() - 1,
        last.t,
        last.phi
    ));
    if traj.len() >= 2 {
        let report = invariant_report(&traj);
        lines.push_str(&format!(
            "  centroid drift {:.3e}, scale drift {:.3e}, max rotation defect {:.3e}\n",
            report.max_centroid_drift, report.max_scale_drift, report.max_rotation_defect
        ));
    }
    let csv_path = out.join(format!("{}.csv", scenario.name));
    let svg_path = out.join(format!("{}.svg", scenario.name));
    write_trajectory(&traj, &csv_path).map_err(|e| e.to_string())?;
    // Overlay the target shape once distance constraints pin its scale.
    let overlay = if scenario.graph.distance_count() >= 1 {
        scenario.target_positions.as_deref()
    } else {
        None
    };
    emit_plot_with_target(&traj, overlay, &svg_path, projection).map_err(|e| e.to_string())?;
    lines.push_str(&format!(
        "  wrote {} and {}\n",
        csv_path.display(),
        svg_path.display()
    ));
    Ok((traj.termination, lines))
}

type JobOutcome = (String, Result<(Termination, String), String>);

fn cmd_simulate_all(out: &Path, projection: Projection) -> i32 {
    let results: Vec<JobOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = builtin_names()
            .iter()
            .map(|&name| {
                scope.spawn(move || {
                    let result = builtin(name)
                        .map_err(|e| e.to_string())
                        .and_then(|s| run_one(&s, out, projection));
                    (name.to_string(), result)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario job panicked"))
            .collect()
    });
    let mut code = EXIT_OK;
    for (name, result) in results {
        match result {
            Ok((termination, lines)) => {
                print!("{lines}");
                if termination == Termination::NumericalFailure {
                    code = code.max(EXIT_NUMERICAL);
                }
            }
            Err(message) => {
                eprintln!("error in {name}: {message}");
                code = code.max(EXIT_NUMERICAL);
            }
        }
    }
    code
}

fn cmd_analyze(scenario: &Scenario, tol: f64) -> i32 {
    let matrices = match mixed_rigidity_matrix(&scenario.initial, &scenario.graph) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let assembled = matrices.assembled();
    let rank = numerical_rank(&assembled, tol);
    let basis = infinitesimal_motion_space(&assembled, tol);
    println!(
        "{}: rigidity matrix is {}x{} at the initial state ({} bearing, {} distance edges)",
        scenario.name,
        assembled.nrows(),
        assembled.ncols(),
        scenario.graph.bearing_count(),
        scenario.graph.distance_count()
    );
    println!("  rank {rank} (relative tol {tol:.1e})");
    println!("  null-space dimension {}", basis.ncols());
    println!("  canonical motions, out-of-span residual (≈0 means admissible):");
    let motions = canonical_motions(&scenario.initial);
    let mut contained = Vec::new();
    for motion in &motions {
        let residual = out_of_span_residual(&basis, &motion.direction);
        let verdict = if residual < 1e-6 {
            "admissible"
        } else {
            "excluded"
        };
        println!("    {:<24} {:9.3e}  {}", motion.label, residual, verdict);
        if residual < 1e-6 {
            contained.push(motion.direction.clone());
        }
    }
    // Null directions beyond the span of the admissible canonical motions
    // (for example free spins of agents with a single outgoing bearing).
    let mut projected = nalgebra::DMatrix::zeros(basis.ncols(), contained.len());
    for (c, direction) in contained.iter().enumerate() {
        projected
            .column_mut(c)
            .copy_from(&(basis.tr_mul(direction)));
    }
    let canonical_rank = if contained.is_empty() {
        0
    } else {
        numerical_rank(&projected, 1e-9)
    };
    println!(
        "  {} of 7 canonical motions admissible; {} additional null direction(s)",
        contained.len(),
        basis.ncols() - canonical_rank
    );
    EXIT_OK
}

fn cmd_gradcheck(scenario: &Scenario, h: f64) -> i32 {
    let rigidity_err = {
        let analytic = match mixed_rigidity_matrix(&scenario.initial, &scenario.graph) {
            Ok(m) => m.assembled(),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
        };
        let fd = match finite_difference_jacobian(
            &scenario.initial,
            &scenario.graph,
            h,
            FdTarget::Mixed,
        ) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
        };
        (&analytic - &fd).amax() / analytic.amax().max(1.0)
    };
    println!(
        "{}: rigidity matrix vs finite differences (h = {h:.1e}): max relative error {rigidity_err:.3e}",
        scenario.name
    );

    let gradient_err = {
        let analytic = match stacked_gradient(
            &scenario.initial,
            &scenario.graph,
            &scenario.target,
            scenario.control.law,
        ) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
        };
        let fd = match gradient_oracle(
            &scenario.initial,
            &scenario.graph,
            &scenario.target,
            scenario.control.law,
            h,
        ) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
        };
        (&analytic - &fd).amax() / analytic.amax().max(1.0)
    };
    println!(
        "{}: potential gradient vs finite differences (h = {h:.1e}): max relative error {gradient_err:.3e}",
        scenario.name
    );

    if rigidity_err < GRADCHECK_TOL && gradient_err < GRADCHECK_TOL {
        println!("PASS (tolerance {GRADCHECK_TOL:.1e})");
        EXIT_OK
    } else {
        println!("FAIL (tolerance {GRADCHECK_TOL:.1e})");
        EXIT_NUMERICAL
    }
}

fn cmd_list() -> i32 {
    for &name in builtin_names() {
        match builtin(name) {
            Ok(s) => {
                println!(
                    "{:<16} {} agents, {} bearing + {} distance edges, {:?}/{:?} law",
                    name,
                    s.initial.n(),
                    s.graph.bearing_count(),
                    s.graph.distance_count(),
                    s.control.law,
                    s.control.mode
                );
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    EXIT_OK
}
