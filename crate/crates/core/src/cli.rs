//! The `pipeflow` command line.
//!
//! Exit codes: 0 on success, 1 when a run completes but its check fails
//! (inequality violations, non-converged iteration, poor decay fit,
//! unbounded sweep), 2 on usage or input errors.
//!
//! `PIPEFLOW_THREADS` sets the size of the worker pool.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::sampler::regime_forcing;
use crate::analysis::{fit_decay_rate, inequality_suite, phi_sweep};
use crate::config::{load_config, FlowConfig};
use crate::error::{PipeError, Result};
use crate::fields::velocity_from_stream;
use crate::nonlinear::{
    calibrate_with, fixed_point_defect, momentum_residual, picard_iterate, set_s_check, IterationReport,
    IterationStatus, LinearSolver, MomentumResidual, SetSCheck,
};
use crate::norms::NormReport;
use crate::report::{mode_diagnostics_csv, read_forcing, write_report, write_text};
use crate::state::ForcingField;

/// Decay fits must reach this coefficient of determination.
pub const DECAY_MIN_R_SQUARED: f64 = 0.99;

/// Largest admissible growth of a sweep's normalized worst ratio.
pub const SWEEP_MAX_GROWTH: f64 = 3.0;

#[derive(Parser, Debug)]
#[command(
    name = "pipeflow",
    version,
    about = "Steady axisymmetric pipe-flow solver and verification harness",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Config file, or `default`
    #[arg(long, default_value = "default")]
    config: String,
    /// Override the flux
    #[arg(long)]
    phi: Option<f64>,
    /// Override the seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (must exist)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Extra output (per-mode diagnostics)
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One linear solve `T(F)`
    SolveLinear {
        #[command(flatten)]
        common: Common,
        /// Forcing table `r,z,fr,ftheta,fz`; default is a seeded random forcing
        #[arg(long)]
        forcing: Option<PathBuf>,
    },
    /// Picard iteration to the nonlinear solution
    SolveNonlinear {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        forcing: Option<PathBuf>,
    },
    /// Flux sweep of one linear estimate
    SweepPhi {
        #[command(flatten)]
        common: Common,
        /// Case tag, e.g. `Fr->v:L2`
        #[arg(long = "case")]
        case_tag: String,
        /// Comma-separated increasing flux values
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        phis: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Solve, then fit the downstream decay rate
    DecayFit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        forcing: Option<PathBuf>,
        /// Fit window `z0,z1`
        #[arg(long, value_delimiter = ',', num_args = 2, default_value = "5,12")]
        window: Vec<f64>,
        /// Half-width of the forcing's axial support
        #[arg(long, default_value_t = 2.0)]
        support: f64,
    },
    /// Radial inequality checks on random polynomial families
    CheckInequalities {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Measure the linear-solve constants c1 and c2
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

/// Every output file records the command and the full configuration.
#[derive(Serialize)]
struct Run<'a, T: Serialize> {
    command: &'a str,
    config: &'a FlowConfig,
    result: T,
}

#[derive(Serialize)]
struct LinearSummary {
    norms: NormReport,
    max_mode_residual: f64,
    max_condition: f64,
}

#[derive(Serialize)]
struct NonlinearSummary {
    iteration: IterationReport,
    set_s: SetSCheck,
    momentum: MomentumResidual,
    momentum_relative: f64,
    fixed_point_defect: f64,
    norms: NormReport,
}

enum Outcome {
    Pass,
    Fail(String),
}

fn load(common: &Common) -> Result<FlowConfig> {
    let mut cfg = if common.config == "default" {
        FlowConfig::default()
    } else {
        load_config(&common.config)?
    };
    if let Some(phi) = common.phi {
        cfg.phi = phi;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if !common.out.is_dir() {
        return Err(PipeError::MissingDirectory {
            dir: common.out.clone(),
        });
    }
    Ok(cfg)
}

fn forcing(path: Option<&Path>, cfg: &FlowConfig, solver: &LinearSolver) -> Result<ForcingField> {
    match path {
        Some(p) => read_forcing(p, &solver.grid, &solver.modes),
        None => Ok(regime_forcing(cfg.phi, cfg.seed, &solver.grid, &solver.modes)),
    }
}

fn emit<T: Serialize>(command: &str, cfg: &FlowConfig, result: T, path: &Path) -> Result<()> {
    write_report(
        &Run {
            command,
            config: cfg,
            result,
        },
        path,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn slug(tag: &str) -> String {
    let mut s: String = tag
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::SolveLinear { common, forcing: fpath } => {
            let cfg = load(&common)?;
            let solver = LinearSolver::from_config(&cfg)?;
            let f = forcing(fpath.as_deref(), &cfg, &solver)?;
            let (state, diags) = solver.solve_with_diagnostics(&f)?;
            let fold = |g: fn(&(crate::mode_solver::ModeDiagnostics, crate::mode_solver::ModeDiagnostics)) -> f64| {
                diags.iter().map(g).fold(0.0, f64::max)
            };
            let summary = LinearSummary {
                norms: NormReport::of_state(&state, &solver.grid, &solver.modes)?,
                max_mode_residual: fold(|d| d.0.residual.max(d.1.residual)),
                max_condition: fold(|d| d.0.condition.max(d.1.condition)),
            };
            println!("l2r = {:e}, max mode residual = {:e}", summary.norms.l2r, summary.max_mode_residual);
            emit("solve-linear", &cfg, summary, &common.out.join("solve_linear.json"))?;
            if common.verbose {
                write_text(&mode_diagnostics_csv(&diags), common.out.join("modes.csv"))?;
            }
            Ok(Outcome::Pass)
        }
        Command::SolveNonlinear { common, forcing: fpath } => {
            let cfg = load(&common)?;
            let solver = LinearSolver::from_config(&cfg)?;
            let f = forcing(fpath.as_deref(), &cfg, &solver)?;
            let (state, report) = picard_iterate(&f, &cfg, &solver, None)?;
            let (grid, modes) = (&solver.grid, &solver.modes);
            let momentum = momentum_residual(&state, &f, &solver.base, grid, modes)?;
            let summary = NonlinearSummary {
                set_s: set_s_check(&state, &cfg, grid, modes)?,
                momentum_relative: momentum.relative(),
                momentum,
                fixed_point_defect: fixed_point_defect(&state, &f, &solver, cfg.dealias)?,
                norms: NormReport::of_state(&state, grid, modes)?,
                iteration: report,
            };
            let status = summary.iteration.status;
            println!(
                "{} after {} iterations, residual {:e}, momentum residual {:e}",
                status.as_str(),
                summary.iteration.records.len(),
                summary.iteration.final_residual().unwrap_or(f64::NAN),
                summary.momentum_relative
            );
            write_text(&summary.iteration.residual_csv(), common.out.join("residuals.csv"))?;
            if common.verbose {
                let (_, diags) = solver.solve_with_diagnostics(&f)?;
                write_text(&mode_diagnostics_csv(&diags), common.out.join("modes.csv"))?;
            }
            emit("solve-nonlinear", &cfg, summary, &common.out.join("solve_nonlinear.json"))?;
            Ok(match status {
                IterationStatus::Converged => Outcome::Pass,
                s => Outcome::Fail(format!("iteration ended with status {}", s.as_str())),
            })
        }
        Command::SweepPhi {
            common,
            case_tag,
            phis,
            samples,
        } => {
            let cfg = load(&common)?;
            let report = phi_sweep(&case_tag, &phis, samples, &cfg)?;
            let name = slug(&report.case);
            write_text(&report.cells_csv(), common.out.join(format!("sweep_{name}.csv")))?;
            println!(
                "{}: slope {:.4} (claimed {:.4}), normalized growth {:.3}, spread {:.3}",
                report.case, report.slope, report.claimed_exponent, report.growth, report.spread
            );
            let outcome = if report.failures > 0 {
                Outcome::Fail(format!("{} sweep cells failed", report.failures))
            } else if !(report.growth <= SWEEP_MAX_GROWTH) {
                Outcome::Fail(format!(
                    "normalized ratio grows by {:.3} > {SWEEP_MAX_GROWTH}",
                    report.growth
                ))
            } else {
                Outcome::Pass
            };
            emit("sweep-phi", &cfg, report, &common.out.join(format!("sweep_{name}.json")))?;
            Ok(outcome)
        }
        Command::DecayFit {
            common,
            forcing: fpath,
            window,
            support,
        } => {
            let cfg = load(&common)?;
            let solver = LinearSolver::from_config(&cfg)?;
            let f = forcing(fpath.as_deref(), &cfg, &solver)?;
            let (state, report) = picard_iterate(&f, &cfg, &solver, None)?;
            if report.status != IterationStatus::Converged {
                return Ok(Outcome::Fail(format!(
                    "iteration ended with status {}",
                    report.status.as_str()
                )));
            }
            let v = velocity_from_stream(&state, &solver.grid, &solver.modes)?;
            let mut fit = fit_decay_rate(&v, (window[0], window[1]), support, &solver.grid, &solver.modes)?;
            fit.phi = Some(cfg.phi);
            println!("rate {:.6}, R^2 {:.6}", fit.total.rate, fit.total.r_squared);
            let outcome = if fit.total.rate > 0.0 && fit.total.r_squared >= DECAY_MIN_R_SQUARED {
                Outcome::Pass
            } else {
                Outcome::Fail(format!(
                    "rate {} with R^2 {} (need > 0 and >= {DECAY_MIN_R_SQUARED})",
                    fit.total.rate, fit.total.r_squared
                ))
            };
            emit("decay-fit", &cfg, fit, &common.out.join("decay_fit.json"))?;
            Ok(outcome)
        }
        Command::CheckInequalities { common, samples } => {
            let cfg = load(&common)?;
            let grid = cfg.radial_grid()?;
            let reports = inequality_suite(samples, cfg.seed, &grid)?;
            let mut violations = 0;
            for rep in reports {
                violations += rep.violations();
                println!("{}: {} violations", rep.family, rep.violations());
                let path = common.out.join(format!("inequalities_{}.json", rep.family));
                emit("check-inequalities", &cfg, rep, &path)?;
            }
            Ok(if violations == 0 {
                Outcome::Pass
            } else {
                Outcome::Fail(format!("{violations} inequality violations"))
            })
        }
        Command::Calibrate { common, samples } => {
            let cfg = load(&common)?;
            let solver = LinearSolver::from_config(&cfg)?;
            let cal = calibrate_with(&cfg, &solver, samples)?;
            println!("c1_cal = {:.6}, c2_cal = {:.6}", cal.c1_cal, cal.c2_cal);
            emit("calibrate", &cfg, cal, &common.out.join("calibration.json"))?;
            Ok(Outcome::Pass)
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("PIPEFLOW_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        // Fails only if the pool already exists, which keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn is_input_error(e: &PipeError) -> bool {
    !matches!(e, PipeError::SingularMode { .. } | PipeError::Json(_))
}

/// Parse `argv` (program name first), run the subcommand and return the
/// process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    eprint!("{}", e.render());
                    2
                }
            };
        }
    };
    init_threads();
    match execute(cli.command) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail(msg)) => {
            eprintln!("check failed: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_input_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("Fr→v:L2"), "Fr_v_L2");
        assert_eq!(slug("Ftheta→dzvtheta:L2"), "Ftheta_dzvtheta_L2");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_command(["pipeflow"]), 2);
        assert_eq!(run_command(["pipeflow", "frobnicate"]), 2);
        assert_eq!(run_command(["pipeflow", "sweep-phi", "--phis", "1,2,3"]), 2);
        assert_eq!(run_command(["pipeflow", "--help"]), 0);
    }

    #[test]
    fn bad_inputs_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run_command(["pipeflow", "sweep-phi", "--case", "nope", "--out", out]),
            2
        );
        assert_eq!(
            run_command(["pipeflow", "calibrate", "--config", "/does/not/exist", "--out", out]),
            2
        );
        assert_eq!(
            run_command(["pipeflow", "calibrate", "--out", dir.path().join("missing").to_str().unwrap()]),
            2
        );
    }
}
