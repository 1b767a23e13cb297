//! Nonlinear solve in the small-forcing regime: calibrate, iterate, and
//! check the result.

use pipeflow::analysis::sampler::regime_forcing;
use pipeflow::config::FlowConfig;
use pipeflow::nonlinear::{calibrate_with, fixed_point_defect, momentum_residual, picard_iterate, LinearSolver};
use pipeflow::norms::NormReport;

fn main() -> pipeflow::error::Result<()> {
    let phi = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100.0);
    let mut cfg = FlowConfig { phi, ..FlowConfig::default() };
    let solver = LinearSolver::from_config(&cfg)?;
    let cal = calibrate_with(&cfg, &solver, 20)?;
    cfg.c1_cal = cal.c1_cal;
    cfg.c2_cal = cal.c2_cal;
    println!("c1 = {:.4}, c2 = {:.4}", cfg.c1_cal, cfg.c2_cal);

    let f = regime_forcing(phi, cfg.seed, &solver.grid, &solver.modes);
    let (state, report) = picard_iterate(&f, &cfg, &solver, None)?;
    for rec in &report.records {
        println!("iter {:>3}  residual {:.3e}  in S: {}", rec.iteration, rec.residual, rec.set_s.member);
    }
    println!("status: {}", report.status.as_str());

    let m = momentum_residual(&state, &f, &solver.base, &solver.grid, &solver.modes)?;
    println!("momentum residual (relative) {:.2e}", m.relative());
    println!("fixed-point defect {:.2e}", fixed_point_defect(&state, &f, &solver, cfg.dealias)?);
    println!("{:#?}", NormReport::of_state(&state, &solver.grid, &solver.modes)?);
    Ok(())
}
