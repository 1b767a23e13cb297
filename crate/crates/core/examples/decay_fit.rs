//! Downstream decay of the nonlinear solution for several fluxes.

use pipeflow::analysis::fit_decay_rate;
use pipeflow::analysis::sampler::regime_forcing;
use pipeflow::config::FlowConfig;
use pipeflow::fields::velocity_from_stream;
use pipeflow::nonlinear::{picard_iterate, LinearSolver};

fn main() -> pipeflow::error::Result<()> {
    for phi in [10.0, 30.0, 100.0, 300.0] {
        let cfg = FlowConfig { phi, n_z: 512, ..FlowConfig::default() };
        let solver = LinearSolver::from_config(&cfg)?;
        let f = regime_forcing(phi, cfg.seed, &solver.grid, &solver.modes);
        let (state, _) = picard_iterate(&f, &cfg, &solver, None)?;
        let v = velocity_from_stream(&state, &solver.grid, &solver.modes)?;
        let fit = fit_decay_rate(&v, (5.0, 12.0), 2.0, &solver.grid, &solver.modes)?;
        println!("phi = {phi:>5}: rate {:.4}  R^2 {:.5}", fit.total.rate, fit.total.r_squared);
        for r in &fit.rejected {
            println!("    not fitted: {r}");
        }
    }
    Ok(())
}
