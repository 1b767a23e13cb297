//! Flux sweeps of all six linear estimates on a reduced grid.

use pipeflow::analysis::{phi_sweep, SweepCase};
use pipeflow::config::FlowConfig;

fn main() -> pipeflow::error::Result<()> {
    let cfg = FlowConfig { n_r: 48, n_z: 128, ..FlowConfig::default() };
    let phis = [1e2, 1e3, 1e4];
    println!("{:<22} {:>9} {:>9} {:>8} {:>8}", "case", "claimed", "slope", "growth", "spread");
    for case in SweepCase::ALL {
        let rep = phi_sweep(case.tag(), &phis, 10, &cfg)?;
        println!(
            "{:<22} {:>9.4} {:>9.4} {:>8.3} {:>8.3}",
            rep.case, rep.claimed_exponent, rep.slope, rep.growth, rep.spread
        );
    }
    Ok(())
}
